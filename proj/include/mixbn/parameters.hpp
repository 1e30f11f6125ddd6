#ifndef MIXBN_PARAMETERS_HPP
#define MIXBN_PARAMETERS_HPP

#include "mixbn/dataset.hpp"
#include "mixbn/graph.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mixbn {

// Conditional probability table. Rows are keyed by the parent labels in
// `parents` order; only configurations seen in training are stored.
struct Cpt {
    std::vector<std::string> states;
    std::vector<std::string> parents;
    std::map<std::vector<std::string>, std::vector<double>> table;

    // nullptr when the configuration was never observed.
    const std::vector<double>* find(const std::vector<std::string>& config) const;
    std::size_t state_index(const std::string& label) const;  // states.size() if unknown

    friend bool operator==(const Cpt&, const Cpt&) = default;
};

// y ~ Normal(intercept + sum_i coef_i * x_i, residual_variance).
struct LinearGaussian {
    double intercept = 0.0;
    std::vector<std::pair<std::string, double>> coefficients;  // parent order
    double residual_variance = 0.0;
    double marginal_mean = 0.0;
    double marginal_variance = 0.0;

    // `parent_values` aligned with `coefficients`.
    double mean(std::span<const double> parent_values) const;

    friend bool operator==(const LinearGaussian&, const LinearGaussian&) = default;
};

// One LinearGaussian per observed discrete-parent configuration, plus a
// fallback fitted without the discrete parents.
struct ConditionalLinearGaussian {
    std::vector<std::string> discrete_parents;
    std::vector<std::string> continuous_parents;
    std::map<std::vector<std::string>, LinearGaussian> components;
    LinearGaussian fallback;

    const LinearGaussian& select(const std::vector<std::string>& config) const;

    friend bool operator==(const ConditionalLinearGaussian&, const ConditionalLinearGaussian&) = default;
};

using Distribution = std::variant<Cpt, LinearGaussian, ConditionalLinearGaussian>;

struct NodeModel {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    std::vector<std::string> parents;  // declaration order
    Distribution distribution;

    friend bool operator==(const NodeModel&, const NodeModel&) = default;
};

// A learned network: structure, one distribution per node (in Dag node
// order) and the discretization that structure search ran on.
class BayesianNetworkModel {
public:
    BayesianNetworkModel() = default;
    // Throws InvariantError if nodes do not line up with the graph or a
    // distribution does not fit its node's kind and parent kinds.
    BayesianNetworkModel(Dag dag, std::vector<NodeModel> nodes, DiscretizationMap discretization, double alpha);

    const Dag& dag() const { return dag_; }
    const std::vector<NodeModel>& nodes() const { return nodes_; }
    const NodeModel& node(std::string_view name) const;
    const NodeModel& node(std::size_t index) const { return nodes_.at(index); }
    const DiscretizationMap& discretization() const { return discretization_; }
    std::size_t bins() const { return discretization_.bins; }
    double alpha() const { return alpha_; }
    Schema schema() const;

    friend bool operator==(const BayesianNetworkModel&, const BayesianNetworkModel&) = default;

private:
    Dag dag_;
    std::vector<NodeModel> nodes_;
    DiscretizationMap discretization_;
    double alpha_ = 1.0;
};

// Precision of the zero-mean prior on regression coefficients.
inline constexpr double kRegressionPriorPrecision = 1e-6;
// Subsamples smaller than this use the fallback regression.
inline constexpr std::size_t kMinComponentRows = 2;

// P(child = k | j) = (N_jk + alpha) / (N_j + alpha * r).
Cpt fit_cpt(const Dataset& d, const std::string& child, const std::vector<std::string>& parents, double alpha = 1.0);

// Posterior-mean Bayesian linear regression (ridge with the prior precision
// above, unpenalized intercept). Variances use the population convention.
LinearGaussian fit_linear_gaussian(const Dataset& d, const std::string& child, const std::vector<std::string>& parents);

ConditionalLinearGaussian fit_conditional_linear_gaussian(const Dataset& d, const std::string& child,
                                                          const std::vector<std::string>& discrete_parents,
                                                          const std::vector<std::string>& continuous_parents);

// Fits every node of `dag` on `d` with the three-case dispatch on node and
// parent kinds.
BayesianNetworkModel fit_parameters(const Dataset& d, const Dag& dag, DiscretizationMap discretization,
                                    double alpha = 1.0);

struct MixLearnOptions {
    std::size_t bins = 5;
    std::size_t max_parents = 4;
    double alpha = 1.0;
};

// Discretize, search structure on the discrete copy (with the orientation
// guard), then fit parameters on the raw data.
BayesianNetworkModel mixlearn(const Dataset& d, const EdgeConstraints& constraints, const MixLearnOptions& options);
BayesianNetworkModel mixlearn(const Dataset& d, const EdgeConstraints& constraints, std::size_t bins,
                              std::size_t max_parents);

}  // namespace mixbn

#endif  // MIXBN_PARAMETERS_HPP
