#include "mixbn/parameters.hpp"

#include "mixbn/error.hpp"
#include "mixbn/structure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <set>

namespace mixbn {

const std::vector<double>* Cpt::find(const std::vector<std::string>& config) const {
    auto it = table.find(config);
    return it == table.end() ? nullptr : &it->second;
}

std::size_t Cpt::state_index(const std::string& label) const {
    auto it = std::lower_bound(states.begin(), states.end(), label);
    if (it == states.end() || *it != label) return states.size();
    return static_cast<std::size_t>(it - states.begin());
}

double LinearGaussian::mean(std::span<const double> parent_values) const {
    if (parent_values.size() != coefficients.size())
        throw InvariantError("parent value count does not match regression coefficients");
    double m = intercept;
    for (std::size_t i = 0; i < coefficients.size(); ++i) m += coefficients[i].second * parent_values[i];
    return m;
}

const LinearGaussian& ConditionalLinearGaussian::select(const std::vector<std::string>& config) const {
    auto it = components.find(config);
    return it == components.end() ? fallback : it->second;
}

namespace {

std::vector<std::size_t> complete_rows(const Dataset& d, std::size_t child, const std::vector<std::size_t>& parents) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        if (d.at(r, child).is_missing()) continue;
        if (std::any_of(parents.begin(), parents.end(), [&](std::size_t p) { return d.at(r, p).is_missing(); }))
            continue;
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::size_t> columns_of(const Dataset& d, const std::vector<std::string>& names, ColumnKind kind,
                                    std::string_view role) {
    std::vector<std::size_t> cols;
    for (const auto& name : names) {
        const auto c = d.column_index(name);
        if (d.kind(c) != kind)
            throw InputError(std::string(role) + " '" + name + "' must be " + std::string(to_string(kind)));
        cols.push_back(c);
    }
    return cols;
}

LinearGaussian fit_on_rows(const Dataset& d, std::size_t child, const std::vector<std::size_t>& parents,
                           const std::vector<std::size_t>& rows) {
    const auto n = rows.size();
    const auto p = parents.size();
    if (n < kMinComponentRows)
        throw InputError("'" + d.schema()[child].name + "' has " + std::to_string(n) +
                         " usable rows; regression needs at least 2");

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        y(static_cast<Eigen::Index>(i)) = d.at(rows[i], child).number();
        for (std::size_t j = 0; j < p; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.at(rows[i], parents[j]).number();
    }

    LinearGaussian lg;
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;
    lg.marginal_mean = y_mean;
    lg.marginal_variance = yc.squaredNorm() / static_cast<double>(n);

    if (p == 0) {
        lg.intercept = lg.marginal_mean;
        lg.residual_variance = lg.marginal_variance;
        return lg;
    }

    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += kRegressionPriorPrecision;
    const Eigen::VectorXd beta = gram.ldlt().solve(xc.transpose() * yc);

    lg.intercept = y_mean - x_mean.dot(beta);
    for (std::size_t j = 0; j < p; ++j)
        lg.coefficients.emplace_back(d.schema()[parents[j]].name, beta(static_cast<Eigen::Index>(j)));
    const Eigen::VectorXd residual = yc - xc * beta;
    lg.residual_variance = residual.squaredNorm() / static_cast<double>(n);
    return lg;
}

std::vector<std::string> config_of(const Dataset& d, std::size_t row, const std::vector<std::size_t>& parents) {
    std::vector<std::string> config;
    config.reserve(parents.size());
    for (auto p : parents) config.push_back(d.at(row, p).label());
    return config;
}

}  // namespace

Cpt fit_cpt(const Dataset& d, const std::string& child, const std::vector<std::string>& parents, double alpha) {
    if (alpha < 0.0) throw InputError("smoothing alpha must be non-negative");
    const auto c = columns_of(d, {child}, ColumnKind::categorical, "CPT child").front();
    const auto ps = columns_of(d, parents, ColumnKind::categorical, "CPT parent");
    const auto rows = complete_rows(d, c, ps);
    if (rows.empty()) throw InputError("no complete-case rows for the family of '" + child + "'");

    Cpt cpt;
    cpt.states = d.labels(c);
    cpt.parents = parents;
    const auto r = cpt.states.size();

    std::map<std::vector<std::string>, std::vector<double>> counts;
    for (auto row : rows) {
        auto& cell = counts[config_of(d, row, ps)];
        if (cell.empty()) cell.assign(r, 0.0);
        cell[cpt.state_index(d.at(row, c).label())] += 1.0;
    }
    for (auto& [config, cell] : counts) {
        double n_j = 0.0;
        for (double v : cell) n_j += v;
        const double denom = n_j + alpha * static_cast<double>(r);
        std::vector<double> probs(r);
        for (std::size_t k = 0; k < r; ++k) probs[k] = (cell[k] + alpha) / denom;
        cpt.table.emplace(config, std::move(probs));
    }
    return cpt;
}

LinearGaussian fit_linear_gaussian(const Dataset& d, const std::string& child,
                                   const std::vector<std::string>& parents) {
    const auto c = columns_of(d, {child}, ColumnKind::continuous, "regression child").front();
    const auto ps = columns_of(d, parents, ColumnKind::continuous, "regression parent");
    return fit_on_rows(d, c, ps, complete_rows(d, c, ps));
}

ConditionalLinearGaussian fit_conditional_linear_gaussian(const Dataset& d, const std::string& child,
                                                          const std::vector<std::string>& discrete_parents,
                                                          const std::vector<std::string>& continuous_parents) {
    if (discrete_parents.empty()) throw InputError("conditional Gaussian for '" + child + "' needs a discrete parent");
    const auto c = columns_of(d, {child}, ColumnKind::continuous, "conditional Gaussian child").front();
    const auto dps = columns_of(d, discrete_parents, ColumnKind::categorical, "discrete parent");
    const auto cps = columns_of(d, continuous_parents, ColumnKind::continuous, "continuous parent");

    ConditionalLinearGaussian clg;
    clg.discrete_parents = discrete_parents;
    clg.continuous_parents = continuous_parents;
    clg.fallback = fit_on_rows(d, c, cps, complete_rows(d, c, cps));

    std::vector<std::size_t> all = dps;
    all.insert(all.end(), cps.begin(), cps.end());
    std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
    for (auto row : complete_rows(d, c, all)) groups[config_of(d, row, dps)].push_back(row);
    for (const auto& [config, rows] : groups)
        if (rows.size() >= kMinComponentRows) clg.components.emplace(config, fit_on_rows(d, c, cps, rows));
    return clg;
}

BayesianNetworkModel::BayesianNetworkModel(Dag dag, std::vector<NodeModel> nodes, DiscretizationMap discretization,
                                           double alpha)
    : dag_(std::move(dag)), nodes_(std::move(nodes)), discretization_(std::move(discretization)), alpha_(alpha) {
    if (nodes_.size() != dag_.size()) throw InvariantError("model needs exactly one distribution per graph node");
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        const auto& node = nodes_[v];
        if (node.name != dag_.nodes()[v]) throw InvariantError("model node order differs from graph order");
        if (node.parents != dag_.parents(node.name))
            throw InvariantError("parents of '" + node.name + "' differ from the graph");
        std::vector<std::string> discrete, continuous;
        for (const auto& p : node.parents)
            (nodes_[dag_.index_of(p)].kind == ColumnKind::categorical ? discrete : continuous).push_back(p);

        auto fail = [&](const char* what) { throw InvariantError("node '" + node.name + "': " + what); };
        auto check_lg = [&](const LinearGaussian& lg) {
            if (lg.coefficients.size() != continuous.size()) fail("coefficients do not match continuous parents");
            for (std::size_t i = 0; i < continuous.size(); ++i)
                if (lg.coefficients[i].first != continuous[i]) fail("coefficients do not match continuous parents");
            if (lg.residual_variance < 0.0 || lg.marginal_variance < 0.0) fail("negative variance");
        };
        if (node.kind == ColumnKind::categorical) {
            const auto* cpt = std::get_if<Cpt>(&node.distribution);
            if (!cpt) fail("categorical node needs a CPT");
            if (!continuous.empty()) fail("categorical node with a continuous parent");
            if (cpt->parents != node.parents) fail("CPT parents differ from the graph");
            for (const auto& [config, probs] : cpt->table)
                if (config.size() != cpt->parents.size() || probs.size() != cpt->states.size())
                    fail("CPT row has the wrong shape");
        } else if (discrete.empty()) {
            const auto* lg = std::get_if<LinearGaussian>(&node.distribution);
            if (!lg) fail("continuous node without discrete parents needs a linear Gaussian");
            check_lg(*lg);
        } else {
            const auto* clg = std::get_if<ConditionalLinearGaussian>(&node.distribution);
            if (!clg) fail("continuous node with discrete parents needs a conditional linear Gaussian");
            if (clg->discrete_parents != discrete || clg->continuous_parents != continuous)
                fail("conditional Gaussian parents differ from the graph");
            check_lg(clg->fallback);
            for (const auto& [config, lg] : clg->components) {
                if (config.size() != discrete.size()) fail("component key has the wrong arity");
                check_lg(lg);
            }
        }
    }
}

const NodeModel& BayesianNetworkModel::node(std::string_view name) const { return nodes_.at(dag_.index_of(name)); }

Schema BayesianNetworkModel::schema() const {
    Schema schema;
    for (const auto& node : nodes_) schema.push_back({node.name, node.kind});
    return schema;
}

BayesianNetworkModel fit_parameters(const Dataset& d, const Dag& dag, DiscretizationMap discretization, double alpha) {
    std::vector<NodeModel> nodes;
    nodes.reserve(dag.size());
    for (const auto& name : dag.nodes()) {
        const auto c = d.column_index(name);
        NodeModel node{name, d.kind(c), dag.parents(name), {}};
        std::vector<std::string> discrete, continuous;
        for (const auto& p : node.parents)
            (d.kind(d.column_index(p)) == ColumnKind::categorical ? discrete : continuous).push_back(p);

        if (node.kind == ColumnKind::categorical) {
            if (!continuous.empty())
                throw InputError("categorical node '" + name + "' cannot have continuous parent '" + continuous.front() +
                                 "'");
            node.distribution = fit_cpt(d, name, node.parents, alpha);
        } else if (discrete.empty()) {
            node.distribution = fit_linear_gaussian(d, name, continuous);
        } else {
            node.distribution = fit_conditional_linear_gaussian(d, name, discrete, continuous);
        }
        nodes.push_back(std::move(node));
    }
    return BayesianNetworkModel(dag, std::move(nodes), std::move(discretization), alpha);
}

BayesianNetworkModel mixlearn(const Dataset& d, const EdgeConstraints& constraints, const MixLearnOptions& options) {
    if (d.n_rows() == 0) throw InputError("cannot learn a network from an empty dataset");
    auto [discrete, map] = quantile_discretize(d, options.bins);
    const HillClimbOptions hc{options.max_parents, orientation_guard(d.schema()), true};
    const Dag dag = hill_climb_traced(discrete, constraints, hc).dag;
    return fit_parameters(d, dag, std::move(map), options.alpha);
}

BayesianNetworkModel mixlearn(const Dataset& d, const EdgeConstraints& constraints, std::size_t bins,
                              std::size_t max_parents) {
    return mixlearn(d, constraints, MixLearnOptions{bins, max_parents, 1.0});
}

}  // namespace mixbn
