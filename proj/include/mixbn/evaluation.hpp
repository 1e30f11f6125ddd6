#ifndef MIXBN_EVALUATION_HPP
#define MIXBN_EVALUATION_HPP

#include "mixbn/dataset.hpp"
#include "mixbn/similarity.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mixbn {

// Training-set choice for a held-out row: every other row, or its nearest
// analogues under one of the similarity metrics.
enum class Regime { all_dataset, cosine, gower, filter, gower_weighted };

std::string_view to_string(Regime regime);
// Accepts the enum spelling and dashed variants ("all-dataset", "gower-weighted").
Regime parse_regime(std::string_view text);
std::vector<Regime> all_regimes();

struct EvalConfig {
    std::vector<Regime> regimes = all_regimes();
    std::size_t n_analogues = kDefaultAnalogues;
    std::size_t bins = 5;
    std::size_t max_parents = 4;
    std::size_t m_samples = 100;
    std::uint64_t seed = 0;
    double anomaly_fraction = 0.10;
    double epsilon = kDefaultEpsilon;
    // Continuous weight for gower_weighted; derived by penalty analysis if unset.
    std::optional<double> continuous_weight;
    std::size_t max_pairs = kDefaultMaxPairs;
    // Evaluate only this many seeded-sampled target rows.
    std::optional<std::size_t> row_sample;
    // Anomaly model trained on the perturbed table instead of the clean rows.
    bool anomaly_train_on_perturbed = false;
    // 0: MIXBN_THREADS or hardware concurrency.
    std::size_t threads = 0;
    // Called with (target row, regime, training row indices) before each fit.
    std::function<void(std::size_t, Regime, const std::vector<std::size_t>&)> on_training_set;

    void validate() const;
};

struct MetricCell {
    double value = 0.0;     // accuracy or RMSE
    std::size_t count = 0;  // rows with non-missing ground truth that were restored
};

struct ParameterResult {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    std::map<Regime, MetricCell> cells;
};

struct AnomalyResult {
    std::string name;
    std::optional<double> roc_auc;
    std::size_t injected = 0;
    std::size_t scored = 0;
    double flag_true_positive_rate = 0.0;   // 2-sigma operating point
    double flag_false_positive_rate = 0.0;
    std::string skipped;  // reason when roc_auc is empty
};

struct EvalReport {
    EvalConfig config;
    std::optional<double> continuous_weight;  // weight actually used
    std::size_t rows_total = 0;
    std::size_t rows_evaluated = 0;
    std::size_t rows_skipped_no_evidence = 0;
    std::size_t training_failures = 0;
    std::size_t restore_failures = 0;
    std::size_t evidence_dropped = 0;  // categorical labels unknown to a trained model
    std::vector<ParameterResult> parameters;
    std::vector<AnomalyResult> anomalies;
};

// Mann-Whitney AUC with midranks for ties. Throws InputError unless both
// classes are present.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

// Splitmix64-based seed derivation so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

std::size_t worker_count(std::size_t requested);

// Restoration part of the report: for each target row and regime, train on
// the regime's rows (never the target), delete each parameter in turn and
// restore it.
EvalReport leave_one_out(const Dataset& d, const EvalConfig& config);

// Injects uniform in-range values into anomaly_fraction of each continuous
// column and scores every row.
std::vector<AnomalyResult> anomaly_benchmark(const Dataset& d, const EvalConfig& config);

// Both parts.
EvalReport evaluate(const Dataset& d, const EvalConfig& config);

std::string report_to_json(const EvalReport& report);
// Aligned text: parameters x regimes, then ROC-AUC, with reference values for
// recognised reservoir parameter names.
std::string report_to_table(const EvalReport& report);

}  // namespace mixbn

#endif  // MIXBN_EVALUATION_HPP
