#ifndef MIXBN_INFERENCE_HPP
#define MIXBN_INFERENCE_HPP

#include "mixbn/dataset.hpp"
#include "mixbn/parameters.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mixbn {

// Observed node values. Keys are node names.
using Evidence = std::map<std::string, Value>;

// Throws InputError for unknown nodes, missing or kind-mismatched values and
// categorical labels the node's distribution does not know.
void validate_evidence(const BayesianNetworkModel& model, const Evidence& evidence);

// Drops evidence entries that validate_evidence would reject because of an
// unknown categorical label. Returns the names that were dropped.
std::vector<std::string> drop_unknown_labels(const BayesianNetworkModel& model, Evidence& evidence);

// Samples per node, node order as in the model.
struct SampleSet {
    std::vector<std::string> nodes;
    std::vector<std::vector<Value>> values;  // values[node][sample]
    std::size_t m = 0;

    const std::vector<Value>& of(const std::string& node) const;
};

inline constexpr std::size_t kDefaultSamples = 100;

// Ancestral sampling in topological order with evidence nodes clamped.
// Unseen parent configurations fall back to a uniform CPT row or to the
// conditional Gaussian's fallback regression.
SampleSet forward_sample(const BayesianNetworkModel& model, const Evidence& evidence, std::size_t m,
                         std::uint64_t seed);

// `record` is aligned with the model's node order. Missing categorical cells
// get the sample mode (ties to the smallest label), missing continuous cells
// the sample mean. Throws InputError when nothing is missing.
Row restore(const BayesianNetworkModel& model, const Row& record, std::size_t m, std::uint64_t seed);

// Evidence built from the non-missing cells of a model-aligned row.
Evidence evidence_from_row(const BayesianNetworkModel& model, const Row& record);

struct AnomalyScore {
    double score = 0.0;  // |value - sample mean| / sample std
    bool is_anomaly = false;
    double sample_mean = 0.0;
    double sample_std = 0.0;
};

inline constexpr double kAnomalyThreshold = 2.0;

// Samples `target` given every other non-missing cell of `record` as
// evidence and standardizes the observed value against the sample.
AnomalyScore anomaly_score(const BayesianNetworkModel& model, const Row& record, const std::string& target,
                           std::size_t m, std::uint64_t seed);

}  // namespace mixbn

#endif  // MIXBN_INFERENCE_HPP
