#ifndef MIXBN_SIMILARITY_HPP
#define MIXBN_SIMILARITY_HPP

#include "mixbn/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mixbn {

enum class Metric { gower, gower_weighted, cosine, filter };

std::string_view to_string(Metric metric);
// Accepts "gower", "gower_weighted"/"gower-weighted", "cosine", "filter".
Metric parse_metric(std::string_view text);

inline constexpr double kDefaultEpsilon = 0.1;
inline constexpr std::size_t kDefaultAnalogues = 40;

struct DistanceSpec {
    Metric metric = Metric::gower;
    Schema schema;
    std::vector<double> weights;    // one per column, >= 0
    std::optional<double> epsilon;  // filter metric only
    RangeTable ranges;

    // Unit weights.
    static DistanceSpec gower(const Schema& schema, RangeTable ranges);
    // Weight 1 for categorical columns, `continuous_weight` for continuous.
    static DistanceSpec gower_weighted(const Schema& schema, RangeTable ranges, double continuous_weight);
    static DistanceSpec cosine(const Schema& schema, RangeTable ranges);
    static DistanceSpec filter(const Schema& schema, RangeTable ranges, double epsilon);

    // Throws InputError when the invariants (sizes, a positive weight,
    // epsilon iff filter, epsilon in (0,1]) do not hold.
    void validate() const;
};

// 1 - sum_j w_j S_j / sum_j w_j over variables observed in both rows.
double gower_distance(const Row& u, const Row& t, const DistanceSpec& spec);

// `candidate` against `target`: categorical coordinates are 1 on the target
// side and the match indicator on the candidate side; continuous coordinates
// are min-max normalized values.
double cosine_distance(const Row& candidate, const Row& target, const Schema& schema, const RangeTable& ranges);

// Number of variables in which `row` is close to `target`.
std::size_t closeness_count(const Row& target, const Row& row, const Schema& schema, const RangeTable& ranges,
                            double epsilon);

// Rows close in all variables first, then in all but one, and so on; ties by
// row index. Ranges come from the pool unless given.
std::vector<std::size_t> filter_analogues(const Row& target, const Dataset& pool, double epsilon, std::size_t n);
std::vector<std::size_t> filter_analogues(const Row& target, const Dataset& pool, double epsilon, std::size_t n,
                                          const RangeTable& ranges);

struct AnalogueQuery {
    Row target;
    std::size_t n_analogues = kDefaultAnalogues;
    DistanceSpec spec;
};

// Pool row indices ordered by increasing distance (ties by index). The
// caller keeps the target out of the pool.
std::vector<std::size_t> nearest_analogues(const AnalogueQuery& query, const Dataset& pool);

struct VariablePenalty {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    double mean_penalty = 0.0;
    std::size_t pairs = 0;  // comparable pairs seen
};

struct PenaltyReport {
    std::vector<VariablePenalty> variables;  // variables with comparable pairs
    std::vector<std::string> excluded;       // variables without any
    double continuous_weight = 0.0;          // mean categorical / mean continuous penalty
    bool sampled = false;
    std::size_t pairs_used = 0;
};

inline constexpr std::size_t kDefaultMaxPairs = 1'000'000;

// Mean per-variable Gower penalty 1 - S_j over all unordered pairs (or a
// seeded sample of `max_pairs` pairs when there are more).
PenaltyReport penalty_weights(const Dataset& pool, std::size_t max_pairs, std::uint64_t seed);

}  // namespace mixbn

#endif  // MIXBN_SIMILARITY_HPP
