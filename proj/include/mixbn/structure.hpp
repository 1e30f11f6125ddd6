#ifndef MIXBN_STRUCTURE_HPP
#define MIXBN_STRUCTURE_HPP

#include "mixbn/dataset.hpp"
#include "mixbn/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mixbn {

// Returns true when the edge parent -> child must not appear in a structure.
using EdgePredicate = std::function<bool(const std::string& parent, const std::string& child)>;

// Integer codes of a fully categorical dataset. Codes index the sorted label
// list of each column; -1 marks a missing cell.
class CodedData {
public:
    // Throws InputError if any column is continuous.
    explicit CodedData(const Dataset& d);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return states_.size(); }
    int code(std::size_t row, std::size_t col) const { return codes_[col * n_rows_ + row]; }
    // Distinct observed labels in the column.
    std::size_t states(std::size_t col) const { return states_[col]; }

private:
    std::size_t n_rows_ = 0;
    std::vector<int> codes_;  // column-major
    std::vector<std::size_t> states_;
};

// Memoized family scores keyed by (child, sorted parent indices). Concurrent
// lookups are allowed; insertion takes an exclusive lock.
class FamilyScoreCache {
public:
    using Key = std::pair<std::size_t, std::vector<std::size_t>>;

    std::optional<std::optional<double>> find(const Key& key) const;
    void insert(Key key, std::optional<double> score);
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<Key, std::optional<double>> scores_;
};

// Log K2 (Cooper-Herskovits) family scores over a discretized dataset:
//   sum_j [ lnG(r) - lnG(N_j + r) + sum_k lnG(N_jk + 1) ]
// over the parent configurations j observed among complete-case rows.
class K2Scorer {
public:
    explicit K2Scorer(const Dataset& discrete, bool use_cache = true);

    // std::nullopt when no row is complete over the family.
    std::optional<double> try_family(std::size_t child, std::span<const std::size_t> parents) const;
    double family(std::size_t child, std::span<const std::size_t> parents) const;
    double total(const Dag& g) const;

    const CodedData& data() const { return data_; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t cache_size() const { return cache_.size(); }

private:
    std::optional<double> compute(std::size_t child, std::span<const std::size_t> parents) const;

    CodedData data_;
    std::vector<std::string> names_;
    bool use_cache_;
    mutable FamilyScoreCache cache_;
};

double k2_family_score(const Dataset& d, const std::string& child, const std::vector<std::string>& parents);
double k2_total_score(const Dataset& d, const Dag& g);

struct HillClimbOptions {
    std::size_t max_parents = 4;
    EdgePredicate forbidden;
    bool use_cache = true;
};

struct HillClimbResult {
    Dag dag;
    // Total score of the start graph followed by the score after each move.
    std::vector<double> score_trace;
};

// Smallest score gain accepted as an improvement.
inline constexpr double kMinScoreGain = 1e-9;

// Steepest-ascent hill climbing over add/delete/reverse moves starting from
// the required edges. Ties go to add < delete < reverse, then parent index,
// then child index.
HillClimbResult hill_climb_traced(const Dataset& discrete, const EdgeConstraints& constraints,
                                  const HillClimbOptions& options);

Dag hill_climb(const Dataset& discrete, const EdgeConstraints& constraints, std::size_t max_parents,
               const EdgePredicate& forbidden = {});

// Forbids edges from continuous columns into categorical ones.
EdgePredicate orientation_guard(const Schema& schema);

}  // namespace mixbn

#endif  // MIXBN_STRUCTURE_HPP
