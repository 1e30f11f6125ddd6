#include "mixbn/structure.hpp"

#include "mixbn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <unordered_map>

namespace mixbn {

CodedData::CodedData(const Dataset& d) : n_rows_(d.n_rows()), codes_(d.n_rows() * d.n_cols(), -1) {
    states_.reserve(d.n_cols());
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        if (d.kind(c) != ColumnKind::categorical)
            throw InputError("column '" + d.schema()[c].name + "' is continuous; structure scoring needs discrete data");
        const auto labels = d.labels(c);
        std::unordered_map<std::string, int> lookup;
        for (std::size_t k = 0; k < labels.size(); ++k) lookup.emplace(labels[k], static_cast<int>(k));
        for (std::size_t r = 0; r < n_rows_; ++r) {
            const Value& v = d.at(r, c);
            if (v.is_category()) codes_[c * n_rows_ + r] = lookup.at(v.label());
        }
        states_.push_back(labels.size());
    }
}

std::optional<std::optional<double>> FamilyScoreCache::find(const Key& key) const {
    std::shared_lock lock(mutex_);
    auto it = scores_.find(key);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

void FamilyScoreCache::insert(Key key, std::optional<double> score) {
    std::unique_lock lock(mutex_);
    scores_.emplace(std::move(key), score);
}

std::size_t FamilyScoreCache::size() const {
    std::shared_lock lock(mutex_);
    return scores_.size();
}

K2Scorer::K2Scorer(const Dataset& discrete, bool use_cache)
    : data_(discrete), names_(discrete.column_names()), use_cache_(use_cache) {}

std::optional<double> K2Scorer::compute(std::size_t child, std::span<const std::size_t> parents) const {
    const std::size_t r = data_.states(child);
    if (r == 0) return std::nullopt;

    // Mixed-radix key over parent codes.
    std::vector<std::uint64_t> radix(parents.size());
    std::uint64_t span = 1;
    for (std::size_t i = 0; i < parents.size(); ++i) {
        radix[i] = span;
        const auto s = std::max<std::size_t>(data_.states(parents[i]), 1);
        if (span > std::numeric_limits<std::uint64_t>::max() / s)
            throw InputError("parent configuration space of '" + names_[child] + "' is too large");
        span *= s;
    }

    std::map<std::uint64_t, std::vector<std::uint32_t>> counts;
    bool any = false;
    for (std::size_t row = 0; row < data_.n_rows(); ++row) {
        const int k = data_.code(row, child);
        if (k < 0) continue;
        std::uint64_t key = 0;
        bool complete = true;
        for (std::size_t i = 0; i < parents.size(); ++i) {
            const int v = data_.code(row, parents[i]);
            if (v < 0) {
                complete = false;
                break;
            }
            key += radix[i] * static_cast<std::uint64_t>(v);
        }
        if (!complete) continue;
        auto& cell = counts[key];
        if (cell.empty()) cell.assign(r, 0);
        ++cell[static_cast<std::size_t>(k)];
        any = true;
    }
    if (!any) return std::nullopt;

    const double lg_r = std::lgamma(static_cast<double>(r));
    double score = 0.0;
    for (const auto& [key, cell] : counts) {
        std::uint64_t n_j = 0;
        double term = lg_r;
        for (auto n_jk : cell) {
            n_j += n_jk;
            term += std::lgamma(static_cast<double>(n_jk) + 1.0);
        }
        term -= std::lgamma(static_cast<double>(n_j) + static_cast<double>(r));
        score += term;
    }
    return score;
}

std::optional<double> K2Scorer::try_family(std::size_t child, std::span<const std::size_t> parents) const {
    if (!use_cache_) return compute(child, parents);
    FamilyScoreCache::Key key{child, std::vector<std::size_t>(parents.begin(), parents.end())};
    std::sort(key.second.begin(), key.second.end());
    if (auto hit = cache_.find(key)) return *hit;
    auto score = compute(child, key.second);
    cache_.insert(std::move(key), score);
    return score;
}

double K2Scorer::family(std::size_t child, std::span<const std::size_t> parents) const {
    auto s = try_family(child, parents);
    if (!s) throw InputError("no complete-case rows for the family of '" + names_.at(child) + "'");
    return *s;
}

double K2Scorer::total(const Dag& g) const {
    double sum = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto c = std::find(names_.begin(), names_.end(), g.nodes()[v]);
        if (c == names_.end()) throw InputError("graph node '" + g.nodes()[v] + "' is not a data column");
        std::vector<std::size_t> ps;
        for (auto p : g.parent_indices(v)) {
            const auto it = std::find(names_.begin(), names_.end(), g.nodes()[p]);
            if (it == names_.end()) throw InputError("graph node '" + g.nodes()[p] + "' is not a data column");
            ps.push_back(static_cast<std::size_t>(it - names_.begin()));
        }
        sum += family(static_cast<std::size_t>(c - names_.begin()), ps);
    }
    return sum;
}

double k2_family_score(const Dataset& d, const std::string& child, const std::vector<std::string>& parents) {
    std::vector<std::size_t> cols;
    std::set<std::size_t> involved;
    const auto c = d.column_index(child);
    involved.insert(c);
    for (const auto& p : parents) {
        cols.push_back(d.column_index(p));
        involved.insert(cols.back());
    }
    for (auto col : involved)
        if (d.kind(col) != ColumnKind::categorical)
            throw InputError("column '" + d.schema()[col].name + "' is continuous; K2 needs discrete data");
    // Only the family's columns are coded.
    std::vector<std::size_t> order(involved.begin(), involved.end());
    Schema schema;
    for (auto col : order) schema.push_back(d.schema()[col]);
    std::vector<Row> rows;
    rows.reserve(d.n_rows());
    for (const auto& row : d.rows()) {
        Row sub;
        for (auto col : order) sub.push_back(row[col]);
        rows.push_back(std::move(sub));
    }
    const K2Scorer scorer(Dataset(std::move(schema), std::move(rows)), false);
    auto local = [&](std::size_t col) {
        return static_cast<std::size_t>(std::find(order.begin(), order.end(), col) - order.begin());
    };
    std::vector<std::size_t> local_parents;
    for (auto col : cols) local_parents.push_back(local(col));
    return scorer.family(local(c), local_parents);
}

double k2_total_score(const Dataset& d, const Dag& g) {
    const K2Scorer scorer(d, false);
    return scorer.total(g);
}

namespace {

enum class MoveKind { add, remove, reverse };

struct Move {
    MoveKind kind;
    std::size_t parent;
    std::size_t child;
    double gain;
};

}  // namespace

HillClimbResult hill_climb_traced(const Dataset& discrete, const EdgeConstraints& constraints,
                                  const HillClimbOptions& options) {
    const auto names = discrete.column_names();
    validate_constraints(constraints, names);
    for (const auto& e : constraints.required)
        if (options.forbidden && options.forbidden(e.parent, e.child))
            throw InputError("required edge " + e.parent + " -> " + e.child + " is forbidden");

    const K2Scorer scorer(discrete, options.use_cache);
    const auto n = names.size();
    Dag g(names, constraints.required);

    std::set<std::pair<std::size_t, std::size_t>> protected_edges;
    if (!constraints.removable)
        for (const auto& e : constraints.required) protected_edges.emplace(g.index_of(e.parent), g.index_of(e.child));

    std::vector<std::vector<char>> forbidden(n, std::vector<char>(n, 0));
    if (options.forbidden)
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t c = 0; c < n; ++c) forbidden[p][c] = p != c && options.forbidden(names[p], names[c]);

    std::vector<double> family(n);
    for (std::size_t v = 0; v < n; ++v) family[v] = scorer.family(v, g.parent_indices(v));

    auto sum = [&] {
        double s = 0.0;
        for (double f : family) s += f;
        return s;
    };
    HillClimbResult result{g, {sum()}};

    auto with = [](std::vector<std::size_t> ps, std::size_t p) {
        ps.insert(std::lower_bound(ps.begin(), ps.end(), p), p);
        return ps;
    };
    auto without = [](std::vector<std::size_t> ps, std::size_t p) {
        ps.erase(std::find(ps.begin(), ps.end(), p));
        return ps;
    };

    for (;;) {
        std::optional<Move> best;
        auto consider = [&](MoveKind kind, std::size_t p, std::size_t c, double gain) {
            if (gain > kMinScoreGain && (!best || gain > best->gain)) best = Move{kind, p, c, gain};
        };

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t c = 0; c < n; ++c) {
                if (p == c || forbidden[p][c] || g.has_edge(p, c) || g.has_edge(c, p)) continue;
                if (g.parent_indices(c).size() >= options.max_parents) continue;
                if (g.reachable(c, p)) continue;
                const auto s = scorer.try_family(c, with(g.parent_indices(c), p));
                if (s) consider(MoveKind::add, p, c, *s - family[c]);
            }
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t c = 0; c < n; ++c) {
                if (!g.has_edge(p, c) || protected_edges.count({p, c})) continue;
                const auto s = scorer.try_family(c, without(g.parent_indices(c), p));
                if (s) consider(MoveKind::remove, p, c, *s - family[c]);
            }
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t c = 0; c < n; ++c) {
                if (!g.has_edge(p, c) || protected_edges.count({p, c}) || forbidden[c][p]) continue;
                if (g.parent_indices(p).size() >= options.max_parents) continue;
                const Dag trial = g.remove_edge(names[p], names[c]);
                if (trial.reachable(p, c)) continue;
                const auto sc = scorer.try_family(c, without(g.parent_indices(c), p));
                const auto sp = scorer.try_family(p, with(g.parent_indices(p), c));
                if (sc && sp) consider(MoveKind::reverse, p, c, (*sc - family[c]) + (*sp - family[p]));
            }
        }
        if (!best) break;

        switch (best->kind) {
        case MoveKind::add:
            g = g.add_edge(names[best->parent], names[best->child]);
            break;
        case MoveKind::remove:
            g = g.remove_edge(names[best->parent], names[best->child]);
            break;
        case MoveKind::reverse:
            g = g.reverse_edge(names[best->parent], names[best->child]);
            family[best->parent] = scorer.family(best->parent, g.parent_indices(best->parent));
            break;
        }
        family[best->child] = scorer.family(best->child, g.parent_indices(best->child));
        result.score_trace.push_back(sum());
    }
    result.dag = std::move(g);
    return result;
}

Dag hill_climb(const Dataset& discrete, const EdgeConstraints& constraints, std::size_t max_parents,
               const EdgePredicate& forbidden) {
    return hill_climb_traced(discrete, constraints, HillClimbOptions{max_parents, forbidden, true}).dag;
}

EdgePredicate orientation_guard(const Schema& schema) {
    std::map<std::string, ColumnKind> kinds;
    for (const auto& col : schema) kinds.emplace(col.name, col.kind);
    return [kinds = std::move(kinds)](const std::string& parent, const std::string& child) {
        auto p = kinds.find(parent);
        auto c = kinds.find(child);
        if (p == kinds.end() || c == kinds.end()) return false;
        return p->second == ColumnKind::continuous && c->second == ColumnKind::categorical;
    };
}

}  // namespace mixbn
