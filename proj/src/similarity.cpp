#include "mixbn/similarity.hpp"

#include "mixbn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mixbn {

namespace {

// Normalized absolute difference in [0, 1]; zero-range columns give 0.
double normalized_difference(double a, double b, const std::optional<ColumnRange>& range) {
    if (!range || range->range() <= 0.0) return 0.0;
    return std::min(1.0, std::abs(a - b) / range->range());
}

double normalized_value(double x, const std::optional<ColumnRange>& range) {
    if (!range || range->range() <= 0.0) return 0.0;
    return std::clamp((x - range->min) / range->range(), 0.0, 1.0);
}

void check_row(const Row& row, const Schema& schema) {
    if (row.size() != schema.size())
        throw InputError("row has " + std::to_string(row.size()) + " fields, expected " +
                         std::to_string(schema.size()));
}

}  // namespace

std::string_view to_string(Metric metric) {
    switch (metric) {
    case Metric::gower: return "gower";
    case Metric::gower_weighted: return "gower_weighted";
    case Metric::cosine: return "cosine";
    case Metric::filter: return "filter";
    }
    return "gower";
}

Metric parse_metric(std::string_view text) {
    if (text == "gower") return Metric::gower;
    if (text == "gower_weighted" || text == "gower-weighted") return Metric::gower_weighted;
    if (text == "cosine") return Metric::cosine;
    if (text == "filter") return Metric::filter;
    throw InputError("unknown metric '" + std::string(text) + "' (expected gower, gower-weighted, cosine, filter)");
}

DistanceSpec DistanceSpec::gower(const Schema& schema, RangeTable ranges) {
    return DistanceSpec{Metric::gower, schema, std::vector<double>(schema.size(), 1.0), std::nullopt,
                        std::move(ranges)};
}

DistanceSpec DistanceSpec::gower_weighted(const Schema& schema, RangeTable ranges, double continuous_weight) {
    std::vector<double> weights;
    for (const auto& col : schema) weights.push_back(col.kind == ColumnKind::continuous ? continuous_weight : 1.0);
    return DistanceSpec{Metric::gower_weighted, schema, std::move(weights), std::nullopt, std::move(ranges)};
}

DistanceSpec DistanceSpec::cosine(const Schema& schema, RangeTable ranges) {
    return DistanceSpec{Metric::cosine, schema, std::vector<double>(schema.size(), 1.0), std::nullopt,
                        std::move(ranges)};
}

DistanceSpec DistanceSpec::filter(const Schema& schema, RangeTable ranges, double epsilon) {
    return DistanceSpec{Metric::filter, schema, std::vector<double>(schema.size(), 1.0), epsilon, std::move(ranges)};
}

void DistanceSpec::validate() const {
    if (weights.size() != schema.size()) throw InputError("distance weights must have one entry per column");
    if (ranges.size() != schema.size()) throw InputError("distance ranges must have one entry per column");
    if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0) || !std::isfinite(w); }))
        throw InputError("distance weights must be finite and non-negative");
    if (std::none_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; }))
        throw InputError("at least one distance weight must be positive");
    if (epsilon.has_value() != (metric == Metric::filter))
        throw InputError("epsilon must be set exactly when the metric is filter");
    if (epsilon && !(*epsilon > 0.0 && *epsilon <= 1.0)) throw InputError("epsilon must lie in (0, 1]");
}

double gower_distance(const Row& u, const Row& t, const DistanceSpec& spec) {
    check_row(u, spec.schema);
    check_row(t, spec.schema);
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < spec.schema.size(); ++j) {
        if (u[j].is_missing() || t[j].is_missing()) continue;
        const double w = spec.weights.at(j);
        if (w <= 0.0) continue;
        double s = 0.0;
        if (spec.schema[j].kind == ColumnKind::categorical)
            s = u[j].label() == t[j].label() ? 1.0 : 0.0;
        else
            s = 1.0 - normalized_difference(u[j].number(), t[j].number(), spec.ranges.at(j));
        weighted += w * s;
        total += w;
    }
    if (total <= 0.0) throw InputError("rows share no comparable variables");
    return std::clamp(1.0 - weighted / total, 0.0, 1.0);
}

double cosine_distance(const Row& candidate, const Row& target, const Schema& schema, const RangeTable& ranges) {
    check_row(candidate, schema);
    check_row(target, schema);
    double dot = 0.0, norm_c = 0.0, norm_t = 0.0;
    bool comparable = false;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (candidate[j].is_missing() || target[j].is_missing()) continue;
        comparable = true;
        double c = 0.0, t = 0.0;
        if (schema[j].kind == ColumnKind::categorical) {
            t = 1.0;
            c = candidate[j].label() == target[j].label() ? 1.0 : 0.0;
        } else {
            t = normalized_value(target[j].number(), ranges.at(j));
            c = normalized_value(candidate[j].number(), ranges.at(j));
        }
        dot += c * t;
        norm_c += c * c;
        norm_t += t * t;
    }
    if (!comparable) throw InputError("rows share no comparable variables");
    if (norm_t <= 0.0) throw InputError("encoded target vector is zero");
    if (norm_c <= 0.0) return 1.0;
    return std::clamp(1.0 - dot / (std::sqrt(norm_c) * std::sqrt(norm_t)), 0.0, 1.0);
}

std::size_t closeness_count(const Row& target, const Row& row, const Schema& schema, const RangeTable& ranges,
                            double epsilon) {
    std::size_t close = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (target[j].is_missing() || row[j].is_missing()) continue;
        if (schema[j].kind == ColumnKind::categorical) {
            close += target[j].label() == row[j].label();
        } else {
            const auto& r = ranges.at(j);
            const double width = r ? r->range() : 0.0;
            close += std::abs(target[j].number() - row[j].number()) <= epsilon * width;
        }
    }
    return close;
}

std::vector<std::size_t> filter_analogues(const Row& target, const Dataset& pool, double epsilon, std::size_t n) {
    return filter_analogues(target, pool, epsilon, n, normalize_ranges(pool));
}

std::vector<std::size_t> filter_analogues(const Row& target, const Dataset& pool, double epsilon, std::size_t n,
                                          const RangeTable& ranges) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in (0, 1]");
    if (pool.n_rows() == 0) throw InputError("analogue pool is empty");
    if (pool.n_rows() < n)
        throw InputError("analogue pool has " + std::to_string(pool.n_rows()) + " rows, fewer than " +
                         std::to_string(n) + " requested");
    check_row(target, pool.schema());

    const auto p = pool.n_cols();
    std::vector<std::vector<std::size_t>> by_count(p + 1);
    for (std::size_t i = 0; i < pool.n_rows(); ++i)
        by_count[closeness_count(target, pool.row(i), pool.schema(), ranges, epsilon)].push_back(i);

    // Level k admits rows close in at least p - k variables.
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k <= p && out.size() < n; ++k) {
        const auto& level = by_count[p - k];
        out.insert(out.end(), level.begin(), level.end());
    }
    out.resize(std::min(out.size(), n));
    return out;
}

std::vector<std::size_t> nearest_analogues(const AnalogueQuery& query, const Dataset& pool) {
    const auto& spec = query.spec;
    spec.validate();
    if (spec.schema != pool.schema()) throw InputError("distance schema does not match the pool");
    if (query.n_analogues == 0) throw InputError("number of analogues must be positive");
    if (spec.metric == Metric::filter)
        return filter_analogues(query.target, pool, *spec.epsilon, query.n_analogues, spec.ranges);
    if (pool.n_rows() < query.n_analogues)
        throw InputError("analogue pool has " + std::to_string(pool.n_rows()) + " rows, fewer than " +
                         std::to_string(query.n_analogues) + " requested");

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(pool.n_rows());
    for (std::size_t i = 0; i < pool.n_rows(); ++i) {
        const double d = spec.metric == Metric::cosine
                             ? cosine_distance(pool.row(i), query.target, spec.schema, spec.ranges)
                             : gower_distance(pool.row(i), query.target, spec);
        scored.emplace_back(d, i);
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(query.n_analogues), scored.end());
    std::vector<std::size_t> out;
    out.reserve(query.n_analogues);
    for (std::size_t k = 0; k < query.n_analogues; ++k) out.push_back(scored[k].second);
    return out;
}

PenaltyReport penalty_weights(const Dataset& pool, std::size_t max_pairs, std::uint64_t seed) {
    const auto n = pool.n_rows();
    const auto p = pool.n_cols();
    if (n < 2) throw InputError("penalty analysis needs at least 2 rows");
    if (max_pairs == 0) throw InputError("max_pairs must be positive");
    const auto ranges = normalize_ranges(pool);

    std::vector<double> sums(p, 0.0);
    std::vector<std::size_t> counts(p, 0);
    auto accumulate = [&](std::size_t a, std::size_t b) {
        const Row& u = pool.row(a);
        const Row& t = pool.row(b);
        for (std::size_t j = 0; j < p; ++j) {
            if (u[j].is_missing() || t[j].is_missing()) continue;
            if (pool.kind(j) == ColumnKind::categorical)
                sums[j] += u[j].label() == t[j].label() ? 0.0 : 1.0;
            else
                sums[j] += normalized_difference(u[j].number(), t[j].number(), ranges[j]);
            ++counts[j];
        }
    };

    PenaltyReport report;
    const auto total_pairs = n * (n - 1) / 2;
    if (total_pairs <= max_pairs) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) accumulate(a, b);
        report.pairs_used = total_pairs;
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> first(0, n - 1), second(0, n - 2);
        for (std::size_t s = 0; s < max_pairs; ++s) {
            const auto a = first(rng);
            auto b = second(rng);
            if (b >= a) ++b;
            accumulate(a, b);
        }
        report.sampled = true;
        report.pairs_used = max_pairs;
    }

    double cat_sum = 0.0, cont_sum = 0.0;
    std::size_t cat_n = 0, cont_n = 0;
    for (std::size_t j = 0; j < p; ++j) {
        const auto& col = pool.schema()[j];
        if (counts[j] == 0) {
            report.excluded.push_back(col.name);
            continue;
        }
        const double mean = sums[j] / static_cast<double>(counts[j]);
        report.variables.push_back({col.name, col.kind, mean, counts[j]});
        if (col.kind == ColumnKind::categorical) {
            cat_sum += mean;
            ++cat_n;
        } else {
            cont_sum += mean;
            ++cont_n;
        }
    }
    if (cat_n == 0 || cont_n == 0)
        throw InputError("penalty analysis needs comparable categorical and continuous variables");
    const double cat_mean = cat_sum / static_cast<double>(cat_n);
    const double cont_mean = cont_sum / static_cast<double>(cont_n);
    if (cont_mean <= 0.0) throw InputError("degenerate pool: mean continuous penalty is zero (division by zero)");
    if (cat_mean <= 0.0) throw InputError("degenerate pool: mean categorical penalty is zero");
    report.continuous_weight = cat_mean / cont_mean;
    return report;
}

}  // namespace mixbn
