#include "synthetic.hpp"

#include <array>
#include <random>

namespace mixbn::testing {

namespace {

std::string pick(std::mt19937_64& rng, const std::vector<double>& probs, const std::vector<std::string>& labels) {
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    return labels[dist(rng)];
}

}  // namespace

std::vector<Edge> planted_clg_edges() { return {{"A", "X"}, {"X", "Y"}, {"B", "Y"}, {"B", "Z"}}; }

Dataset planted_clg(std::size_t n, std::uint64_t seed) {
    Schema schema{{"A", ColumnKind::categorical},
                  {"B", ColumnKind::categorical},
                  {"X", ColumnKind::continuous},
                  {"Y", ColumnKind::continuous},
                  {"Z", ColumnKind::continuous}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::vector<std::string> a_labels{"a0", "a1", "a2"};
    const std::vector<std::string> b_labels{"b0", "b1"};
    std::vector<Row> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = pick(rng, {0.3, 0.4, 0.3}, a_labels);
        const auto b = pick(rng, {0.5, 0.5}, b_labels);
        const double mu_x = a == "a0" ? 0.0 : a == "a1" ? 2.0 : 4.0;
        const double x = mu_x + noise(rng);
        const double y = (b == "b0" ? 0.0 : 6.0) + 1.5 * x + noise(rng);
        const double z = (b == "b0" ? -3.0 : 3.0) + noise(rng);
        rows.push_back({Value::category(a), Value::category(b), Value::number(x), Value::number(y),
                        Value::number(z)});
    }
    return Dataset(std::move(schema), std::move(rows));
}

Schema reservoir_schema() {
    return {{"Tectonic regime", ColumnKind::categorical},
            {"Period", ColumnKind::categorical},
            {"Depositional system", ColumnKind::categorical},
            {"Lithology", ColumnKind::categorical},
            {"Structural setting", ColumnKind::categorical},
            {"Trapping mechanism", ColumnKind::categorical},
            {"Gross", ColumnKind::continuous},
            {"Netpay", ColumnKind::continuous},
            {"Porosity", ColumnKind::continuous},
            {"Permeability", ColumnKind::continuous},
            {"Depth", ColumnKind::continuous}};
}

Dataset reservoir_clusters(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cluster_of(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::vector<std::string> labels{"L0", "L1", "L2", "L3"};
    // Cluster means and per-row factor loadings of the continuous columns.
    constexpr std::array<std::array<double, 5>, 3> means{{{300, 60, 12, 200, 2000},
                                                          {500, 90, 18, 500, 2600},
                                                          {700, 120, 24, 800, 3200}}};
    constexpr std::array<double, 5> loading{120, 25, 4, 250, 500};
    constexpr std::array<double, 5> noise{20, 5, 0.8, 40, 80};

    std::vector<Row> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = cluster_of(rng);
        Row row;
        for (std::size_t j = 0; j < 6; ++j) {
            // Dominant label per cluster shifts with the column so that
            // columns are not copies of each other.
            const std::size_t dominant = (static_cast<std::size_t>(c) + j) % 3;
            std::size_t label = dominant;
            if (unit(rng) > 0.8) label = std::uniform_int_distribution<std::size_t>(0, labels.size() - 1)(rng);
            row.push_back(Value::category(labels[label]));
        }
        const double factor = normal(rng);
        for (std::size_t j = 0; j < 5; ++j)
            row.push_back(Value::number(means[c][j] + loading[j] * factor + noise[j] * normal(rng)));
        rows.push_back(std::move(row));
    }
    return Dataset(reservoir_schema(), std::move(rows));
}

Dataset regime_targets(std::size_t n, double noise_sd, std::uint64_t seed) {
    Schema schema{{"G", ColumnKind::categorical},
                  {"T1", ColumnKind::continuous},
                  {"T2", ColumnKind::continuous},
                  {"T3", ColumnKind::continuous}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> group(0, 3);
    std::normal_distribution<double> normal(0.0, noise_sd);
    constexpr std::array<std::array<double, 3>, 4> means{{{0, 30, 10}, {10, 20, 30}, {20, 0, 0}, {30, 10, 20}}};
    std::vector<Row> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int g = group(rng);
        Row row{Value::category("g" + std::to_string(g))};
        for (std::size_t j = 0; j < 3; ++j) row.push_back(Value::number(means[g][j] + normal(rng)));
        rows.push_back(std::move(row));
    }
    return Dataset(std::move(schema), std::move(rows));
}

Dataset random_categorical(std::size_t n, std::size_t columns, std::size_t states, std::uint64_t seed) {
    Schema schema;
    for (std::size_t c = 0; c < columns; ++c) schema.push_back({"V" + std::to_string(c), ColumnKind::categorical});
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> label(0, states - 1);
    std::vector<Row> rows(n);
    for (auto& row : rows)
        for (std::size_t c = 0; c < columns; ++c) row.push_back(Value::category(std::to_string(label(rng))));
    return Dataset(std::move(schema), std::move(rows));
}

Dataset random_mixed(std::size_t n, std::size_t categorical, std::size_t continuous, double missing_rate,
                     std::uint64_t seed) {
    Schema schema;
    for (std::size_t c = 0; c < categorical; ++c) schema.push_back({"C" + std::to_string(c), ColumnKind::categorical});
    for (std::size_t c = 0; c < continuous; ++c) schema.push_back({"N" + std::to_string(c), ColumnKind::continuous});
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> label(0, 2);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution missing(missing_rate);
    std::vector<Row> rows(n);
    for (auto& row : rows) {
        for (std::size_t c = 0; c < categorical; ++c)
            row.push_back(missing(rng) ? Value::missing() : Value::category("l" + std::to_string(label(rng))));
        for (std::size_t c = 0; c < continuous; ++c)
            row.push_back(missing(rng) ? Value::missing() : Value::number(normal(rng)));
    }
    return Dataset(std::move(schema), std::move(rows));
}

}  // namespace mixbn::testing
