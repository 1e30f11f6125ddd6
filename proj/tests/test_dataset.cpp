#include "mixbn/dataset.hpp"
#include "mixbn/error.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

using namespace mixbn;

namespace {

Schema ab_schema() { return {{"A", ColumnKind::categorical}, {"B", ColumnKind::continuous}}; }

Dataset parse(const std::string& text, const Schema& schema) {
    std::istringstream in(text);
    return parse_csv(in, schema);
}

Dataset one_column(const std::vector<double>& xs) {
    std::vector<Row> rows;
    for (double x : xs) rows.push_back({Value::number(x)});
    return Dataset({{"X", ColumnKind::continuous}}, rows);
}

std::vector<std::string> labels_of(const Dataset& d, std::size_t c) {
    std::vector<std::string> out;
    for (const auto& row : d.rows()) out.push_back(row[c].is_missing() ? "" : row[c].label());
    return out;
}

}  // namespace

TEST_CASE("csv: a typed row is parsed") {
    const auto d = parse("A,B\nx,1.5\n", ab_schema());
    REQUIRE(d.n_rows() == 1);
    CHECK(d.at(0, 0) == Value::category("x"));
    CHECK(d.at(0, 1) == Value::number(1.5));
}

TEST_CASE("csv: empty cells and NA are missing") {
    const auto d = parse("A,B\nx,\nNA,2\n\"\",NA\n", ab_schema());
    REQUIRE(d.n_rows() == 3);
    CHECK(d.at(0, 1).is_missing());
    CHECK(d.at(1, 0).is_missing());
    CHECK(d.at(2, 0).is_missing());
    CHECK(d.at(2, 1).is_missing());
}

TEST_CASE("csv: missing markers are case sensitive") {
    const auto d = parse("A,B\nna,1\n", ab_schema());
    CHECK(d.at(0, 0) == Value::category("na"));
    CHECK_THROWS_AS(parse("A,B\nx,na\n", ab_schema()), InputError);
}

TEST_CASE("csv: bad number names row and column") {
    try {
        parse("A,B\nx,abc\n", ab_schema());
        FAIL("expected an error");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 1") != std::string::npos);
        CHECK(msg.find("column B") != std::string::npos);
    }
}

TEST_CASE("csv: header is matched as a set") {
    const auto d = parse("B,A\n2.5,y\n", ab_schema());
    CHECK(d.at(0, 0) == Value::category("y"));
    CHECK(d.at(0, 1) == Value::number(2.5));
    CHECK_THROWS_AS(parse("A,C\nx,1\n", ab_schema()), InputError);
    CHECK_THROWS_AS(parse("A,B,A\nx,1,y\n", ab_schema()), InputError);
    CHECK_THROWS_AS(parse("A\nx\n", ab_schema()), InputError);
    CHECK_THROWS_AS(parse("", ab_schema()), InputError);
}

TEST_CASE("csv: quoted fields and ragged rows") {
    const auto d = parse("A,B\n\"a, \"\"quoted\"\"\",3\n", ab_schema());
    CHECK(d.at(0, 0).label() == "a, \"quoted\"");
    CHECK_THROWS_AS(parse("A,B\nx,1,2\n", ab_schema()), InputError);
    CHECK_THROWS_AS(parse("A,B\n\"x,1\n", ab_schema()), InputError);
}

TEST_CASE("csv: non-finite numbers are rejected") {
    CHECK_THROWS_AS(parse("A,B\nx,inf\n", ab_schema()), InputError);
    CHECK_THROWS_AS(parse("A,B\nx,nan\n", ab_schema()), InputError);
    CHECK_THROWS_AS(Value::number(std::numeric_limits<double>::infinity()), InputError);
}

TEST_CASE("csv: write then parse reproduces the dataset") {
    const auto d = testing::random_mixed(40, 2, 2, 0.2, 3);
    std::ostringstream out;
    write_csv(out, d);
    std::istringstream in(out.str());
    CHECK(parse_csv(in, d.schema()).rows() == d.rows());
}

TEST_CASE("schema: json round trip and errors") {
    const Schema s = ab_schema();
    CHECK(parse_schema_json(schema_to_json(s)) == s);
    CHECK_THROWS_AS(parse_schema_json("{\"columns\":[{\"name\":\"A\",\"kind\":\"text\"}]}"), InputError);
    CHECK_THROWS_AS(parse_schema_json("[1,2]"), InputError);
    CHECK_THROWS_AS(parse_schema_json("{"), InputError);
    CHECK_THROWS_AS(validate_schema({{"A", ColumnKind::categorical}, {"A", ColumnKind::continuous}}), InputError);
}

TEST_CASE("dataset: kind discipline is enforced") {
    CHECK_THROWS_AS(Dataset(ab_schema(), {{Value::number(1), Value::number(2)}}), InputError);
    CHECK_THROWS_AS(Dataset(ab_schema(), {{Value::category("x"), Value::category("y")}}), InputError);
    CHECK_THROWS_AS(Dataset(ab_schema(), {{Value::category("x")}}), InputError);
    CHECK_NOTHROW(Dataset(ab_schema(), {{Value::missing(), Value::missing()}}));
}

TEST_CASE("quantile_discretize: median split") {
    const auto [d, map] = quantile_discretize(one_column({1, 2, 3, 4}), 2);
    CHECK(labels_of(d, 0) == std::vector<std::string>{"0", "0", "1", "1"});
    CHECK(map.edges.at("X") == std::vector<double>{2});
    CHECK(d.kind(0) == ColumnKind::categorical);
}

TEST_CASE("quantile_discretize: degenerate column collapses to one bin") {
    const auto [d, map] = quantile_discretize(one_column({5, 5, 5, 5}), 2);
    CHECK(labels_of(d, 0) == std::vector<std::string>{"0", "0", "0", "0"});
    CHECK(map.edges.at("X").size() == 1);
}

TEST_CASE("quantile_discretize: normal draws fill five bins evenly") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal;
    std::vector<double> xs(1000);
    for (auto& x : xs) x = normal(rng);
    const auto [d, map] = quantile_discretize(one_column(xs), 5);

    // Sorting oracle: the value of rank r (1-based) belongs to bin (r-1)/200.
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<int> counts(5, 0);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& label = d.at(order[r], 0).label();
        CHECK(label == std::to_string(r / 200));
        ++counts[std::stoi(label)];
    }
    for (int c : counts) CHECK(std::abs(c - 200) <= 1);
}

TEST_CASE("quantile_discretize: properties on random columns") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t bins = std::uniform_int_distribution<std::size_t>(2, 7)(rng);
        const auto d = testing::random_mixed(std::uniform_int_distribution<std::size_t>(bins * 3, 120)(rng), 1, 2,
                                             0.15, rng());
        const auto [disc, map] = quantile_discretize(d, bins);
        CHECK(map.bins == bins);
        for (std::size_t c = 1; c < 3; ++c) {
            const auto& edges = map.edges.at(d.schema()[c].name);
            CHECK(std::adjacent_find(edges.begin(), edges.end(), std::greater_equal<>()) == edges.end());
            CHECK(disc.non_missing(c) == d.non_missing(c));
            for (std::size_t r = 0; r < d.n_rows(); ++r) {
                CHECK(d.at(r, c).is_missing() == disc.at(r, c).is_missing());
                if (d.at(r, c).is_missing()) continue;
                const auto bin = std::stoul(disc.at(r, c).label());
                CHECK(bin < bins);
                CHECK(bin == map.bin_of(d.schema()[c].name, d.at(r, c).number()));
                // Monotone in the raw value.
                for (std::size_t s = 0; s < d.n_rows(); ++s)
                    if (!d.at(s, c).is_missing() && d.at(s, c).number() >= d.at(r, c).number())
                        CHECK(std::stoul(disc.at(s, c).label()) >= bin);
            }
        }
        CHECK(disc.rows()[0][0] == d.rows()[0][0]);  // categorical column unchanged
    }
}

TEST_CASE("quantile_discretize: balance with distinct values and b | n") {
    std::mt19937_64 rng(11);
    for (std::size_t bins : {2, 3, 4, 5, 8}) {
        std::vector<double> xs(bins * 13);
        std::iota(xs.begin(), xs.end(), 0.0);
        std::shuffle(xs.begin(), xs.end(), rng);
        const auto [d, map] = quantile_discretize(one_column(xs), bins);
        std::vector<std::size_t> counts(bins, 0);
        for (const auto& row : d.rows()) ++counts[std::stoul(row[0].label())];
        for (auto c : counts) CHECK(c == 13);
    }
}

TEST_CASE("quantile_discretize: errors") {
    CHECK_THROWS_AS(quantile_discretize(one_column({1, 2, 3}), 1), InputError);
    CHECK_THROWS_AS(quantile_discretize(one_column({1, 2}), 3), InputError);
    const Dataset with_missing({{"X", ColumnKind::continuous}},
                               {{Value::number(1)}, {Value::missing()}, {Value::number(2)}});
    CHECK_THROWS_AS(quantile_discretize(with_missing, 3), InputError);
}

TEST_CASE("normalize_ranges") {
    const auto r = normalize_ranges(one_column({2, 4, 10}));
    REQUIRE(r[0].has_value());
    CHECK(r[0]->min == 2);
    CHECK(r[0]->max == 10);
    CHECK(r[0]->range() == 8);

    const Dataset all_missing({{"X", ColumnKind::continuous}}, {{Value::missing()}, {Value::missing()}});
    CHECK(normalize_ranges(all_missing)[0]->rangeless);
    CHECK(normalize_ranges(all_missing)[0]->range() == 0);

    const auto flat = normalize_ranges(one_column({3, 3}));
    CHECK_FALSE(flat[0]->rangeless);
    CHECK(flat[0]->range() == 0);

    const Dataset cat({{"A", ColumnKind::categorical}}, {{Value::category("x")}});
    CHECK_FALSE(normalize_ranges(cat)[0].has_value());
}

TEST_CASE("select_rows") {
    const auto d = one_column({10, 11, 12});
    const std::vector<std::size_t> idx{2, 0};
    const auto s = select_rows(d, idx);
    REQUIRE(s.n_rows() == 2);
    CHECK(s.at(0, 0).number() == 12);
    CHECK(s.at(1, 0).number() == 10);

    const auto empty = select_rows(d, std::vector<std::size_t>{});
    CHECK(empty.n_rows() == 0);
    CHECK(empty.schema() == d.schema());

    CHECK_THROWS_AS(select_rows(d, std::vector<std::size_t>{5}), InputError);
}

TEST_CASE("dataset: lookups") {
    const auto d = parse("A,B\nz,1\nx,2\nz,\n", ab_schema());
    CHECK(d.column_index("B") == 1);
    CHECK_FALSE(d.find_column("C").has_value());
    CHECK_THROWS_AS(d.column_index("C"), InputError);
    CHECK(d.labels(0) == std::vector<std::string>{"x", "z"});
    CHECK(d.non_missing(1) == 2);
}
