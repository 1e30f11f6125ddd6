#ifndef MIXBN_DATASET_HPP
#define MIXBN_DATASET_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mixbn {

enum class ColumnKind { categorical, continuous };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;

    friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

using Schema = std::vector<ColumnSchema>;

// Throws InputError on duplicate names.
void validate_schema(const Schema& schema);

// {"columns":[{"name":...,"kind":"categorical"|"continuous"},...]}
Schema parse_schema_json(std::string_view text);
Schema load_schema(const std::string& path);
std::string schema_to_json(const Schema& schema);

// A single cell: a category label, a finite number, or missing.
class Value {
public:
    Value() = default;

    static Value missing() { return Value{}; }
    static Value category(std::string label);
    // Throws InputError for NaN or infinities.
    static Value number(double x);

    bool is_missing() const { return std::holds_alternative<std::monostate>(data_); }
    bool is_category() const { return std::holds_alternative<std::string>(data_); }
    bool is_number() const { return std::holds_alternative<double>(data_); }

    const std::string& label() const;
    double number() const;

    friend bool operator==(const Value&, const Value&) = default;

private:
    std::variant<std::monostate, std::string, double> data_;
};

using Row = std::vector<Value>;

// Immutable table of mixed-type values. Every row holds one Value per column
// and categorical/continuous columns only hold labels/numbers respectively.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(Schema schema);
    Dataset(Schema schema, std::vector<Row> rows);

    const Schema& schema() const { return schema_; }
    const std::vector<Row>& rows() const { return rows_; }
    std::size_t n_rows() const { return rows_.size(); }
    std::size_t n_cols() const { return schema_.size(); }

    const Row& row(std::size_t i) const { return rows_.at(i); }
    const Value& at(std::size_t r, std::size_t c) const { return rows_.at(r).at(c); }

    std::optional<std::size_t> find_column(std::string_view name) const;
    // Throws InputError for unknown names.
    std::size_t column_index(std::string_view name) const;
    ColumnKind kind(std::size_t column) const { return schema_.at(column).kind; }
    std::vector<std::string> column_names() const;

    // Sorted distinct labels of a categorical column.
    std::vector<std::string> labels(std::size_t column) const;
    std::size_t non_missing(std::size_t column) const;

private:
    Schema schema_;
    std::vector<Row> rows_;
};

// Checks kind discipline of one row against a schema.
void validate_row(const Schema& schema, const Row& row);

// Empty cells and the literal "NA" are missing.
Dataset parse_csv(std::istream& in, const Schema& schema);
Dataset load_csv(const std::string& path, const Schema& schema);
void write_csv(std::ostream& out, const Dataset& d);

// Per continuous column: the quantile bin edges used to label values.
struct DiscretizationMap {
    std::size_t bins = 0;
    std::map<std::string, std::vector<double>> edges;

    // Index of the bin holding x: the number of edges strictly below x.
    std::size_t bin_of(const std::string& column, double x) const;

    friend bool operator==(const DiscretizationMap&, const DiscretizationMap&) = default;
};

// Replaces continuous columns with categorical bin labels "0".."b-1".
// Edges are the order statistics at ceil(k*n/b), k = 1..b-1, deduplicated.
std::pair<Dataset, DiscretizationMap> quantile_discretize(const Dataset& d, std::size_t bins);

struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
    bool rangeless = true;  // no non-missing values

    double range() const { return rangeless ? 0.0 : max - min; }
};

// One entry per column; categorical columns hold std::nullopt.
using RangeTable = std::vector<std::optional<ColumnRange>>;

RangeTable normalize_ranges(const Dataset& d);

// Rows in the given order; throws InputError on out-of-range indices.
Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices);

}  // namespace mixbn

#endif  // MIXBN_DATASET_HPP
