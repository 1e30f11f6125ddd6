#include "mixbn/dataset.hpp"

#include "mixbn/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mixbn {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

// Splits one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw InputError("unterminated quoted CSV field");
    fields.push_back(std::move(current));
    return fields;
}

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

bool is_missing_marker(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::string format_number(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw InvariantError("number formatting failed");
    return std::string(buf, end);
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
    return kind == ColumnKind::categorical ? "categorical" : "continuous";
}

ColumnKind parse_column_kind(std::string_view text) {
    if (text == "categorical") return ColumnKind::categorical;
    if (text == "continuous") return ColumnKind::continuous;
    throw InputError("unknown column kind '" + std::string(text) + "'");
}

void validate_schema(const Schema& schema) {
    std::set<std::string_view> seen;
    for (const auto& col : schema) {
        if (!seen.insert(col.name).second) throw InputError("duplicate column name '" + col.name + "'");
    }
}

Schema parse_schema_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("schema is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array())
        throw InputError("schema must be an object with a \"columns\" array");
    Schema schema;
    for (const auto& col : doc["columns"]) {
        if (!col.is_object() || !col.contains("name") || !col.contains("kind") || !col["name"].is_string() ||
            !col["kind"].is_string())
            throw InputError("schema column entries need string \"name\" and \"kind\"");
        schema.push_back({col["name"].get<std::string>(), parse_column_kind(col["kind"].get<std::string>())});
    }
    validate_schema(schema);
    return schema;
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open schema file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_schema_json(ss.str());
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string schema_to_json(const Schema& schema) {
    nlohmann::ordered_json doc;
    doc["columns"] = nlohmann::ordered_json::array();
    for (const auto& col : schema)
        doc["columns"].push_back({{"name", col.name}, {"kind", std::string(to_string(col.kind))}});
    return doc.dump(2);
}

Value Value::category(std::string label) {
    Value v;
    v.data_ = std::move(label);
    return v;
}

Value Value::number(double x) {
    if (!std::isfinite(x)) throw InputError("non-finite numeric value");
    Value v;
    v.data_ = x;
    return v;
}

const std::string& Value::label() const {
    if (!is_category()) throw InvariantError("value is not a category");
    return std::get<std::string>(data_);
}

double Value::number() const {
    if (!is_number()) throw InvariantError("value is not a number");
    return std::get<double>(data_);
}

void validate_row(const Schema& schema, const Row& row) {
    if (row.size() != schema.size())
        throw InputError("row has " + std::to_string(row.size()) + " values, schema has " +
                         std::to_string(schema.size()) + " columns");
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const Value& v = row[c];
        if (v.is_missing()) continue;
        if (schema[c].kind == ColumnKind::categorical && !v.is_category())
            throw InputError("column '" + schema[c].name + "' is categorical but holds a number");
        if (schema[c].kind == ColumnKind::continuous && !v.is_number())
            throw InputError("column '" + schema[c].name + "' is continuous but holds a label");
    }
}

Dataset::Dataset(Schema schema) : schema_(std::move(schema)) { validate_schema(schema_); }

Dataset::Dataset(Schema schema, std::vector<Row> rows) : schema_(std::move(schema)), rows_(std::move(rows)) {
    validate_schema(schema_);
    for (const auto& row : rows_) validate_row(schema_, row);
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].name == name) return c;
    return std::nullopt;
}

std::size_t Dataset::column_index(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw InputError("unknown column '" + std::string(name) + "'");
}

std::vector<std::string> Dataset::column_names() const {
    std::vector<std::string> names;
    names.reserve(schema_.size());
    for (const auto& col : schema_) names.push_back(col.name);
    return names;
}

std::vector<std::string> Dataset::labels(std::size_t column) const {
    std::set<std::string> seen;
    for (const auto& row : rows_)
        if (row[column].is_category()) seen.insert(row[column].label());
    return {seen.begin(), seen.end()};
}

std::size_t Dataset::non_missing(std::size_t column) const {
    return static_cast<std::size_t>(
        std::count_if(rows_.begin(), rows_.end(), [&](const Row& r) { return !r[column].is_missing(); }));
}

Dataset parse_csv(std::istream& in, const Schema& schema) {
    validate_schema(schema);
    std::string line;
    if (!std::getline(in, line)) throw InputError("CSV input is empty (no header row)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);

    std::unordered_map<std::string, std::size_t> schema_pos;
    for (std::size_t c = 0; c < schema.size(); ++c) schema_pos.emplace(schema[c].name, c);

    std::vector<std::size_t> target(header.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name(trim(header[i]));
        if (!seen.insert(name).second) throw InputError("duplicate header name '" + name + "'");
        auto it = schema_pos.find(name);
        if (it == schema_pos.end()) throw InputError("unknown column '" + name + "' in CSV header");
        target[i] = it->second;
    }
    for (const auto& col : schema)
        if (!seen.count(col.name)) throw InputError("CSV header lacks schema column '" + col.name + "'");

    std::vector<Row> rows;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        ++row_no;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw InputError("row " + std::to_string(row_no) + ": expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        Row row(schema.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto& col = schema[target[i]];
            const std::string& cell = fields[i];
            if (is_missing_marker(cell)) continue;
            if (col.kind == ColumnKind::categorical) {
                row[target[i]] = Value::category(cell);
                continue;
            }
            const auto text = trim(cell);
            double x = 0.0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
            if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(x))
                throw InputError("row " + std::to_string(row_no) + ", column " + col.name + ": cannot parse '" +
                                 cell + "' as a finite number");
            row[target[i]] = Value::number(x);
        }
        rows.push_back(std::move(row));
    }
    return Dataset(schema, std::move(rows));
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open data file '" + path + "'");
    try {
        return parse_csv(in, schema);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_csv(std::ostream& out, const Dataset& d) {
    for (std::size_t c = 0; c < d.n_cols(); ++c) out << (c ? "," : "") << quote_csv(d.schema()[c].name);
    out << '\n';
    for (const auto& row : d.rows()) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            const Value& v = row[c];
            if (v.is_category())
                out << quote_csv(v.label());
            else if (v.is_number())
                out << format_number(v.number());
        }
        out << '\n';
    }
}

std::size_t DiscretizationMap::bin_of(const std::string& column, double x) const {
    auto it = edges.find(column);
    if (it == edges.end()) throw InputError("no discretization edges for column '" + column + "'");
    const auto& e = it->second;
    return static_cast<std::size_t>(std::lower_bound(e.begin(), e.end(), x) - e.begin());
}

std::pair<Dataset, DiscretizationMap> quantile_discretize(const Dataset& d, std::size_t bins) {
    if (bins < 2) throw InputError("bin count must be at least 2");
    DiscretizationMap map;
    map.bins = bins;
    Schema schema = d.schema();
    std::vector<Row> rows = d.rows();

    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        if (d.kind(c) != ColumnKind::continuous) continue;
        std::vector<double> sorted;
        for (const auto& row : d.rows())
            if (row[c].is_number()) sorted.push_back(row[c].number());
        const std::size_t n = sorted.size();
        if (n < bins)
            throw InputError("column '" + schema[c].name + "' has " + std::to_string(n) +
                             " non-missing values, fewer than " + std::to_string(bins) + " bins");
        std::sort(sorted.begin(), sorted.end());

        std::vector<double> edges;
        for (std::size_t k = 1; k < bins; ++k) {
            const std::size_t rank = (k * n + bins - 1) / bins;  // ceil(k*n/b), 1-based
            edges.push_back(sorted[rank - 1]);
        }
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

        for (auto& row : rows) {
            if (!row[c].is_number()) continue;
            const double x = row[c].number();
            const auto bin = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
            row[c] = Value::category(std::to_string(bin));
        }
        schema[c].kind = ColumnKind::categorical;
        map.edges.emplace(schema[c].name, std::move(edges));
    }
    return {Dataset(std::move(schema), std::move(rows)), std::move(map)};
}

RangeTable normalize_ranges(const Dataset& d) {
    RangeTable table(d.n_cols());
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        if (d.kind(c) != ColumnKind::continuous) continue;
        ColumnRange r;
        for (const auto& row : d.rows()) {
            if (!row[c].is_number()) continue;
            const double x = row[c].number();
            if (r.rangeless) {
                r.min = r.max = x;
                r.rangeless = false;
            } else {
                r.min = std::min(r.min, x);
                r.max = std::max(r.max, x);
            }
        }
        table[c] = r;
    }
    return table;
}

Dataset select_rows(const Dataset& d, std::span<const std::size_t> indices) {
    std::vector<Row> rows;
    rows.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= d.n_rows())
            throw InputError("row index " + std::to_string(i) + " out of range for " + std::to_string(d.n_rows()) +
                             " rows");
        rows.push_back(d.row(i));
    }
    return Dataset(d.schema(), std::move(rows));
}

}  // namespace mixbn
