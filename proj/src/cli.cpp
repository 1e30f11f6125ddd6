#include "mixbn/cli.hpp"

#include "mixbn/dataset.hpp"
#include "mixbn/error.hpp"
#include "mixbn/evaluation.hpp"
#include "mixbn/inference.hpp"
#include "mixbn/model_io.hpp"
#include "mixbn/parameters.hpp"
#include "mixbn/similarity.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace mixbn {

namespace {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
    if (!out) throw InputError("failed writing '" + path + "'");
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw InvariantError("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(what + " is not valid JSON: " + e.what());
    }
}

// Per-run reproducibility record written next to the primary output.
class Manifest {
public:
    explicit Manifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
        config_ = Json::object();
        inputs_ = Json::object();
    }

    template <class T>
    void set(const std::string& key, const T& value) {
        config_[key] = value;
    }
    void seed(std::uint64_t s) { seed_ = s; }
    void input(const std::string& path) { inputs_[path] = sha256_hex(read_file(path)); }

    void write(const std::string& out_path) const {
        Json doc;
        doc["command"] = command_;
        doc["config"] = config_;
        doc["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
        doc["inputs"] = inputs_;
        doc["tool_version"] = kToolVersion;
        doc["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_file(out_path + ".manifest.json", doc.dump(2) + "\n");
    }

private:
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    Json config_;
    Json inputs_;
    std::optional<std::uint64_t> seed_;
};

std::vector<Edge> parse_expert_edges(const std::string& path) {
    const Json doc = parse_json(read_file(path), "expert-edges file '" + path + "'");
    if (!doc.is_array()) throw InputError(path + ": expert edges must be a JSON list of [parent, child]");
    std::vector<Edge> edges;
    for (const auto& e : doc) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            throw InputError(path + ": every expert edge must be a [parent, child] pair of names");
        edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    return edges;
}

// Record JSON: object with one key per schema column; null marks missing.
Row record_from_json(const Json& doc, const Schema& schema) {
    if (!doc.is_object()) throw InputError("record must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (std::none_of(schema.begin(), schema.end(), [&](const ColumnSchema& c) { return c.name == key; }))
            throw InputError("record field '" + key + "' is not in the schema");
    }
    Row row(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& col = schema[c];
        if (!doc.contains(col.name)) throw InputError("record lacks field '" + col.name + "' (use null for missing)");
        const auto& v = doc.at(col.name);
        if (v.is_null()) continue;
        if (col.kind == ColumnKind::categorical) {
            if (!v.is_string()) throw InputError("record field '" + col.name + "' must be a string label or null");
            row[c] = Value::category(v.get<std::string>());
        } else {
            if (!v.is_number()) throw InputError("record field '" + col.name + "' must be a number or null");
            row[c] = Value::number(v.get<double>());
        }
    }
    return row;
}

Json value_to_json(const Value& v) {
    if (v.is_category()) return v.label();
    if (v.is_number()) return v.number();
    return nullptr;
}

Json score_to_json(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
    return out;
}

struct DataOptions {
    std::string data;
    std::string schema;
};

struct LearnOptions {
    std::size_t bins = 5;
    std::size_t max_parents = 4;
    double alpha = 1.0;
};

struct MetricOptions {
    std::string metric;
    std::size_t n_analogues = kDefaultAnalogues;
    double epsilon = kDefaultEpsilon;
    std::optional<double> weight;
};

DistanceSpec make_spec(Metric metric, const Dataset& pool, const MetricOptions& opts, std::uint64_t seed,
                       std::optional<double>& weight_used) {
    auto ranges = normalize_ranges(pool);
    switch (metric) {
    case Metric::gower: return DistanceSpec::gower(pool.schema(), std::move(ranges));
    case Metric::cosine: return DistanceSpec::cosine(pool.schema(), std::move(ranges));
    case Metric::filter: return DistanceSpec::filter(pool.schema(), std::move(ranges), opts.epsilon);
    case Metric::gower_weighted:
        weight_used = opts.weight ? *opts.weight : penalty_weights(pool, kDefaultMaxPairs, seed).continuous_weight;
        return DistanceSpec::gower_weighted(pool.schema(), std::move(ranges), *weight_used);
    }
    throw InvariantError("unhandled metric");
}

void record_metric(Manifest& m, const MetricOptions& opts) {
    m.set("metric", opts.metric);
    m.set("n_analogues", opts.n_analogues);
    m.set("epsilon", opts.epsilon);
    if (opts.weight) m.set("weight", *opts.weight);
}

void add_learn_flags(CLI::App* cmd, LearnOptions& o) {
    cmd->add_option("--bins", o.bins, "Quantile bins for structure learning")->capture_default_str()->check(
        CLI::Range(2, 1000));
    cmd->add_option("--max-parents", o.max_parents, "Parent limit per node")->capture_default_str()->check(
        CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "CPT smoothing")->capture_default_str()->check(CLI::NonNegativeNumber);
}

void add_metric_flags(CLI::App* cmd, MetricOptions& o, const char* help) {
    cmd->add_option("--metric", o.metric, help);
    cmd->add_option("--n-analogues", o.n_analogues, "Number of nearest analogues")->capture_default_str()->check(
        CLI::PositiveNumber);
    cmd->add_option("--epsilon", o.epsilon, "Filter closeness tolerance")->capture_default_str()->check(
        CLI::Range(1e-12, 1.0));
    cmd->add_option("--weight", o.weight, "Continuous weight for gower-weighted")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mixed Bayesian-network learning, restoration, analogue search and anomaly scoring", "mixbn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    DataOptions data;
    LearnOptions learn;
    MetricOptions metric;
    std::string out_path, model_path, record_path, edges_path, table_path, regimes_text, anomaly_train = "clean";
    bool allow_remove = false, no_anomalies = false;
    std::size_t samples = kDefaultSamples, threads = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> row_sample;
    double anomaly_fraction = 0.10;
    std::vector<std::string> targets;

    auto* learn_cmd = app.add_subcommand("learn", "Learn structure and parameters from a CSV dataset");
    learn_cmd->add_option("--data", data.data, "CSV dataset")->required()->check(CLI::ExistingFile);
    learn_cmd->add_option("--schema", data.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
    add_learn_flags(learn_cmd, learn);
    learn_cmd->add_option("--expert-edges", edges_path, "JSON list of [parent, child] edges")->check(CLI::ExistingFile);
    learn_cmd->add_flag("--allow-remove-expert-edges", allow_remove, "Expert edges are a warm start only");
    learn_cmd->add_option("--out", out_path, "Model JSON output")->required();

    auto* restore_cmd = app.add_subcommand("restore", "Fill the missing fields of a record");
    restore_cmd->add_option("--model", model_path, "Model JSON")->check(CLI::ExistingFile);
    restore_cmd->add_option("--data", data.data, "CSV dataset to train on")->check(CLI::ExistingFile);
    restore_cmd->add_option("--schema", data.schema, "Schema JSON")->check(CLI::ExistingFile);
    restore_cmd->add_option("--record", record_path, "Record JSON with nulls for missing fields")
        ->required()
        ->check(CLI::ExistingFile);
    add_metric_flags(restore_cmd, metric, "Train on analogues under gower | gower-weighted | cosine | filter");
    add_learn_flags(restore_cmd, learn);
    restore_cmd->add_option("--samples", samples, "Forward samples")->capture_default_str()->check(CLI::PositiveNumber);
    restore_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    restore_cmd->add_option("--out", out_path, "Completed record JSON")->required();

    auto* analogues_cmd = app.add_subcommand("analogues", "Rank dataset rows by similarity to a record");
    analogues_cmd->add_option("--data", data.data, "CSV pool")->required()->check(CLI::ExistingFile);
    analogues_cmd->add_option("--schema", data.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
    analogues_cmd->add_option("--record", record_path, "Target record JSON")->required()->check(CLI::ExistingFile);
    add_metric_flags(analogues_cmd, metric, "gower (default) | gower-weighted | cosine | filter");
    analogues_cmd->add_option("--seed", seed, "Seed for sampled penalty analysis")->capture_default_str();
    analogues_cmd->add_option("--out", out_path, "Ranked analogues JSON")->required();

    auto* anomalies_cmd = app.add_subcommand("anomalies", "Score continuous values against the network");
    anomalies_cmd->add_option("--model", model_path, "Model JSON (trained on --data if absent)")
        ->check(CLI::ExistingFile);
    anomalies_cmd->add_option("--data", data.data, "CSV rows to score")->required()->check(CLI::ExistingFile);
    anomalies_cmd->add_option("--schema", data.schema, "Schema JSON (defaults to the model's)")
        ->check(CLI::ExistingFile);
    anomalies_cmd->add_option("--target", targets, "Continuous column(s) to score; default all");
    add_learn_flags(anomalies_cmd, learn);
    anomalies_cmd->add_option("--samples", samples, "Forward samples")->capture_default_str()->check(
        CLI::PositiveNumber);
    anomalies_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    anomalies_cmd->add_option("--out", out_path, "Scores JSON")->required();

    auto* eval_cmd = app.add_subcommand("eval", "Leave-one-out restoration and anomaly benchmark");
    eval_cmd->add_option("--data", data.data, "CSV dataset")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--schema", data.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--regimes", regimes_text, "Comma list of all-dataset,cosine,gower,filter,gower-weighted");
    add_learn_flags(eval_cmd, learn);
    eval_cmd->add_option("--n-analogues", metric.n_analogues, "Analogues per target")->capture_default_str()->check(
        CLI::PositiveNumber);
    eval_cmd->add_option("--epsilon", metric.epsilon, "Filter closeness tolerance")->capture_default_str();
    eval_cmd->add_option("--weight", metric.weight, "Continuous weight for gower-weighted")->check(
        CLI::PositiveNumber);
    eval_cmd->add_option("--samples", samples, "Forward samples")->capture_default_str()->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    eval_cmd->add_option("--anomaly-fraction", anomaly_fraction, "Share of values to perturb")->capture_default_str();
    eval_cmd->add_option("--anomaly-train", anomaly_train, "clean | perturbed")
        ->capture_default_str()
        ->check(CLI::IsMember({"clean", "perturbed"}));
    eval_cmd->add_flag("--no-anomalies", no_anomalies, "Skip the anomaly benchmark");
    eval_cmd->add_option("--row-sample", row_sample, "Evaluate a seeded sample of target rows")->check(
        CLI::PositiveNumber);
    eval_cmd->add_option("--threads", threads, "Worker threads (0: MIXBN_THREADS or all cores)");
    eval_cmd->add_option("--out", out_path, "Report JSON")->required();
    eval_cmd->add_option("--table", table_path, "Text table output (default <out>.txt)");

    auto* dot_cmd = app.add_subcommand("export-dot", "Write the model graph as Graphviz DOT");
    dot_cmd->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    dot_cmd->add_option("--out", out_path, "DOT output")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*learn_cmd) {
            Manifest manifest("learn");
            const Schema schema = load_schema(data.schema);
            const Dataset d = load_csv(data.data, schema);
            EdgeConstraints constraints;
            if (!edges_path.empty()) {
                constraints.required = parse_expert_edges(edges_path);
                manifest.input(edges_path);
            }
            constraints.removable = allow_remove;
            validate_constraints(constraints, d.column_names());
            const auto model = mixlearn(d, constraints, MixLearnOptions{learn.bins, learn.max_parents, learn.alpha});
            write_file(out_path, model_to_json(model));
            manifest.input(data.data);
            manifest.input(data.schema);
            manifest.set("bins", learn.bins);
            manifest.set("max_parents", learn.max_parents);
            manifest.set("alpha", learn.alpha);
            manifest.set("allow_remove_expert_edges", allow_remove);
            manifest.set("out", out_path);
            manifest.write(out_path);
            out << "learned " << model.dag().edge_count() << " edges over " << model.nodes().size() << " nodes -> "
                << out_path << '\n';
        } else if (*restore_cmd) {
            Manifest manifest("restore");
            manifest.seed(seed);
            if (!model_path.empty() && !data.data.empty())
                throw InputError("give either --model or --data/--schema, not both");
            if (model_path.empty() && (data.data.empty() || data.schema.empty()))
                throw InputError("restore needs --model or both --data and --schema");
            if (!model_path.empty() && !metric.metric.empty())
                throw InputError("--metric selects analogues from --data; it cannot be combined with --model");

            const Json record_doc = parse_json(read_file(record_path), "record '" + record_path + "'");
            std::optional<BayesianNetworkModel> model;
            Schema schema;
            std::optional<double> weight_used;
            if (!model_path.empty()) {
                model = load_model(model_path);
                schema = model->schema();
                manifest.input(model_path);
            } else {
                schema = load_schema(data.schema);
                const Dataset d = load_csv(data.data, schema);
                const Row target = record_from_json(record_doc, schema);
                Dataset train = d;
                if (!metric.metric.empty()) {
                    const Metric m = parse_metric(metric.metric);
                    const AnalogueQuery query{target, metric.n_analogues, make_spec(m, d, metric, seed, weight_used)};
                    const auto rows = nearest_analogues(query, d);
                    train = select_rows(d, rows);
                    record_metric(manifest, metric);
                    if (weight_used) manifest.set("weight_used", *weight_used);
                }
                model = mixlearn(train, EdgeConstraints{}, MixLearnOptions{learn.bins, learn.max_parents, learn.alpha});
                manifest.input(data.data);
                manifest.input(data.schema);
                manifest.set("bins", learn.bins);
                manifest.set("max_parents", learn.max_parents);
                manifest.set("alpha", learn.alpha);
            }
            const Row record = record_from_json(record_doc, schema);
            const Row restored = restore(*model, record, samples, seed);

            Json result = record_doc;
            for (std::size_t c = 0; c < schema.size(); ++c)
                if (record[c].is_missing()) result[schema[c].name] = value_to_json(restored[c]);
            write_file(out_path, result.dump(2) + "\n");
            manifest.input(record_path);
            manifest.set("samples", samples);
            manifest.set("out", out_path);
            manifest.write(out_path);
        } else if (*analogues_cmd) {
            Manifest manifest("analogues");
            manifest.seed(seed);
            const Schema schema = load_schema(data.schema);
            const Dataset d = load_csv(data.data, schema);
            const Row target = record_from_json(parse_json(read_file(record_path), "record"), schema);
            if (metric.metric.empty()) metric.metric = "gower";
            const Metric m = parse_metric(metric.metric);
            std::optional<double> weight_used;
            const AnalogueQuery query{target, metric.n_analogues, make_spec(m, d, metric, seed, weight_used)};
            const auto ranked = nearest_analogues(query, d);

            Json doc;
            doc["metric"] = std::string(to_string(m));
            doc["n_analogues"] = metric.n_analogues;
            if (weight_used) doc["continuous_weight"] = *weight_used;
            doc["analogues"] = Json::array();
            for (auto i : ranked) {
                Json entry{{"index", i}};
                if (m == Metric::filter)
                    entry["close_variables"] = closeness_count(target, d.row(i), schema, query.spec.ranges, metric.epsilon);
                else if (m == Metric::cosine)
                    entry["distance"] = cosine_distance(d.row(i), target, schema, query.spec.ranges);
                else
                    entry["distance"] = gower_distance(d.row(i), target, query.spec);
                doc["analogues"].push_back(entry);
            }
            write_file(out_path, doc.dump(2) + "\n");
            manifest.input(data.data);
            manifest.input(data.schema);
            manifest.input(record_path);
            record_metric(manifest, metric);
            if (weight_used) manifest.set("weight_used", *weight_used);
            manifest.set("out", out_path);
            manifest.write(out_path);
        } else if (*anomalies_cmd) {
            Manifest manifest("anomalies");
            manifest.seed(seed);
            std::optional<BayesianNetworkModel> model;
            Schema schema;
            if (!model_path.empty()) {
                model = load_model(model_path);
                schema = model->schema();
                if (!data.schema.empty() && load_schema(data.schema) != schema)
                    throw InputError("--schema does not match the model's nodes");
                manifest.input(model_path);
            } else {
                if (data.schema.empty()) throw InputError("anomalies needs --schema when no --model is given");
                schema = load_schema(data.schema);
            }
            if (!data.schema.empty()) manifest.input(data.schema);
            const Dataset d = load_csv(data.data, schema);
            if (!model) {
                model = mixlearn(d, EdgeConstraints{}, MixLearnOptions{learn.bins, learn.max_parents, learn.alpha});
                manifest.set("bins", learn.bins);
                manifest.set("max_parents", learn.max_parents);
            }
            if (targets.empty())
                for (const auto& col : schema)
                    if (col.kind == ColumnKind::continuous) targets.push_back(col.name);

            Json doc;
            doc["threshold"] = kAnomalyThreshold;
            doc["targets"] = Json::object();
            for (const auto& target : targets) {
                const auto c = d.column_index(target);
                Json rows = Json::array();
                for (std::size_t r = 0; r < d.n_rows(); ++r) {
                    if (d.at(r, c).is_missing()) continue;
                    Row record = d.row(r);
                    Evidence ev = evidence_from_row(*model, record);
                    for (const auto& name : drop_unknown_labels(*model, ev))
                        record[model->dag().index_of(name)] = Value::missing();
                    const auto s = anomaly_score(*model, record, target, samples, derive_seed(seed, c, r));
                    rows.push_back(Json{{"row", r},
                                        {"value", d.at(r, c).number()},
                                        {"score", score_to_json(s.score)},
                                        {"sample_mean", s.sample_mean},
                                        {"sample_std", s.sample_std},
                                        {"is_anomaly", s.is_anomaly}});
                }
                doc["targets"][target] = rows;
            }
            write_file(out_path, doc.dump(2) + "\n");
            manifest.input(data.data);
            manifest.set("targets", join(targets));
            manifest.set("samples", samples);
            manifest.set("out", out_path);
            manifest.write(out_path);
        } else if (*eval_cmd) {
            Manifest manifest("eval");
            manifest.seed(seed);
            const Schema schema = load_schema(data.schema);
            const Dataset d = load_csv(data.data, schema);
            EvalConfig cfg;
            if (!regimes_text.empty()) {
                cfg.regimes.clear();
                std::stringstream ss(regimes_text);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) cfg.regimes.push_back(parse_regime(item));
            }
            cfg.n_analogues = metric.n_analogues;
            cfg.bins = learn.bins;
            cfg.max_parents = learn.max_parents;
            cfg.m_samples = samples;
            cfg.seed = seed;
            cfg.anomaly_fraction = anomaly_fraction;
            cfg.epsilon = metric.epsilon;
            cfg.continuous_weight = metric.weight;
            cfg.row_sample = row_sample;
            cfg.anomaly_train_on_perturbed = anomaly_train == "perturbed";
            cfg.threads = threads;

            EvalReport report = no_anomalies ? leave_one_out(d, cfg) : evaluate(d, cfg);
            const std::string table = report_to_table(report);
            if (table_path.empty()) table_path = out_path + ".txt";
            write_file(out_path, report_to_json(report));
            write_file(table_path, table);
            out << table;

            manifest.input(data.data);
            manifest.input(data.schema);
            std::vector<std::string> regime_names;
            for (auto r : cfg.regimes) regime_names.emplace_back(to_string(r));
            manifest.set("regimes", join(regime_names));
            manifest.set("n_analogues", cfg.n_analogues);
            manifest.set("bins", cfg.bins);
            manifest.set("max_parents", cfg.max_parents);
            manifest.set("samples", cfg.m_samples);
            manifest.set("anomaly_fraction", cfg.anomaly_fraction);
            manifest.set("anomaly_train", anomaly_train);
            manifest.set("epsilon", cfg.epsilon);
            if (report.continuous_weight) manifest.set("continuous_weight", *report.continuous_weight);
            if (row_sample) manifest.set("row_sample", *row_sample);
            manifest.set("out", out_path);
            manifest.set("table", table_path);
            manifest.write(out_path);
        } else if (*dot_cmd) {
            Manifest manifest("export-dot");
            const auto model = load_model(model_path);
            write_file(out_path, model_to_dot(model));
            manifest.input(model_path);
            manifest.set("out", out_path);
            manifest.write(out_path);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace mixbn
