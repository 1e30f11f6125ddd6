#include "mixbn/evaluation.hpp"

#include "mixbn/error.hpp"
#include "mixbn/inference.hpp"
#include "mixbn/parameters.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace mixbn {

namespace {

// Runs body(i) for i in [0, n) on up to `workers` threads.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

// Replaces categorical cells whose label the model never saw with missing.
std::size_t sanitize_record(const BayesianNetworkModel& model, Row& record) {
    std::size_t dropped = 0;
    for (std::size_t v = 0; v < record.size(); ++v) {
        if (!record[v].is_category()) continue;
        const auto& cpt = std::get<Cpt>(model.node(v).distribution);
        if (cpt.state_index(record[v].label()) == cpt.states.size()) {
            record[v] = Value::missing();
            ++dropped;
        }
    }
    return dropped;
}

std::vector<std::size_t> target_rows(const Dataset& d, const EvalConfig& config) {
    std::vector<std::size_t> rows(d.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    if (config.row_sample && *config.row_sample < rows.size()) {
        std::mt19937_64 rng(derive_seed(config.seed, 0x5a11ce));
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(*config.row_sample);
        std::sort(rows.begin(), rows.end());
    }
    return rows;
}

struct RowOutcome {
    // Per regime, per column: (restored, squared error or hit).
    std::map<Regime, std::vector<std::optional<double>>> results;
    std::size_t training_failures = 0;
    std::size_t restore_failures = 0;
    std::size_t evidence_dropped = 0;
    bool no_evidence = false;
};

}  // namespace

std::string_view to_string(Regime regime) {
    switch (regime) {
    case Regime::all_dataset: return "all_dataset";
    case Regime::cosine: return "cosine";
    case Regime::gower: return "gower";
    case Regime::filter: return "filter";
    case Regime::gower_weighted: return "gower_weighted";
    }
    return "all_dataset";
}

Regime parse_regime(std::string_view text) {
    if (text == "all_dataset" || text == "all-dataset" || text == "all") return Regime::all_dataset;
    if (text == "cosine") return Regime::cosine;
    if (text == "gower") return Regime::gower;
    if (text == "filter") return Regime::filter;
    if (text == "gower_weighted" || text == "gower-weighted") return Regime::gower_weighted;
    throw InputError("unknown regime '" + std::string(text) + "'");
}

std::vector<Regime> all_regimes() {
    return {Regime::all_dataset, Regime::cosine, Regime::gower, Regime::filter, Regime::gower_weighted};
}

void EvalConfig::validate() const {
    if (regimes.empty()) throw InputError("at least one regime is required");
    if (!(anomaly_fraction > 0.0 && anomaly_fraction < 1.0)) throw InputError("anomaly fraction must lie in (0, 1)");
    if (n_analogues == 0) throw InputError("number of analogues must be positive");
    if (m_samples == 0) throw InputError("sample count must be positive");
    if (bins < 2) throw InputError("bin count must be at least 2");
    if (max_parents == 0) throw InputError("max parents must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in (0, 1]");
    if (continuous_weight && !(*continuous_weight > 0.0)) throw InputError("continuous weight must be positive");
    if (row_sample && *row_sample == 0) throw InputError("row sample must be positive");
}

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = midrank;
        i = j + 1;
    }
    double positive_ranks = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i]) {
            positive_ranks += rank[i];
            ++positives;
        }
    }
    const auto negatives = n - positives;
    if (positives == 0 || negatives == 0) throw InputError("ROC-AUC needs both positive and negative labels");
    const double p = static_cast<double>(positives);
    const double u = positive_ranks - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ b);
}

std::size_t worker_count(std::size_t requested) {
    std::size_t limit = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MIXBN_THREADS")) {
        char* end = nullptr;
        const auto v = std::strtoul(env, &end, 10);
        if (end != env && v > 0) limit = std::min<std::size_t>(limit, v);
    }
    return requested > 0 ? std::min(requested, limit) : limit;
}

EvalReport leave_one_out(const Dataset& d, const EvalConfig& config) {
    config.validate();
    const bool uses_metric = std::any_of(config.regimes.begin(), config.regimes.end(),
                                         [](Regime r) { return r != Regime::all_dataset; });
    if (uses_metric && d.n_rows() < config.n_analogues + 1)
        throw InputError("dataset has " + std::to_string(d.n_rows()) + " rows; analogue regimes need at least " +
                         std::to_string(config.n_analogues + 1));
    if (d.n_rows() < 2) throw InputError("leave-one-out needs at least 2 rows");

    EvalReport report;
    report.config = config;
    report.rows_total = d.n_rows();
    if (std::find(config.regimes.begin(), config.regimes.end(), Regime::gower_weighted) != config.regimes.end())
        report.continuous_weight = config.continuous_weight
                                       ? *config.continuous_weight
                                       : penalty_weights(d, config.max_pairs, config.seed).continuous_weight;

    const auto targets = target_rows(d, config);
    const auto p = d.n_cols();
    const MixLearnOptions options{config.bins, config.max_parents, 1.0};
    std::vector<RowOutcome> outcomes(targets.size());

    parallel_for(targets.size(), worker_count(config.threads), [&](std::size_t t) {
        const auto r = targets[t];
        RowOutcome& out = outcomes[t];
        const Row& truth = d.row(r);
        if (std::all_of(truth.begin(), truth.end(), [](const Value& v) { return v.is_missing(); })) {
            out.no_evidence = true;
            return;
        }

        std::vector<std::size_t> pool_rows;
        pool_rows.reserve(d.n_rows() - 1);
        for (std::size_t i = 0; i < d.n_rows(); ++i)
            if (i != r) pool_rows.push_back(i);
        const Dataset pool = select_rows(d, pool_rows);
        const RangeTable ranges = normalize_ranges(pool);

        for (std::size_t g = 0; g < config.regimes.size(); ++g) {
            const Regime regime = config.regimes[g];
            auto& cells = out.results[regime];
            cells.assign(p, std::nullopt);

            std::vector<std::size_t> train_rows;
            std::optional<BayesianNetworkModel> model;
            try {
                if (regime == Regime::all_dataset) {
                    train_rows = pool_rows;
                } else {
                    DistanceSpec spec;
                    switch (regime) {
                    case Regime::cosine: spec = DistanceSpec::cosine(d.schema(), ranges); break;
                    case Regime::gower: spec = DistanceSpec::gower(d.schema(), ranges); break;
                    case Regime::filter: spec = DistanceSpec::filter(d.schema(), ranges, config.epsilon); break;
                    default:
                        spec = DistanceSpec::gower_weighted(d.schema(), ranges, *report.continuous_weight);
                        break;
                    }
                    const AnalogueQuery query{truth, config.n_analogues, spec};
                    for (auto local : nearest_analogues(query, pool)) train_rows.push_back(pool_rows[local]);
                }
                if (config.on_training_set) config.on_training_set(r, regime, train_rows);
                model = mixlearn(select_rows(d, train_rows), EdgeConstraints{}, options);
            } catch (const InputError&) {
                ++out.training_failures;
                continue;
            }

            for (std::size_t c = 0; c < p; ++c) {
                if (truth[c].is_missing()) continue;
                Row record = truth;
                record[c] = Value::missing();
                out.evidence_dropped += sanitize_record(*model, record);
                if (std::all_of(record.begin(), record.end(), [](const Value& v) { return v.is_missing(); })) {
                    out.no_evidence = true;
                    continue;
                }
                try {
                    const Row restored = restore(*model, record, config.m_samples, derive_seed(config.seed, r, g * p + c));
                    if (d.kind(c) == ColumnKind::categorical) {
                        cells[c] = restored[c].label() == truth[c].label() ? 1.0 : 0.0;
                    } else {
                        const double e = restored[c].number() - truth[c].number();
                        cells[c] = e * e;
                    }
                } catch (const InputError&) {
                    ++out.restore_failures;
                }
            }
        }
    });

    for (std::size_t c = 0; c < p; ++c) {
        ParameterResult pr{d.schema()[c].name, d.kind(c), {}};
        for (auto regime : config.regimes) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& out : outcomes) {
                auto it = out.results.find(regime);
                if (it == out.results.end() || !it->second[c]) continue;
                sum += *it->second[c];
                ++count;
            }
            MetricCell cell;
            cell.count = count;
            if (count > 0)
                cell.value = pr.kind == ColumnKind::categorical ? sum / static_cast<double>(count)
                                                                : std::sqrt(sum / static_cast<double>(count));
            pr.cells.emplace(regime, cell);
        }
        report.parameters.push_back(std::move(pr));
    }
    for (const auto& out : outcomes) {
        report.rows_evaluated += !out.results.empty();
        report.rows_skipped_no_evidence += out.no_evidence;
        report.training_failures += out.training_failures;
        report.restore_failures += out.restore_failures;
        report.evidence_dropped += out.evidence_dropped;
    }
    return report;
}

std::vector<AnomalyResult> anomaly_benchmark(const Dataset& d, const EvalConfig& config) {
    config.validate();
    const auto ranges = normalize_ranges(d);
    const MixLearnOptions options{config.bins, config.max_parents, 1.0};
    std::vector<AnomalyResult> results;

    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        if (d.kind(c) != ColumnKind::continuous) continue;
        AnomalyResult res;
        res.name = d.schema()[c].name;
        const auto& range = *ranges[c];
        if (range.rangeless || range.range() <= 0.0) {
            res.skipped = "zero range";
            results.push_back(std::move(res));
            continue;
        }

        std::vector<std::size_t> eligible;
        for (std::size_t r = 0; r < d.n_rows(); ++r)
            if (d.at(r, c).is_number()) eligible.push_back(r);
        const auto k = static_cast<std::size_t>(std::floor(config.anomaly_fraction * static_cast<double>(eligible.size())));
        if (k == 0 || k >= eligible.size()) {
            res.skipped = "too few values to inject";
            results.push_back(std::move(res));
            continue;
        }

        std::mt19937_64 rng(derive_seed(config.seed, 0xa40a1, c));
        std::vector<std::size_t> chosen = eligible;
        std::shuffle(chosen.begin(), chosen.end(), rng);
        chosen.resize(k);
        std::sort(chosen.begin(), chosen.end());
        std::uniform_real_distribution<double> draw(range.min, range.max);

        std::vector<Row> rows = d.rows();
        std::vector<bool> injected(d.n_rows(), false);
        for (auto r : chosen) {
            rows[r][c] = Value::number(draw(rng));
            injected[r] = true;
        }
        const Dataset perturbed(d.schema(), rows);

        std::vector<std::size_t> train_rows;
        for (std::size_t r = 0; r < d.n_rows(); ++r)
            if (config.anomaly_train_on_perturbed || !injected[r]) train_rows.push_back(r);

        std::optional<BayesianNetworkModel> model;
        try {
            model = mixlearn(select_rows(perturbed, train_rows), EdgeConstraints{}, options);
        } catch (const InputError& e) {
            res.skipped = std::string("training failed: ") + e.what();
            results.push_back(std::move(res));
            continue;
        }

        std::vector<std::optional<AnomalyScore>> scored(eligible.size());
        parallel_for(eligible.size(), worker_count(config.threads), [&](std::size_t i) {
            const auto r = eligible[i];
            Row record = perturbed.row(r);
            sanitize_record(*model, record);
            try {
                scored[i] = anomaly_score(*model, record, res.name, config.m_samples, derive_seed(config.seed, c, r));
            } catch (const InputError&) {
            }
        });

        std::vector<double> scores;
        std::vector<bool> labels;
        std::size_t tp = 0, fp = 0, positives = 0, negatives = 0;
        for (std::size_t i = 0; i < eligible.size(); ++i) {
            if (!scored[i]) continue;
            const bool label = injected[eligible[i]];
            scores.push_back(scored[i]->score);
            labels.push_back(label);
            (label ? positives : negatives)++;
            if (scored[i]->is_anomaly) (label ? tp : fp)++;
        }
        res.injected = k;
        res.scored = scores.size();
        if (positives == 0 || negatives == 0) {
            res.skipped = "scores available for one class only";
        } else {
            res.roc_auc = roc_auc(scores, labels);
            res.flag_true_positive_rate = static_cast<double>(tp) / static_cast<double>(positives);
            res.flag_false_positive_rate = static_cast<double>(fp) / static_cast<double>(negatives);
        }
        results.push_back(std::move(res));
    }
    return results;
}

EvalReport evaluate(const Dataset& d, const EvalConfig& config) {
    EvalReport report = leave_one_out(d, config);
    report.anomalies = anomaly_benchmark(d, config);
    return report;
}

}  // namespace mixbn
