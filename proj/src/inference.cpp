#include "mixbn/inference.hpp"

#include "mixbn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mixbn {

namespace {

const std::vector<std::string>& states_of(const NodeModel& node) {
    return std::get<Cpt>(node.distribution).states;
}

}  // namespace

void validate_evidence(const BayesianNetworkModel& model, const Evidence& evidence) {
    for (const auto& [name, value] : evidence) {
        if (!model.dag().has_node(name)) throw InputError("evidence names unknown node '" + name + "'");
        const auto& node = model.node(name);
        if (value.is_missing()) throw InputError("evidence for '" + name + "' is missing");
        if (node.kind == ColumnKind::categorical) {
            if (!value.is_category()) throw InputError("evidence for categorical '" + name + "' must be a label");
            const auto& cpt = std::get<Cpt>(node.distribution);
            if (cpt.state_index(value.label()) == cpt.states.size())
                throw InputError("label '" + value.label() + "' is not a known state of '" + name + "'");
        } else if (!value.is_number()) {
            throw InputError("evidence for continuous '" + name + "' must be a number");
        }
    }
}

std::vector<std::string> drop_unknown_labels(const BayesianNetworkModel& model, Evidence& evidence) {
    std::vector<std::string> dropped;
    for (auto it = evidence.begin(); it != evidence.end();) {
        const auto& [name, value] = *it;
        if (model.dag().has_node(name) && value.is_category() &&
            model.node(name).kind == ColumnKind::categorical) {
            const auto& cpt = std::get<Cpt>(model.node(name).distribution);
            if (cpt.state_index(value.label()) == cpt.states.size()) {
                dropped.push_back(name);
                it = evidence.erase(it);
                continue;
            }
        }
        ++it;
    }
    return dropped;
}

const std::vector<Value>& SampleSet::of(const std::string& node) const {
    auto it = std::find(nodes.begin(), nodes.end(), node);
    if (it == nodes.end()) throw InputError("no samples for node '" + node + "'");
    return values[static_cast<std::size_t>(it - nodes.begin())];
}

SampleSet forward_sample(const BayesianNetworkModel& model, const Evidence& evidence, std::size_t m,
                         std::uint64_t seed) {
    if (m == 0) throw InputError("sample count must be positive");
    validate_evidence(model, evidence);

    const auto& dag = model.dag();
    const auto n = dag.size();
    const auto order = dag.topological_indices();

    // Per node: clamped state (categorical index or number), if any.
    std::vector<char> clamped(n, 0);
    std::vector<std::size_t> state(n, 0);
    std::vector<double> number(n, 0.0);
    for (const auto& [name, value] : evidence) {
        const auto v = dag.index_of(name);
        clamped[v] = 1;
        if (value.is_category())
            state[v] = std::get<Cpt>(model.node(v).distribution).state_index(value.label());
        else
            number[v] = value.number();
    }

    // Split parents of continuous nodes into discrete/continuous index lists.
    std::vector<std::vector<std::size_t>> discrete_parents(n), continuous_parents(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& node = model.node(v);
        if (const auto* clg = std::get_if<ConditionalLinearGaussian>(&node.distribution)) {
            for (const auto& p : clg->discrete_parents) discrete_parents[v].push_back(dag.index_of(p));
            for (const auto& p : clg->continuous_parents) continuous_parents[v].push_back(dag.index_of(p));
        } else if (const auto* lg = std::get_if<LinearGaussian>(&node.distribution)) {
            for (const auto& [p, c] : lg->coefficients) continuous_parents[v].push_back(dag.index_of(p));
        } else {
            for (const auto& p : node.parents) discrete_parents[v].push_back(dag.index_of(p));
        }
    }

    SampleSet out;
    out.nodes = dag.nodes();
    out.m = m;
    out.values.assign(n, {});
    for (auto& column : out.values) column.reserve(m);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> standard_normal(0.0, 1.0);

    auto config_of = [&](std::size_t v) {
        std::vector<std::string> config;
        config.reserve(discrete_parents[v].size());
        for (auto p : discrete_parents[v]) config.push_back(states_of(model.node(p))[state[p]]);
        return config;
    };
    auto draw_gaussian = [&](const LinearGaussian& lg, std::size_t v) {
        std::vector<double> xs;
        xs.reserve(continuous_parents[v].size());
        for (auto p : continuous_parents[v]) xs.push_back(number[p]);
        const double mu = lg.mean(xs);
        return mu + std::sqrt(lg.residual_variance) * standard_normal(rng);
    };

    for (std::size_t s = 0; s < m; ++s) {
        for (auto v : order) {
            if (clamped[v]) continue;
            const auto& dist = model.node(v).distribution;
            if (const auto* cpt = std::get_if<Cpt>(&dist)) {
                const auto r = cpt->states.size();
                const auto* probs = cpt->find(config_of(v));
                const double u = uniform(rng);
                std::size_t k = 0;
                if (probs) {
                    double acc = 0.0;
                    for (k = 0; k + 1 < r; ++k) {
                        acc += (*probs)[k];
                        if (u < acc) break;
                    }
                } else {
                    k = std::min(static_cast<std::size_t>(u * static_cast<double>(r)), r - 1);
                }
                state[v] = k;
            } else if (const auto* lg = std::get_if<LinearGaussian>(&dist)) {
                number[v] = draw_gaussian(*lg, v);
            } else {
                const auto& clg = std::get<ConditionalLinearGaussian>(dist);
                number[v] = draw_gaussian(clg.select(config_of(v)), v);
            }
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (model.node(v).kind == ColumnKind::categorical)
                out.values[v].push_back(Value::category(states_of(model.node(v))[state[v]]));
            else
                out.values[v].push_back(Value::number(number[v]));
        }
    }
    return out;
}

Evidence evidence_from_row(const BayesianNetworkModel& model, const Row& record) {
    if (record.size() != model.nodes().size())
        throw InputError("record has " + std::to_string(record.size()) + " fields, model has " +
                         std::to_string(model.nodes().size()) + " nodes");
    validate_row(model.schema(), record);
    Evidence ev;
    for (std::size_t v = 0; v < record.size(); ++v)
        if (!record[v].is_missing()) ev.emplace(model.node(v).name, record[v]);
    return ev;
}

Row restore(const BayesianNetworkModel& model, const Row& record, std::size_t m, std::uint64_t seed) {
    const Evidence ev = evidence_from_row(model, record);
    if (ev.size() == record.size()) throw InputError("record has no missing fields to restore");
    const SampleSet samples = forward_sample(model, ev, m, seed);

    Row out = record;
    for (std::size_t v = 0; v < record.size(); ++v) {
        if (!record[v].is_missing()) continue;
        const auto& column = samples.values[v];
        if (model.node(v).kind == ColumnKind::categorical) {
            std::map<std::string, std::size_t> counts;
            for (const auto& x : column) ++counts[x.label()];
            // std::map iterates labels in order; strict > keeps the first of ties.
            auto best = counts.begin();
            for (auto it = counts.begin(); it != counts.end(); ++it)
                if (it->second > best->second) best = it;
            out[v] = Value::category(best->first);
        } else {
            double sum = 0.0;
            for (const auto& x : column) sum += x.number();
            out[v] = Value::number(sum / static_cast<double>(column.size()));
        }
    }
    return out;
}

AnomalyScore anomaly_score(const BayesianNetworkModel& model, const Row& record, const std::string& target,
                           std::size_t m, std::uint64_t seed) {
    if (!model.dag().has_node(target)) throw InputError("unknown target node '" + target + "'");
    const auto t = model.dag().index_of(target);
    if (model.node(t).kind != ColumnKind::continuous)
        throw InputError("anomaly target '" + target + "' must be continuous");
    Evidence ev = evidence_from_row(model, record);
    auto it = ev.find(target);
    if (it == ev.end()) throw InputError("anomaly target '" + target + "' is missing in the record");
    const double value = it->second.number();
    ev.erase(it);

    const auto samples = forward_sample(model, ev, m, seed);
    const auto& column = samples.values[t];
    double mean = 0.0;
    for (const auto& x : column) mean += x.number();
    mean /= static_cast<double>(column.size());
    double var = 0.0;
    for (const auto& x : column) var += (x.number() - mean) * (x.number() - mean);
    var /= static_cast<double>(column.size());

    AnomalyScore result;
    result.sample_mean = mean;
    result.sample_std = std::sqrt(var);
    const double diff = std::abs(value - mean);
    if (result.sample_std > 0.0)
        result.score = diff / result.sample_std;
    else
        result.score = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    result.is_anomaly = result.score > kAnomalyThreshold;
    return result;
}

}  // namespace mixbn
