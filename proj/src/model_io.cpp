#include "mixbn/model_io.hpp"

#include "mixbn/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mixbn {

namespace {

using Json = nlohmann::ordered_json;

std::string join_key(const std::vector<std::string>& labels) {
    std::string key;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].find(kKeySeparator) != std::string::npos)
            throw InputError("label '" + labels[i] + "' contains the key separator '|'");
        if (i) key.push_back(kKeySeparator);
        key += labels[i];
    }
    return key;
}

std::vector<std::string> split_key(const std::string& key, std::size_t arity) {
    std::vector<std::string> parts;
    if (arity == 0) {
        if (!key.empty()) throw InputError("non-empty table key for a parentless node");
        return parts;
    }
    std::size_t start = 0;
    for (;;) {
        const auto pos = key.find(kKeySeparator, start);
        parts.push_back(key.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (parts.size() != arity) throw InputError("table key '" + key + "' has the wrong number of labels");
    return parts;
}

Json lg_to_json(const LinearGaussian& lg, bool tagged = false) {
    Json j = Json::object();
    if (tagged) j["type"] = "lg";
    Json coefs = Json::object();
    for (const auto& [name, c] : lg.coefficients) coefs[name] = c;
    j["intercept"] = lg.intercept;
    j["coefficients"] = coefs;
    j["residual_variance"] = lg.residual_variance;
    j["marginal_mean"] = lg.marginal_mean;
    j["marginal_variance"] = lg.marginal_variance;
    return j;
}

LinearGaussian lg_from_json(const Json& j) {
    LinearGaussian lg;
    lg.intercept = j.at("intercept").get<double>();
    for (const auto& [name, c] : j.at("coefficients").items()) lg.coefficients.emplace_back(name, c.get<double>());
    lg.residual_variance = j.at("residual_variance").get<double>();
    lg.marginal_mean = j.at("marginal_mean").get<double>();
    lg.marginal_variance = j.at("marginal_variance").get<double>();
    return lg;
}

Json distribution_to_json(const Distribution& dist) {
    if (const auto* cpt = std::get_if<Cpt>(&dist)) {
        Json table = Json::object();
        for (const auto& [config, probs] : cpt->table) table[join_key(config)] = probs;
        return Json{{"type", "cpt"}, {"states", cpt->states}, {"table", table}};
    }
    if (const auto* lg = std::get_if<LinearGaussian>(&dist)) return lg_to_json(*lg, true);
    const auto& clg = std::get<ConditionalLinearGaussian>(dist);
    Json components = Json::object();
    for (const auto& [config, lg] : clg.components) components[join_key(config)] = lg_to_json(lg);
    return Json{{"type", "clg"},
                {"discrete_parents", clg.discrete_parents},
                {"continuous_parents", clg.continuous_parents},
                {"components", components},
                {"fallback", lg_to_json(clg.fallback)}};
}

Distribution distribution_from_json(const Json& j, const std::vector<std::string>& parents) {
    const auto type = j.at("type").get<std::string>();
    if (type == "cpt") {
        Cpt cpt;
        cpt.states = j.at("states").get<std::vector<std::string>>();
        cpt.parents = parents;
        for (const auto& [key, probs] : j.at("table").items())
            cpt.table.emplace(split_key(key, parents.size()), probs.get<std::vector<double>>());
        return cpt;
    }
    if (type == "lg") return lg_from_json(j);
    if (type == "clg") {
        ConditionalLinearGaussian clg;
        clg.discrete_parents = j.at("discrete_parents").get<std::vector<std::string>>();
        clg.continuous_parents = j.at("continuous_parents").get<std::vector<std::string>>();
        for (const auto& [key, lg] : j.at("components").items())
            clg.components.emplace(split_key(key, clg.discrete_parents.size()), lg_from_json(lg));
        clg.fallback = lg_from_json(j.at("fallback"));
        return clg;
    }
    throw InputError("unknown distribution type '" + type + "'");
}

std::string dot_id(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string model_to_json(const BayesianNetworkModel& model) {
    Json doc;
    doc["nodes"] = Json::array();
    for (const auto& node : model.nodes()) {
        doc["nodes"].push_back(Json{{"name", node.name},
                                    {"kind", std::string(to_string(node.kind))},
                                    {"parents", node.parents},
                                    {"distribution", distribution_to_json(node.distribution)}});
    }
    doc["edges"] = Json::array();
    for (const auto& e : model.dag().edges()) doc["edges"].push_back(Json::array({e.parent, e.child}));
    doc["bins"] = model.bins();
    doc["alpha"] = model.alpha();
    Json disc = Json::object();
    for (const auto& [column, edges] : model.discretization().edges) disc[column] = edges;
    doc["discretization"] = disc;
    return doc.dump(2) + "\n";
}

BayesianNetworkModel model_from_json(std::string_view text) {
    try {
        const Json doc = Json::parse(text);
        std::vector<std::string> names;
        for (const auto& node : doc.at("nodes")) names.push_back(node.at("name").get<std::string>());
        std::vector<Edge> edges;
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw InputError("edges must be [parent, child] pairs");
            edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
        }
        Dag dag(names, edges);

        std::vector<NodeModel> nodes;
        for (const auto& node : doc.at("nodes")) {
            NodeModel m;
            m.name = node.at("name").get<std::string>();
            m.kind = parse_column_kind(node.at("kind").get<std::string>());
            m.parents = node.at("parents").get<std::vector<std::string>>();
            m.distribution = distribution_from_json(node.at("distribution"), m.parents);
            nodes.push_back(std::move(m));
        }
        DiscretizationMap map;
        map.bins = doc.at("bins").get<std::size_t>();
        if (doc.contains("discretization"))
            for (const auto& [column, e] : doc.at("discretization").items())
                map.edges.emplace(column, e.get<std::vector<double>>());
        return BayesianNetworkModel(std::move(dag), std::move(nodes), std::move(map), doc.at("alpha").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    } catch (const InvariantError& e) {
        throw InputError(std::string("inconsistent model document: ") + e.what());
    }
}

void save_model(const BayesianNetworkModel& model, const std::string& path) {
    const auto text = model_to_json(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write model file '" + path + "'");
    out << text;
}

BayesianNetworkModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return model_from_json(ss.str());
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string model_to_dot(const BayesianNetworkModel& model) {
    std::ostringstream out;
    out << "digraph mixbn {\n";
    for (const auto& node : model.nodes()) {
        if (node.kind == ColumnKind::continuous)
            out << "  " << dot_id(node.name) << " [shape=ellipse, style=filled, fillcolor=red];\n";
        else
            out << "  " << dot_id(node.name) << " [shape=box, style=filled, fillcolor=lightblue, color=blue];\n";
    }
    for (const auto& e : model.dag().edges()) out << "  " << dot_id(e.parent) << " -> " << dot_id(e.child) << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace mixbn
