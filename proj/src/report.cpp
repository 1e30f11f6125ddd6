#include "mixbn/evaluation.hpp"

#include <json.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mixbn {

namespace {

using Json = nlohmann::ordered_json;

// Reference restoration scores for the reservoir parameters, in regime order
// all_dataset, cosine, gower, filter, gower_weighted, and anomaly ROC-AUC.
struct Reference {
    const char* key;
    std::array<double, 5> restoration;
    double roc_auc;  // NaN when not reported
};

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<Reference, 11> kReferences{{
    {"tectonicregime", {0.48, 0.85, 0.85, 0.90, 0.78}, kNone},
    {"period", {0.36, 0.65, 0.63, 0.62, 0.62}, kNone},
    {"depositionalsystem", {0.56, 0.81, 0.78, 0.76, 0.72}, kNone},
    {"lithology", {0.57, 0.80, 0.81, 0.81, 0.81}, kNone},
    {"structuralsetting", {0.56, 0.72, 0.73, 0.71, 0.71}, kNone},
    {"trappingmechanism", {0.51, 0.76, 0.77, 0.75, 0.77}, kNone},
    {"gross", {399.92, 416.59, 384.98, 375.37, 306.61}, 0.85},
    {"netpay", {89.7, 94.69, 77.65, 75.84, 68.66}, 0.97},
    {"porosity", {6.09, 7.04, 6.23, 6.24, 4.62}, 0.80},
    {"permeability", {1886.06, 1450.2, 1359.97, 1271.64, 846.01}, 0.71},
    {"depth", {1372.47, 1088.82, 1052.4, 1126.7, 779.14}, 0.70},
}};

std::string normalize_name(const std::string& name) {
    std::string out;
    for (unsigned char c : name)
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

const Reference* find_reference(const std::string& name) {
    const auto key = normalize_name(name);
    for (const auto& ref : kReferences)
        if (key == ref.key) return &ref;
    return nullptr;
}

std::size_t regime_slot(Regime regime) {
    switch (regime) {
    case Regime::all_dataset: return 0;
    case Regime::cosine: return 1;
    case Regime::gower: return 2;
    case Regime::filter: return 3;
    case Regime::gower_weighted: return 4;
    }
    return 0;
}

std::string_view regime_title(Regime regime) {
    switch (regime) {
    case Regime::all_dataset: return "All dataset";
    case Regime::cosine: return "Cosine distance";
    case Regime::gower: return "Gower distance";
    case Regime::filter: return "Filtering function";
    case Regime::gower_weighted: return "Gower distance with weights";
    }
    return "";
}

std::string fixed(double x, int digits) {
    if (std::isinf(x)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    const auto& cfg = report.config;
    Json doc;
    Json meta;
    meta["seed"] = cfg.seed;
    meta["regimes"] = Json::array();
    for (auto r : cfg.regimes) meta["regimes"].push_back(std::string(to_string(r)));
    meta["n_analogues"] = cfg.n_analogues;
    meta["bins"] = cfg.bins;
    meta["max_parents"] = cfg.max_parents;
    meta["m_samples"] = cfg.m_samples;
    meta["epsilon"] = cfg.epsilon;
    meta["anomaly_fraction"] = cfg.anomaly_fraction;
    meta["anomaly_training"] = cfg.anomaly_train_on_perturbed ? "perturbed" : "clean_remainder";
    meta["continuous_weight"] = report.continuous_weight ? Json(*report.continuous_weight) : Json(nullptr);
    meta["row_sample"] = cfg.row_sample ? Json(*cfg.row_sample) : Json(nullptr);
    meta["rows_total"] = report.rows_total;
    meta["rows_evaluated"] = report.rows_evaluated;
    meta["rows_skipped_no_evidence"] = report.rows_skipped_no_evidence;
    meta["training_failures"] = report.training_failures;
    meta["restore_failures"] = report.restore_failures;
    meta["evidence_dropped"] = report.evidence_dropped;
    doc["metadata"] = meta;

    doc["restoration"] = Json::array();
    for (const auto& p : report.parameters) {
        Json entry;
        entry["parameter"] = p.name;
        entry["kind"] = std::string(to_string(p.kind));
        entry["metric"] = p.kind == ColumnKind::categorical ? "accuracy" : "rmse";
        Json cells = Json::object();
        for (const auto& [regime, cell] : p.cells)
            cells[std::string(to_string(regime))] =
                Json{{"value", cell.count ? Json(cell.value) : Json(nullptr)}, {"count", cell.count}};
        entry["cells"] = cells;
        if (const auto* ref = find_reference(p.name)) {
            Json refs = Json::object();
            for (auto regime : all_regimes()) refs[std::string(to_string(regime))] = ref->restoration[regime_slot(regime)];
            entry["reference"] = refs;
        }
        doc["restoration"].push_back(entry);
    }

    doc["anomalies"] = Json::array();
    for (const auto& a : report.anomalies) {
        Json entry;
        entry["parameter"] = a.name;
        entry["roc_auc"] = a.roc_auc ? Json(*a.roc_auc) : Json(nullptr);
        entry["injected"] = a.injected;
        entry["scored"] = a.scored;
        entry["flag_true_positive_rate"] = a.flag_true_positive_rate;
        entry["flag_false_positive_rate"] = a.flag_false_positive_rate;
        if (!a.skipped.empty()) entry["skipped"] = a.skipped;
        if (const auto* ref = find_reference(a.name); ref && !std::isnan(ref->roc_auc))
            entry["reference_roc_auc"] = ref->roc_auc;
        doc["anomalies"].push_back(entry);
    }
    return doc.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
    const auto& regimes = report.config.regimes;
    std::size_t name_width = 16;
    for (const auto& p : report.parameters) name_width = std::max(name_width, p.name.size() + 2);
    for (const auto& a : report.anomalies) name_width = std::max(name_width, a.name.size() + 2);
    std::vector<std::size_t> widths;
    for (auto r : regimes) widths.push_back(std::max<std::size_t>(regime_title(r).size() + 2, 12));

    std::ostringstream out;
    auto rule = [&] {
        std::size_t total = name_width;
        for (auto w : widths) total += w + 1;
        out << std::string(total, '-') << '\n';
    };
    out << pad("Parameter", name_width);
    for (std::size_t i = 0; i < regimes.size(); ++i) out << '|' << pad(std::string(regime_title(regimes[i])), widths[i]);
    out << '\n';
    rule();

    auto section = [&](ColumnKind kind, const char* title, int digits) {
        bool any = false;
        for (const auto& p : report.parameters) any |= p.kind == kind;
        if (!any) return;
        out << title << '\n';
        rule();
        for (const auto& p : report.parameters) {
            if (p.kind != kind) continue;
            out << pad(p.name, name_width);
            for (std::size_t i = 0; i < regimes.size(); ++i) {
                const auto it = p.cells.find(regimes[i]);
                const bool has = it != p.cells.end() && it->second.count > 0;
                out << '|' << pad(has ? fixed(it->second.value, digits) : "n/a", widths[i]);
            }
            out << '\n';
            if (const auto* ref = find_reference(p.name)) {
                out << pad("  (reference)", name_width);
                for (std::size_t i = 0; i < regimes.size(); ++i)
                    out << '|' << pad(fixed(ref->restoration[regime_slot(regimes[i])], 2), widths[i]);
                out << '\n';
            }
        }
        rule();
    };
    section(ColumnKind::categorical, "Accuracy for the categorical parameters", 3);
    section(ColumnKind::continuous, "RMSE for the continuous parameters", 3);

    if (!report.anomalies.empty()) {
        out << "\nAnomaly detection (uniform in-range injection, "
            << fixed(report.config.anomaly_fraction * 100.0, 0) << "% of values)\n";
        out << pad("Parameter", name_width) << '|' << pad("ROC-AUC", 10) << '|' << pad("2-sigma TPR", 13) << '|'
            << pad("2-sigma FPR", 13) << '|' << "reference ROC-AUC\n";
        for (const auto& a : report.anomalies) {
            out << pad(a.name, name_width) << '|' << pad(a.roc_auc ? fixed(*a.roc_auc, 3) : "n/a", 10) << '|'
                << pad(a.roc_auc ? fixed(a.flag_true_positive_rate, 3) : "n/a", 13) << '|'
                << pad(a.roc_auc ? fixed(a.flag_false_positive_rate, 3) : "n/a", 13) << '|';
            const auto* ref = find_reference(a.name);
            out << (ref && !std::isnan(ref->roc_auc) ? fixed(ref->roc_auc, 2) : "-");
            if (!a.skipped.empty()) out << "  (skipped: " << a.skipped << ")";
            out << '\n';
        }
    }

    out << "\nrows evaluated " << report.rows_evaluated << " of " << report.rows_total << ", seed "
        << report.config.seed;
    if (report.continuous_weight) out << ", continuous weight " << fixed(*report.continuous_weight, 3);
    out << ", training failures " << report.training_failures << ", restore failures " << report.restore_failures
        << ", rows without evidence " << report.rows_skipped_no_evidence << '\n';
    return out.str();
}

}  // namespace mixbn
