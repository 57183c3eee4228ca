#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"

#include "soundmask/attacks.hpp"
#include "soundmask/error.hpp"
#include "soundmask/png.hpp"
#include "soundmask/randomness.hpp"

namespace soundmask::evaluation {

// ---------------------------------------------------------------------------
// Metric tables over (scenario, family) cells.

// one attack evaluation tagged with where it came from
struct LabeledResult {
    std::string scenario;
    std::string family;
    attacks::AttackResult result;
};

struct MetricTable {
    // scenario -> family -> value; rectangular by construction
    std::map<std::string, std::map<std::string, double>> cells;

    std::vector<std::string> scenarios() const {
        std::vector<std::string> out;
        for (const auto& [s, row] : cells) out.push_back(s);
        return out;
    }

    std::vector<std::string> families() const {
        std::vector<std::string> out;
        if (!cells.empty()) {
            for (const auto& [f, v] : cells.begin()->second) out.push_back(f);
        }
        return out;
    }

    double at(const std::string& scenario, const std::string& family) const {
        const auto row = cells.find(scenario);
        if (row == cells.end()) {
            throw MissingCellError("no results for scenario " + scenario);
        }
        const auto cell = row->second.find(family);
        if (cell == row->second.end()) {
            throw MissingCellError("no result for " + scenario + "/" + family);
        }
        return cell->second;
    }
};

namespace detail {

inline MetricTable collect(const std::vector<LabeledResult>& results,
                           const std::string& expected_condition) {
    if (results.empty()) {
        throw MissingCellError("no attack results to tabulate");
    }
    MetricTable table;
    for (const auto& r : results) {
        if (r.result.condition != expected_condition) {
            throw MissingCellError("result for " + r.scenario + "/" +
                                   r.family + " has condition " +
                                   r.result.condition + ", expected " +
                                   expected_condition);
        }
        auto& row = table.cells[r.scenario];
        if (!row.emplace(r.family, r.result.accuracy).second) {
            throw MissingCellError("duplicate result for " + r.scenario +
                                   "/" + r.family);
        }
    }
    // every scenario must cover the same family set
    const auto families = table.families();
    for (const auto& [scenario, row] : table.cells) {
        for (const auto& f : families) {
            if (!row.count(f)) {
                throw MissingCellError("no result for " + scenario + "/" + f);
            }
        }
        if (row.size() != families.size()) {
            for (const auto& [f, v] : row) {
                if (std::find(families.begin(), families.end(), f) ==
                    families.end()) {
                    throw MissingCellError("family " + f +
                                           " appears only under " + scenario);
                }
            }
        }
    }
    return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Baseline inference accuracy.

struct BiaTable {
    MetricTable accuracy;
    std::map<std::string, std::string> best_family;  // per-scenario argmax
};

inline BiaTable compute_bia(const std::vector<LabeledResult>& clean) {
    BiaTable out;
    out.accuracy = detail::collect(clean, "clean");
    for (const auto& [scenario, row] : out.accuracy.cells) {
        auto best = row.begin();
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        out.best_family[scenario] = best->first;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Masked inference accuracy and mitigation deltas.

struct MitigationTable {
    MetricTable bia;                           // echoed baseline
    std::map<std::string, MetricTable> mia;    // noise kind -> accuracy
    std::map<std::string, MetricTable> delta;  // noise kind -> bia - mia
    std::map<std::string, double> max_delta;   // aggregate per noise kind
};

namespace detail {

inline std::string kind_of(const std::string& condition) {
    if (condition == "+white") return "white";
    if (condition == "+gan") return "gan";
    throw KeyMismatchError("masked result has condition " + condition);
}

}  // namespace detail

// Masked results carry their noise kind in the condition label; every kind
// present must cover exactly the clean table's (scenario, family) keys.
inline MitigationTable compute_mia(const std::vector<LabeledResult>& clean,
                                   const std::vector<LabeledResult>& masked) {
    MitigationTable out;
    out.bia = detail::collect(clean, "clean");
    if (masked.empty()) {
        throw KeyMismatchError("no masked results to compare against");
    }

    std::map<std::string, std::vector<LabeledResult>> by_kind;
    for (const auto& r : masked) {
        by_kind[detail::kind_of(r.result.condition)].push_back(r);
    }
    for (const auto& [kind, results] : by_kind) {
        MetricTable table = detail::collect(results, "+" + kind);
        // keys must match the baseline exactly
        if (table.cells.size() != out.bia.cells.size()) {
            throw KeyMismatchError("masked (" + kind +
                                   ") scenarios disagree with baseline");
        }
        for (const auto& [scenario, row] : table.cells) {
            const auto base = out.bia.cells.find(scenario);
            if (base == out.bia.cells.end() ||
                base->second.size() != row.size()) {
                throw KeyMismatchError("masked (" + kind + ") keys under " +
                                       scenario + " disagree with baseline");
            }
            for (const auto& [family, v] : row) {
                if (!base->second.count(family)) {
                    throw KeyMismatchError("masked (" + kind + ") cell " +
                                           scenario + "/" + family +
                                           " has no baseline");
                }
            }
        }

        MetricTable deltas;
        double max_d = -2.0;
        for (const auto& [scenario, row] : table.cells) {
            for (const auto& [family, v] : row) {
                const double d = out.bia.cells[scenario][family] - v;
                deltas.cells[scenario][family] = d;
                max_d = std::max(max_d, d);
            }
        }
        out.mia[kind] = std::move(table);
        out.delta[kind] = std::move(deltas);
        out.max_delta[kind] = max_d;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Semantic preservation factor.

struct SpfResult {
    double clean_accuracy = 0.0;
    std::map<std::string, double> masked_accuracy;  // noise kind -> accuracy
    std::map<std::string, double> values;           // ratio capped at 1
};

inline SpfResult compute_spf(double clean_accuracy,
                             const std::map<std::string, double>& masked) {
    if (!(clean_accuracy >= 0.0 && clean_accuracy <= 1.0)) {
        throw ConfigError("spf: clean accuracy outside [0,1]");
    }
    if (clean_accuracy == 0.0) {
        throw ZeroBaselineError("spf: clean accuracy is zero");
    }
    if (masked.empty()) throw ConfigError("spf: no masked accuracies");
    SpfResult out;
    out.clean_accuracy = clean_accuracy;
    for (const auto& [kind, acc] : masked) {
        if (!(acc >= 0.0 && acc <= 1.0)) {
            throw ConfigError("spf: masked accuracy outside [0,1]");
        }
        out.masked_accuracy[kind] = acc;
        out.values[kind] = std::min(1.0, acc / clean_accuracy);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Randomness-to-mitigation relationship: Spearman rank correlation over
// (randomness score, mitigation delta) pairs, ties mid-ranked.

struct RtmrPair {
    std::string label;  // e.g. scenario/noise-kind the pair came from
    double randomness = 0.0;
    double delta = 0.0;
};

struct RtmrResult {
    double coefficient = 0.0;
    std::vector<RtmrPair> pairs;
};

namespace detail {

inline std::vector<double> mid_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = (static_cast<double>(i) +
                             static_cast<double>(j) + 2.0) /
                            2.0;  // 1-based mid-rank
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

inline RtmrResult compute_rtmr(const std::vector<RtmrPair>& pairs) {
    if (pairs.size() < 3) {
        throw InsufficientPairsError(
            "rtmr needs at least 3 pairs, got " +
            std::to_string(pairs.size()));
    }
    std::vector<double> xs, ys;
    for (const auto& p : pairs) {
        if (!std::isfinite(p.randomness) || !std::isfinite(p.delta)) {
            throw ConfigError("rtmr: non-finite pair value");
        }
        xs.push_back(p.randomness);
        ys.push_back(p.delta);
    }
    const std::vector<double> rx = detail::mid_ranks(xs);
    const std::vector<double> ry = detail::mid_ranks(ys);
    const double n = static_cast<double>(pairs.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    RtmrResult out;
    out.pairs = pairs;
    // an all-tied axis carries no ordinal information
    out.coefficient =
        (sxx == 0.0 || syy == 0.0) ? 0.0 : sxy / std::sqrt(sxx * syy);
    return out;
}

// ---------------------------------------------------------------------------
// Directional claims: computed and persisted with both sides, whichever way
// they fall.

struct DirectionalClaim {
    std::string name;
    std::string statement;  // "<lhs label> > <rhs label>"
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

inline DirectionalClaim make_claim(const std::string& name,
                                   const std::string& statement, double lhs,
                                   double rhs) {
    return {name, statement, lhs, rhs, lhs > rhs};
}

// ---------------------------------------------------------------------------
// Report assembly.

struct RandomnessSummary {
    double mean_ww_score = 0.0;
    double mean_cs_score = 0.0;
    std::size_t scored = 0;
    std::size_t skipped_degenerate = 0;
};

inline RandomnessSummary summarize(const randomness::RandomnessReport& r) {
    return {r.mean_ww_score, r.mean_cs_score, r.scored_count,
            r.skipped_degenerate};
}

struct Provenance {
    std::map<std::string, std::uint64_t> seeds;
    std::vector<double> snr_db;
    int gan_steps = 0;
    std::string gan_checkpoint_hash;
    std::map<std::string, std::string> extra;  // free-form config values
};

// Full-scale reference results from the original study; recorded as
// metadata only, never as targets (not reproducible at desk scale).
inline const std::map<std::string, double>& reference_constants() {
    static const std::map<std::string, double> constants{
        {"full_scale_bia_mgi_best", 0.67},
        {"full_scale_bia_udi_crnn", 0.82},
        {"full_scale_white_noise_drop_max", 0.11},
        {"full_scale_gan_noise_drop", 0.45},
    };
    return constants;
}

struct EvaluationReport {
    int schema_version = 1;
    BiaTable bia;
    MitigationTable mitigation;  // headline tables at the primary SNR
    // noise kind -> snr label -> accuracy table, for the full SNR grid
    std::map<std::string, std::map<std::string, MetricTable>> mia_by_snr;
    SpfResult spf;
    RtmrResult rtmr;
    std::map<std::string, RandomnessSummary> randomness;  // condition -> stats
    std::vector<DirectionalClaim> claims;
    Provenance provenance;
};

// ---------------------------------------------------------------------------
// Fingerprint: FNV-1a over the canonical provenance serialization, so the
// fingerprint moves exactly when a seed or config input moves.

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

namespace detail {

inline nlohmann::json provenance_json(const Provenance& p) {
    nlohmann::json j;
    j["seeds"] = p.seeds;
    j["snr_db"] = p.snr_db;
    j["gan_steps"] = p.gan_steps;
    j["gan_checkpoint_hash"] = p.gan_checkpoint_hash;
    j["extra"] = p.extra;
    return j;
}

}  // namespace detail

inline std::string fingerprint(const EvaluationReport& report) {
    nlohmann::json j = detail::provenance_json(report.provenance);
    j["schema_version"] = report.schema_version;
    return hex64(fnv1a64(j.dump()));
}

// ---------------------------------------------------------------------------
// JSON serialization and schema validation.

namespace detail {

inline nlohmann::json table_json(const MetricTable& t) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [scenario, row] : t.cells) j[scenario] = row;
    return j;
}

inline MetricTable table_from(const nlohmann::json& j) {
    MetricTable t;
    for (const auto& [scenario, row] : j.items()) {
        for (const auto& [family, v] : row.items()) {
            t.cells[scenario][family] = v.get<double>();
        }
    }
    return t;
}

}  // namespace detail

inline nlohmann::json to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["schema_version"] = report.schema_version;
    j["scenarios"] = report.bia.accuracy.scenarios();

    nlohmann::json metrics;
    metrics["bia"] = detail::table_json(report.bia.accuracy);
    metrics["bia_best_family"] = report.bia.best_family;
    nlohmann::json mia = nlohmann::json::object();
    nlohmann::json delta = nlohmann::json::object();
    for (const auto& [kind, t] : report.mitigation.mia) {
        mia[kind] = detail::table_json(t);
    }
    for (const auto& [kind, t] : report.mitigation.delta) {
        delta[kind] = detail::table_json(t);
    }
    metrics["mia"] = mia;
    metrics["delta"] = delta;
    metrics["max_delta"] = report.mitigation.max_delta;
    if (!report.mia_by_snr.empty()) {
        nlohmann::json grid = nlohmann::json::object();
        for (const auto& [kind, by_snr] : report.mia_by_snr) {
            for (const auto& [snr, t] : by_snr) {
                grid[kind][snr] = detail::table_json(t);
            }
        }
        metrics["mia_by_snr"] = grid;
    }
    metrics["spf"] = {{"clean_accuracy", report.spf.clean_accuracy},
                      {"masked_accuracy", report.spf.masked_accuracy},
                      {"values", report.spf.values}};
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.rtmr.pairs) {
        pairs.push_back({{"label", p.label},
                         {"randomness", p.randomness},
                         {"delta", p.delta}});
    }
    metrics["rtmr"] = {{"coefficient", report.rtmr.coefficient},
                       {"pairs", pairs}};
    nlohmann::json rnd = nlohmann::json::object();
    for (const auto& [condition, s] : report.randomness) {
        rnd[condition] = {{"mean_ww_score", s.mean_ww_score},
                          {"mean_cs_score", s.mean_cs_score},
                          {"scored", s.scored},
                          {"skipped_degenerate", s.skipped_degenerate}};
    }
    metrics["randomness"] = rnd;
    j["metrics"] = metrics;

    nlohmann::json claims = nlohmann::json::array();
    for (const auto& c : report.claims) {
        claims.push_back({{"name", c.name},
                          {"statement", c.statement},
                          {"lhs", c.lhs},
                          {"rhs", c.rhs},
                          {"holds", c.holds}});
    }
    j["claims"] = claims;
    j["reference"] = reference_constants();

    nlohmann::json prov = detail::provenance_json(report.provenance);
    prov["fingerprint"] = fingerprint(report);
    j["provenance"] = prov;
    return j;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j,
                                     const std::string& path,
                                     const std::string& key) {
    if (!j.is_object() || !j.contains(key)) {
        throw SchemaError("report schema: missing field " +
                          (path.empty() ? key : path + "." + key));
    }
    return j.at(key);
}

inline void require_unit(const nlohmann::json& v, const std::string& path,
                         double lo, double hi) {
    if (!v.is_number()) {
        throw SchemaError("report schema: " + path + " must be a number");
    }
    const double d = v.get<double>();
    if (!(d >= lo && d <= hi)) {
        throw SchemaError("report schema: " + path + " outside [" +
                          std::to_string(lo) + "," + std::to_string(hi) +
                          "]");
    }
}

inline void require_table(const nlohmann::json& t, const std::string& path,
                          double lo, double hi) {
    if (!t.is_object() || t.empty()) {
        throw SchemaError("report schema: " + path +
                          " must be a non-empty object");
    }
    for (const auto& [scenario, row] : t.items()) {
        if (!row.is_object() || row.empty()) {
            throw SchemaError("report schema: " + path + "." + scenario +
                              " must be a non-empty object");
        }
        for (const auto& [family, v] : row.items()) {
            require_unit(v, path + "." + scenario + "." + family, lo, hi);
        }
    }
}

}  // namespace detail

// Structural and range checks against the published report schema; error
// messages carry the dotted path of the offending field.
inline void validate_report_json(const nlohmann::json& j) {
    using detail::require;
    using detail::require_table;
    using detail::require_unit;

    const auto& version = require(j, "", "schema_version");
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw SchemaError("report schema: schema_version must be 1");
    }
    const auto& scenarios = require(j, "", "scenarios");
    if (!scenarios.is_array() || scenarios.empty()) {
        throw SchemaError(
            "report schema: scenarios must be a non-empty array");
    }

    const auto& metrics = require(j, "", "metrics");
    require_table(require(metrics, "metrics", "bia"), "metrics.bia", 0.0,
                  1.0);
    require(metrics, "metrics", "bia_best_family");
    const auto& mia = require(metrics, "metrics", "mia");
    const auto& delta = require(metrics, "metrics", "delta");
    if (!mia.is_object() || !delta.is_object()) {
        throw SchemaError(
            "report schema: metrics.mia and metrics.delta must be objects");
    }
    for (const auto& [kind, t] : mia.items()) {
        require_table(t, "metrics.mia." + kind, 0.0, 1.0);
    }
    for (const auto& [kind, t] : delta.items()) {
        require_table(t, "metrics.delta." + kind, -1.0, 1.0);
    }
    const auto& max_delta = require(metrics, "metrics", "max_delta");
    for (const auto& [kind, v] : max_delta.items()) {
        require_unit(v, "metrics.max_delta." + kind, -1.0, 1.0);
    }
    if (metrics.contains("mia_by_snr")) {
        for (const auto& [kind, by_snr] : metrics.at("mia_by_snr").items()) {
            for (const auto& [snr, t] : by_snr.items()) {
                require_table(t, "metrics.mia_by_snr." + kind + "." + snr,
                              0.0, 1.0);
            }
        }
    }

    const auto& spf = require(metrics, "metrics", "spf");
    require_unit(require(spf, "metrics.spf", "clean_accuracy"),
                 "metrics.spf.clean_accuracy", 0.0, 1.0);
    require(spf, "metrics.spf", "masked_accuracy");
    const auto& spf_values = require(spf, "metrics.spf", "values");
    for (const auto& [kind, v] : spf_values.items()) {
        require_unit(v, "metrics.spf.values." + kind, 0.0, 1.0);
    }

    const auto& rtmr = require(metrics, "metrics", "rtmr");
    require_unit(require(rtmr, "metrics.rtmr", "coefficient"),
                 "metrics.rtmr.coefficient", -1.0, 1.0);
    const auto& pairs = require(rtmr, "metrics.rtmr", "pairs");
    if (!pairs.is_array()) {
        throw SchemaError("report schema: metrics.rtmr.pairs must be an array");
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string p = "metrics.rtmr.pairs[" + std::to_string(i) + "]";
        require(pairs[i], p, "label");
        require(pairs[i], p, "randomness");
        require(pairs[i], p, "delta");
    }
    require(metrics, "metrics", "randomness");

    const auto& claims = require(j, "", "claims");
    if (!claims.is_array()) {
        throw SchemaError("report schema: claims must be an array");
    }
    for (std::size_t i = 0; i < claims.size(); ++i) {
        const std::string p = "claims[" + std::to_string(i) + "]";
        require(claims[i], p, "name");
        require(claims[i], p, "lhs");
        require(claims[i], p, "rhs");
        require(claims[i], p, "holds");
    }

    require(j, "", "reference");
    const auto& prov = require(j, "", "provenance");
    require(prov, "provenance", "seeds");
    require(prov, "provenance", "snr_db");
    require(prov, "provenance", "gan_steps");
    require(prov, "provenance", "gan_checkpoint_hash");
    require(prov, "provenance", "fingerprint");
}

// Re-derives the delta tables from the stored bia/mia numbers; exact
// equality guards against recomputation drift between table and source.
inline void check_traceability(const nlohmann::json& j) {
    const auto& metrics = j.at("metrics");
    const MetricTable bia = detail::table_from(metrics.at("bia"));
    for (const auto& [kind, t] : metrics.at("delta").items()) {
        const MetricTable mia =
            detail::table_from(metrics.at("mia").at(kind));
        const MetricTable delta = detail::table_from(t);
        double max_d = -2.0;
        for (const auto& [scenario, row] : delta.cells) {
            for (const auto& [family, d] : row) {
                const double expect =
                    bia.at(scenario, family) - mia.at(scenario, family);
                if (d != expect) {
                    throw SchemaError("report schema: metrics.delta." + kind +
                                      "." + scenario + "." + family +
                                      " drifts from bia - mia");
                }
                max_d = std::max(max_d, d);
            }
        }
        if (metrics.at("max_delta").at(kind).get<double>() != max_d) {
            throw SchemaError("report schema: metrics.max_delta." + kind +
                              " drifts from its cells");
        }
    }
}

// ---------------------------------------------------------------------------
// Chart rendering: minimal deterministic bar charts and one scatter plot.

namespace detail {

inline png::Rgb series_color(std::size_t i) {
    static const png::Rgb palette[] = {
        {66, 106, 235},  {235, 120, 66}, {66, 180, 120},
        {170, 80, 200},  {220, 70, 110}, {90, 90, 90},
    };
    return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

// groups: (group label, series values in series-label order)
inline png::Image bar_chart(
    const std::string& title, const std::vector<std::string>& series,
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    double vmin = 0.0, double vmax = 1.0) {
    const int bar_w = 26, gap = 10, group_gap = 26;
    const int group_w =
        static_cast<int>(series.size()) * (bar_w + gap) - gap + group_gap;
    const int left = 56, top = 40, plot_h = 200, bottom = 30;
    const int width =
        std::max(420, left + static_cast<int>(groups.size()) * group_w + 20);
    const int height = top + plot_h + bottom;

    png::Image img(width, height);
    const png::Rgb ink{40, 40, 40}, grid{210, 210, 210};
    img.text(left, 12, title, ink);

    auto y_of = [&](double v) {
        const double t = (v - vmin) / (vmax - vmin);
        return top + plot_h - static_cast<int>(std::lround(t * plot_h));
    };
    for (int i = 0; i <= 4; ++i) {
        const double v = vmin + (vmax - vmin) * i / 4.0;
        const int y = y_of(v);
        img.hline(left, width - 12, y, grid);
        char label[16];
        std::snprintf(label, sizeof(label), "%.2f", v);
        img.text(6, y - 3, label, ink);
    }
    if (vmin < 0.0 && vmax > 0.0) img.hline(left, width - 12, y_of(0.0), ink);

    int x = left + group_gap / 2;
    for (const auto& [label, values] : groups) {
        int bx = x;
        for (std::size_t s = 0; s < values.size(); ++s) {
            const int y0 = y_of(std::max(values[s], 0.0));
            const int y1 = y_of(std::min(values[s], 0.0));
            img.fill_rect(bx, y0, bar_w, std::max(1, y1 - y0),
                          series_color(s));
            bx += bar_w + gap;
        }
        img.text(x, top + plot_h + 8, label, ink);
        x += group_w;
    }
    int lx = left;
    for (std::size_t s = 0; s < series.size(); ++s) {
        img.fill_rect(lx, 24, 10, 8, series_color(s));
        img.text(lx + 14, 24, series[s], ink);
        lx += 14 + 6 * (static_cast<int>(series[s].size()) + 2);
    }
    img.vline(left - 2, top, top + plot_h, ink);
    img.hline(left - 2, width - 12, top + plot_h, ink);
    return img;
}

inline png::Image scatter_chart(const std::string& title,
                                const std::vector<RtmrPair>& pairs,
                                double coefficient) {
    const int left = 56, top = 40, plot_w = 320, plot_h = 200, bottom = 40;
    png::Image img(left + plot_w + 20, top + plot_h + bottom);
    const png::Rgb ink{40, 40, 40}, grid{210, 210, 210};
    img.text(left, 12, title, ink);
    char sub[48];
    std::snprintf(sub, sizeof(sub), "rank correlation = %+.3f", coefficient);
    img.text(left, 24, sub, ink);

    double xmin = pairs[0].randomness, xmax = xmin;
    double ymin = pairs[0].delta, ymax = ymin;
    for (const auto& p : pairs) {
        xmin = std::min(xmin, p.randomness);
        xmax = std::max(xmax, p.randomness);
        ymin = std::min(ymin, p.delta);
        ymax = std::max(ymax, p.delta);
    }
    const double xpad = (xmax - xmin) * 0.1 + 1e-3;
    const double ypad = (ymax - ymin) * 0.1 + 1e-3;
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    for (int i = 0; i <= 4; ++i) {
        const int y = top + plot_h * i / 4;
        img.hline(left, left + plot_w, y, grid);
    }
    img.vline(left, top, top + plot_h, ink);
    img.hline(left, left + plot_w, top + plot_h, ink);
    img.text(left + plot_w / 2 - 30, top + plot_h + 26, "randomness", ink);
    img.text(2, top - 14, "delta", ink);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int x = left + static_cast<int>(std::lround(
                                 (pairs[i].randomness - xmin) /
                                 (xmax - xmin) * plot_w));
        const int y = top + plot_h -
                      static_cast<int>(std::lround(
                          (pairs[i].delta - ymin) / (ymax - ymin) * plot_h));
        img.fill_rect(x - 2, y - 2, 5, 5, series_color(i % 2));
        img.text(x + 6, y - 3, pairs[i].label, ink);
    }
    return img;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Emission: one machine-readable data file plus chart images. The data file
// bytes are a pure function of the report contents.

inline std::vector<std::string> emit_report(const EvaluationReport& report,
                                            const std::string& out_dir) {
    const nlohmann::json j = to_json(report);
    validate_report_json(j);
    check_traceability(j);

    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    const std::string data_path =
        (std::filesystem::path(out_dir) / "report.json").string();
    {
        std::ofstream f(data_path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + data_path + " for writing");
        f << j.dump(2) << "\n";
        if (!f) throw IoError("short write to " + data_path);
    }
    written.push_back(data_path);

    const auto families = report.bia.accuracy.families();
    auto table_groups = [&](const MetricTable& t) {
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        for (const auto& [scenario, row] : t.cells) {
            std::vector<double> vals;
            for (const auto& f : families) vals.push_back(row.at(f));
            groups.emplace_back(scenario, vals);
        }
        return groups;
    };
    auto emit_chart = [&](const std::string& name, const png::Image& img) {
        const std::string path =
            (std::filesystem::path(out_dir) / name).string();
        png::write(img, path);
        written.push_back(path);
    };

    emit_chart("bia.png",
               detail::bar_chart("baseline inference accuracy", families,
                                 table_groups(report.bia.accuracy)));
    for (const auto& [kind, t] : report.mitigation.mia) {
        emit_chart("mia_" + kind + ".png",
                   detail::bar_chart("masked inference accuracy (+" + kind +
                                         ")",
                                     families, table_groups(t)));
    }
    for (const auto& [kind, t] : report.mitigation.delta) {
        emit_chart("delta_" + kind + ".png",
                   detail::bar_chart("mitigation delta (+" + kind + ")",
                                     families, table_groups(t), -0.25, 1.0));
    }
    if (!report.spf.values.empty()) {
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        for (const auto& [kind, v] : report.spf.values) {
            groups.emplace_back(kind, std::vector<double>{v});
        }
        emit_chart("spf.png",
                   detail::bar_chart("semantic preservation factor", {"spf"},
                                     groups));
    }
    if (!report.rtmr.pairs.empty()) {
        emit_chart("rtmr.png",
                   detail::scatter_chart("randomness vs mitigation",
                                         report.rtmr.pairs,
                                         report.rtmr.coefficient));
    }
    return written;
}

// Parses and validates an emitted report data file.
inline nlohmann::json load_report_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad report json: " + e.what());
    }
    validate_report_json(j);
    return j;
}

// Inverse of to_json for a validated document. Derived blocks (scenario
// list, reference constants, fingerprint) are regenerated on the next
// serialization, so a load/emit round trip reproduces the file.
inline EvaluationReport report_from_json(const nlohmann::json& j) {
    validate_report_json(j);
    EvaluationReport rep;
    try {
        rep.schema_version = j.at("schema_version").get<int>();
        const auto& metrics = j.at("metrics");
        rep.bia.accuracy = detail::table_from(metrics.at("bia"));
        rep.bia.best_family =
            metrics.at("bia_best_family")
                .get<std::map<std::string, std::string>>();
        rep.mitigation.bia = rep.bia.accuracy;
        for (const auto& [kind, t] : metrics.at("mia").items()) {
            rep.mitigation.mia[kind] = detail::table_from(t);
        }
        for (const auto& [kind, t] : metrics.at("delta").items()) {
            rep.mitigation.delta[kind] = detail::table_from(t);
        }
        rep.mitigation.max_delta =
            metrics.at("max_delta").get<std::map<std::string, double>>();
        if (metrics.contains("mia_by_snr")) {
            for (const auto& [kind, by_snr] :
                 metrics.at("mia_by_snr").items()) {
                for (const auto& [snr, t] : by_snr.items()) {
                    rep.mia_by_snr[kind][snr] = detail::table_from(t);
                }
            }
        }
        const auto& spf = metrics.at("spf");
        rep.spf.clean_accuracy = spf.at("clean_accuracy").get<double>();
        rep.spf.masked_accuracy =
            spf.at("masked_accuracy").get<std::map<std::string, double>>();
        rep.spf.values =
            spf.at("values").get<std::map<std::string, double>>();
        const auto& rtmr = metrics.at("rtmr");
        rep.rtmr.coefficient = rtmr.at("coefficient").get<double>();
        for (const auto& p : rtmr.at("pairs")) {
            rep.rtmr.pairs.push_back({p.at("label").get<std::string>(),
                                      p.at("randomness").get<double>(),
                                      p.at("delta").get<double>()});
        }
        for (const auto& [condition, s] : metrics.at("randomness").items()) {
            rep.randomness[condition] = {
                s.at("mean_ww_score").get<double>(),
                s.at("mean_cs_score").get<double>(),
                s.at("scored").get<std::size_t>(),
                s.at("skipped_degenerate").get<std::size_t>()};
        }
        for (const auto& c : j.at("claims")) {
            rep.claims.push_back({c.at("name").get<std::string>(),
                                  c.value("statement", ""),
                                  c.at("lhs").get<double>(),
                                  c.at("rhs").get<double>(),
                                  c.at("holds").get<bool>()});
        }
        const auto& prov = j.at("provenance");
        rep.provenance.seeds =
            prov.at("seeds").get<std::map<std::string, std::uint64_t>>();
        rep.provenance.snr_db = prov.at("snr_db").get<std::vector<double>>();
        rep.provenance.gan_steps = prov.at("gan_steps").get<int>();
        rep.provenance.gan_checkpoint_hash =
            prov.at("gan_checkpoint_hash").get<std::string>();
        rep.provenance.extra =
            prov.at("extra").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report schema: bad field type: ") +
                          e.what());
    }
    return rep;
}

}  // namespace soundmask::evaluation
