#pragma once

#include "drmdp/experiments.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace drmdp {

using json = nlohmann::json;

/// Number formatting shared by all text output: 12 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// A model file: the MDP plus the optional disturbance law stored with it.
struct ModelDocument {
    MdpModel model;
    std::optional<Distribution> true_dist;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline const json& field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) throw ValidationError(std::string("model file: missing field '") + name + "'");
    return *it;
}

inline std::vector<std::string> labels(const json& doc, const char* name) {
    const json& arr = field(doc, name);
    if (!arr.is_array() || arr.empty())
        throw ValidationError(std::string("model file: field '") + name + "' must be a nonempty array");
    std::vector<std::string> out;
    for (const auto& v : arr) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return out;
}

inline std::size_t index_in(const json& v, std::size_t bound, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0 || static_cast<std::size_t>(v.get<long long>()) >= bound)
        throw ValidationError("model file: " + where + " has index " + v.dump() + " outside [0, " +
                              std::to_string(bound) + ")");
    return static_cast<std::size_t>(v.get<long long>());
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ValidationError("model file: " + where + " must be a number, got " + v.dump());
    return v.get<double>();
}

inline SquareMatrix matrix(const json& v, std::size_t n, const char* name) {
    if (!v.is_array() || v.size() != n)
        throw ValidationError(std::string("model file: field '") + name + "' must be a " + std::to_string(n) + "x" +
                              std::to_string(n) + " matrix");
    std::vector<numvec> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (!v[i].is_array() || v[i].size() != n)
            throw ValidationError(std::string("model file: field '") + name + "' row " + std::to_string(i) +
                                  " must have " + std::to_string(n) + " entries");
        numvec row;
        for (std::size_t j = 0; j < n; ++j)
            row.push_back(number(v[i][j], std::string(name) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
        rows.push_back(std::move(row));
    }
    return SquareMatrix::from_rows(rows);
}

inline numvec number_list(const json& v, const std::string& name) {
    if (!v.is_array()) throw ValidationError("field '" + name + "' must be an array of numbers");
    numvec out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], name + "[" + std::to_string(i) + "]"));
    return out;
}

inline json matrix_json(const SquareMatrix& m) {
    json rows = json::array();
    for (const auto& r : m.rows()) rows.push_back(r);
    return rows;
}

} // namespace detail

/// Parses and validates a model document from JSON text.
inline ModelDocument parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("model file: parse error at line " + std::to_string(detail::line_of_offset(text, e.byte)) +
                              ": " + e.what());
    }
    if (!doc.is_object()) throw ValidationError("model file: top level must be an object");

    const double discount = detail::number(detail::field(doc, "discount"), "field 'discount'");
    MdpModel m(detail::labels(doc, "states"), detail::labels(doc, "actions"), detail::labels(doc, "disturbances"),
               discount);
    const std::size_t nx = m.num_states(), na = m.num_actions(), nw = m.num_disturbances();

    const json& adm = detail::field(doc, "admissible");
    if (!adm.is_array() || adm.size() != nx)
        throw ValidationError("model file: field 'admissible' must list one action set per state");
    for (std::size_t x = 0; x < nx; ++x) {
        if (!adm[x].is_array()) throw ValidationError("model file: admissible[" + std::to_string(x) + "] must be an array");
        indvec acts;
        for (const auto& a : adm[x]) acts.push_back(detail::index_in(a, na, "admissible[" + std::to_string(x) + "]"));
        std::sort(acts.begin(), acts.end());
        if (std::adjacent_find(acts.begin(), acts.end()) != acts.end())
            throw ValidationError("model file: admissible[" + std::to_string(x) + "] repeats an action");
        m.set_admissible(x, std::move(acts));
    }

    m.set_w_metric(detail::matrix(detail::field(doc, "w_metric"), nw, "w_metric"));
    if (auto it = doc.find("x_metric"); it != doc.end() && !it->is_null())
        m.set_x_metric(detail::matrix(*it, nx, "x_metric"));

    std::vector<char> seen_t(nx * na * nw, 0), seen_c(nx * na * nw, 0);
    numvec costs(nx * na * nw, 0.0);
    const json& costs_json = detail::field(doc, "costs");
    if (!costs_json.is_array()) throw ValidationError("model file: field 'costs' must be an array");
    for (std::size_t k = 0; k < costs_json.size(); ++k) {
        const json& e = costs_json[k];
        const std::string where = "costs[" + std::to_string(k) + "]";
        if (!e.is_array() || e.size() != 4) throw ValidationError("model file: " + where + " must be [x, a, w, c]");
        const std::size_t x = detail::index_in(e[0], nx, where), a = detail::index_in(e[1], na, where),
                          w = detail::index_in(e[2], nw, where);
        if (!m.is_admissible(x, a)) throw ValidationError("model file: " + where + " refers to an inadmissible action");
        if (seen_c[m.index(x, a, w)]++) throw ValidationError("model file: " + where + " duplicates an entry");
        costs[m.index(x, a, w)] = detail::number(e[3], where);
    }
    const json& trans = detail::field(doc, "transitions");
    if (!trans.is_array()) throw ValidationError("model file: field 'transitions' must be an array");
    for (std::size_t k = 0; k < trans.size(); ++k) {
        const json& e = trans[k];
        const std::string where = "transitions[" + std::to_string(k) + "]";
        if (!e.is_array() || e.size() != 4) throw ValidationError("model file: " + where + " must be [x, a, w, x']");
        const std::size_t x = detail::index_in(e[0], nx, where), a = detail::index_in(e[1], na, where),
                          w = detail::index_in(e[2], nw, where), y = detail::index_in(e[3], nx, where);
        if (!m.is_admissible(x, a)) throw ValidationError("model file: " + where + " refers to an inadmissible action");
        if (seen_t[m.index(x, a, w)]++) throw ValidationError("model file: " + where + " duplicates an entry");
        m.set_transition(x, a, w, y, 0.0);
    }
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t a : m.admissible(x))
            for (std::size_t w = 0; w < nw; ++w) {
                const std::size_t i = m.index(x, a, w);
                const std::string at = "(" + std::to_string(x) + "," + std::to_string(a) + "," + std::to_string(w) + ")";
                if (!seen_t[i]) throw ValidationError("model file: missing transition for " + at);
                if (!seen_c[i]) throw ValidationError("model file: missing cost for " + at);
                m.set_transition(x, a, w, m.next(x, a, w), costs[i]);
            }
    require_valid(m);

    ModelDocument out{std::move(m), std::nullopt};
    if (auto it = doc.find("true_dist"); it != doc.end() && !it->is_null()) {
        numvec mass = detail::number_list(*it, "true_dist");
        if (mass.size() != nw) throw ValidationError("model file: true_dist must have one entry per disturbance");
        out.true_dist = Distribution(std::move(mass));
    }
    return out;
}

inline ModelDocument load_model_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_model(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline MdpModel load_model(const std::string& path) { return load_model_document(path).model; }

inline json model_to_json(const MdpModel& m, const std::optional<Distribution>& true_dist = std::nullopt) {
    json doc;
    doc["states"] = m.states();
    doc["actions"] = m.actions();
    json adm = json::array();
    for (std::size_t x = 0; x < m.num_states(); ++x) adm.push_back(m.admissible(x));
    doc["admissible"] = adm;
    doc["disturbances"] = m.disturbances();
    doc["w_metric"] = detail::matrix_json(m.w_metric());
    if (m.x_metric()) doc["x_metric"] = detail::matrix_json(*m.x_metric());
    json trans = json::array(), costs = json::array();
    for (std::size_t x = 0; x < m.num_states(); ++x)
        for (std::size_t a : m.admissible(x))
            for (std::size_t w = 0; w < m.num_disturbances(); ++w) {
                trans.push_back({x, a, w, m.next(x, a, w)});
                costs.push_back({x, a, w, m.cost(x, a, w)});
            }
    doc["transitions"] = trans;
    doc["costs"] = costs;
    doc["discount"] = m.discount();
    if (true_dist) doc["true_dist"] = true_dist->mass();
    return doc;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

inline void save_model(const std::string& path, const MdpModel& m,
                       const std::optional<Distribution>& true_dist = std::nullopt) {
    write_text(path, model_to_json(m, true_dist).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reports.

inline constexpr const char* kCsvHeader =
    "trial,N,epsilon,dist_mu_muhat,premise,coverage_ok,sup_gap_robust,sup_gap_oos,wall_ms";

inline std::string report_csv(const ExperimentReport& r) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& t : r.records) {
        out += std::to_string(t.trial) + "," + std::to_string(t.n) + "," + format_number(t.epsilon) + "," +
               format_number(t.dist_mu_muhat) + "," + (t.premise ? "1" : "0") + "," + (t.coverage_ok ? "1" : "0") +
               "," + format_number(t.sup_gap_robust) + "," + format_number(t.sup_gap_oos) + "," +
               format_number(t.wall_ms) + "\n";
    }
    return out;
}

namespace detail {

// JSON has no infinity; non-finite numbers are written as strings.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

} // namespace detail

inline json report_json(const ExperimentReport& r) {
    json doc;
    doc["experiment"] = r.experiment;
    doc["config"] = {{"distance", std::string(to_string(r.kind))},
                     {"radius_mode", std::string(to_string(r.radius_mode))},
                     {"gamma", r.gamma},
                     {"seed", r.seed},
                     {"trials", r.trials_per_stage}};
    json stages = json::array();
    for (const auto& s : r.stages)
        stages.push_back({{"N", s.n},
                          {"trials", s.trials},
                          {"epsilon", detail::num(s.epsilon)},
                          {"coverage", s.coverage},
                          {"premise_rate", s.premise_rate},
                          {"implication_violations", s.implication_violations},
                          {"bound_violations", s.bound_violations},
                          {"median_gap_robust", s.median_gap_robust},
                          {"median_gap_oos", s.median_gap_oos},
                          {"mean_gap_robust", s.mean_gap_robust},
                          {"mean_gap_oos", s.mean_gap_oos},
                          {"max_gap_robust", s.max_gap_robust},
                          {"max_gap_oos", s.max_gap_oos}});
    doc["stages"] = stages;
    doc["implication_violations"] = r.implication_violations;
    doc["bound_violations"] = r.bound_violations;
    doc["robust_gap_decreases"] = r.robust_gap_decreases;
    doc["oos_gap_decreases"] = r.oos_gap_decreases;
    if (r.delta) doc["delta"] = *r.delta;
    if (r.beta_gap) doc["beta_gap"] = *r.beta_gap;
    json records = json::array();
    for (const auto& t : r.records) {
        json rec = {{"trial", t.trial},
                    {"N", t.n},
                    {"epsilon", detail::num(t.epsilon)},
                    {"dist_mu_muhat", detail::num(t.dist_mu_muhat)},
                    {"premise", t.premise},
                    {"coverage_ok", t.coverage_ok},
                    {"sup_gap_robust", t.sup_gap_robust},
                    {"sup_gap_oos", t.sup_gap_oos},
                    {"counts", t.counts},
                    {"wall_ms", t.wall_ms}};
        if (!std::isnan(t.bound)) {
            rec["bound"] = detail::num(t.bound);
            rec["bound_ok"] = t.bound_ok;
        }
        records.push_back(std::move(rec));
    }
    doc["records"] = records;
    doc["total_wall_ms"] = r.total_wall_ms;
    return doc;
}

/// Writes PREFIX.json and PREFIX.csv.
inline void write_report(const std::string& prefix, const ExperimentReport& r) {
    write_text(prefix + ".json", report_json(r).dump(2) + "\n");
    write_text(prefix + ".csv", report_csv(r));
}

} // namespace drmdp
