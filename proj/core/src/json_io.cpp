#include "superconc/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "superconc/errors.hpp"

namespace superconc {

namespace {

void dump(const json& v, int indent, int depth, std::string& out) {
    const auto newline = [&](int d) {
        if (indent <= 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                dump(it.value(), indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                dump(e, indent, depth + 1, out);
            }
            newline(depth);
            out += ']';
            return;
        }
        case json::value_t::number_float: out += format_double(v.get<double>()); return;
        default: out += v.dump(); return;
    }
}

[[noreturn]] void field_error(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

double number_field(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number()) field_error(where + "." + key, "expected a number");
    return v.get<double>();
}

template <class T>
json optional_value(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string dump_json(const json& value, int indent) {
    std::string out;
    dump(value, indent, 0, out);
    return out;
}

CovarianceModel model_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) field_error(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "kind" && it.key() != "params" && it.key() != "table")
            field_error(where + "." + it.key(), "unknown field");
    if (!j.contains("kind") || !j["kind"].is_string()) field_error(where + ".kind", "expected a string");
    CovarianceModel m;
    try {
        m.kind = covariance_kind_from_string(j["kind"].get<std::string>());
    } catch (const ConfigError& e) {
        field_error(where + ".kind", e.what());
    }
    if (j.contains("params")) {
        const auto& p = j["params"];
        if (!p.is_object()) field_error(where + ".params", "expected an object");
        static const std::set<std::string> known{"rate", "exponent", "lambda2", "scale", "power"};
        for (auto it = p.begin(); it != p.end(); ++it) {
            const std::string name = where + ".params." + it.key();
            if (!known.count(it.key())) field_error(name, "unknown parameter");
            if (!it.value().is_number()) field_error(name, "expected a number");
        }
        if (p.contains("rate")) m.rate = number_field(p, "rate", where + ".params");
        if (p.contains("exponent")) m.exponent = number_field(p, "exponent", where + ".params");
        if (p.contains("lambda2")) m.lambda2 = number_field(p, "lambda2", where + ".params");
        if (p.contains("scale")) m.scale = number_field(p, "scale", where + ".params");
        if (p.contains("power")) m.power = number_field(p, "power", where + ".params");
    }
    if (j.contains("table")) {
        const auto& t = j["table"];
        if (!t.is_array()) field_error(where + ".table", "expected an array of [lag, value] pairs");
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto& e = t[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                field_error(where + ".table[" + std::to_string(i) + "]", "expected [lag, value]");
            m.table.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
    }
    try {
        m.validate();
    } catch (const ConfigError& e) {
        field_error(where, e.what());
    }
    return m;
}

json model_to_json(const CovarianceModel& m) {
    json j;
    j["kind"] = std::string(to_string(m.kind));
    json p = json::object();
    switch (m.kind) {
        case CovarianceKind::iid: break;
        case CovarianceKind::ornstein_uhlenbeck:
            p["rate"] = m.rate;
            p["exponent"] = m.exponent;
            break;
        case CovarianceKind::gaussian_smooth: p["lambda2"] = m.lambda2; break;
        case CovarianceKind::power_decay:
        case CovarianceKind::log_decay:
            p["scale"] = m.scale;
            p["power"] = m.power;
            break;
        case CovarianceKind::table: {
            json t = json::array();
            for (const auto& [lag, v] : m.table) t.push_back({lag, v});
            j["table"] = t;
            break;
        }
    }
    j["params"] = p;
    return j;
}

json geometry_to_json(const GridGeometry& g) {
    json pts = json::array();
    for (int k = 0; k < g.dim; ++k) pts.push_back(g.points[static_cast<std::size_t>(k)]);
    return {{"dim", g.dim}, {"spacing", g.spacing}, {"points", pts}};
}

GridGeometry geometry_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) field_error(where, "expected an object");
    GridGeometry g;
    g.dim = j.at("dim").get<int>();
    if (g.dim < 1 || g.dim > 2) field_error(where + ".dim", "must be 1 or 2");
    g.spacing = number_field(j, "spacing", where);
    const auto& pts = j.at("points");
    if (!pts.is_array() || pts.size() != static_cast<std::size_t>(g.dim))
        field_error(where + ".points", "expected one node count per axis");
    for (int k = 0; k < g.dim; ++k) g.points[static_cast<std::size_t>(k)] = pts[static_cast<std::size_t>(k)].get<std::size_t>();
    return g;
}

ScanClass scan_class_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) field_error(where, "expected an object");
    if (!j.contains("n") || !j["n"].is_number_unsigned()) field_error(where + ".n", "expected a positive integer");
    if (!j.contains("sets") || !j["sets"].is_array()) field_error(where + ".sets", "expected an array of index arrays");
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t s = 0; s < j["sets"].size(); ++s) {
        const auto& e = j["sets"][s];
        if (!e.is_array()) field_error(where + ".sets[" + std::to_string(s) + "]", "expected an index array");
        std::vector<std::size_t> set;
        for (const auto& i : e) {
            if (!i.is_number_unsigned()) field_error(where + ".sets[" + std::to_string(s) + "]", "indices must be nonnegative integers");
            set.push_back(i.get<std::size_t>());
        }
        sets.push_back(std::move(set));
    }
    try {
        return ScanClass::from_sets(j["n"].get<std::size_t>(), std::move(sets));
    } catch (const DomainError& e) {
        field_error(where, e.what());
    }
}

json scan_class_to_json(const ScanClass& cls) {
    return {{"n", cls.n}, {"K", cls.K}, {"N", cls.N()}, {"sets", cls.sets}};
}

json to_json_value(const HypothesisReport& r) {
    return {{"nonincreasing", r.nonincreasing},
            {"nonincreasing_witness", optional_value(r.nonincreasing_witness)},
            {"phi1_lt_half", r.phi1_lt_half},
            {"phi1", r.phi1},
            {"berman_ok", r.berman_ok},
            {"berman_witness", r.berman_witness},
            {"berman_witness_t", r.berman_witness_t},
            {"berman_tolerance", r.berman_tolerance},
            {"probe_points", r.probe_grid.size()},
            {"probe_lo", r.probe_grid.empty() ? json(nullptr) : json(r.probe_grid.front())},
            {"probe_hi", r.probe_grid.empty() ? json(nullptr) : json(r.probe_grid.back())},
            {"skipped_points", r.skipped_points},
            {"details", r.details}};
}

json to_json_value(const ExtremeSummary& s, bool include_samples) {
    json q = json::object();
    for (std::size_t i = 0; i < s.quantiles.size(); ++i) {
        char key[32];
        std::snprintf(key, sizeof key, "%g", s.quantile_levels[i]);
        q[key] = s.quantiles[i];
    }
    json j{{"batch", s.batch()}, {"length", s.length}, {"mean", s.mean}, {"variance", s.variance}, {"quantiles", q}};
    if (include_samples) {
        j["maxima"] = s.maxima;
        j["argmax"] = s.argmax;
    }
    return j;
}

json to_json_value(const BoundReport& r) {
    return {{"pipeline", std::string(to_string(r.pipeline))},
            {"n", r.n},
            {"covering", std::string(to_string(r.covering_kind))},
            {"blocks", r.blocks},
            {"multiplicity", r.multiplicity},
            {"alpha", optional_value(r.alpha)},
            {"m", optional_value(r.m)},
            {"r0", r.r0},
            {"rho", finite_or_null(r.rho)},
            {"rho_source", std::string(to_string(r.rho_source))},
            {"rho_se", r.rho_se},
            {"rho_analytic", optional_value(r.rho_analytic)},
            {"delta", optional_value(r.delta)},
            {"epsilon", optional_value(r.epsilon)},
            {"eta", optional_value(r.eta)},
            {"c_sud", optional_value(r.c_sud)},
            {"K", finite_or_null(r.K)},
            {"K_display", optional_value(r.K_display)},
            {"usable", r.usable},
            {"c", optional_value(r.c)},
            {"covering_number", optional_value(r.covering_number)},
            {"s0", optional_value(r.s0)},
            {"c1", optional_value(r.c1)},
            {"c2", optional_value(r.c2)},
            {"fit_slope", optional_value(r.fit_slope)},
            {"exponent", optional_value(r.exponent)},
            {"net_size", optional_value(r.net_size)},
            {"notes", r.notes}};
}

json to_json_value(const VarianceEstimate& v) {
    return {{"variance", v.variance}, {"se", v.se}, {"mean", v.mean}, {"mean_se", v.mean_se}, {"batch", v.batch}};
}

json to_json_value(const TailFit& f) {
    return {{"ok", f.ok},
            {"c", f.c},
            {"intercept", f.intercept},
            {"r2", f.r2},
            {"points", f.points},
            {"slope_ratio", finite_or_null(f.slope_ratio)},
            {"gaussian_rate", f.gaussian_rate},
            {"gaussian_r2", f.gaussian_r2},
            {"range", {f.range_lo, f.range_hi}},
            {"reason", f.reason}};
}

json to_json_value(const LaplaceCheck& c) {
    json pts = json::array();
    for (const auto& p : c.points)
        pts.push_back({{"theta", p.theta}, {"margin", finite_or_null(p.margin)}, {"se", p.se}, {"finite", p.finite}});
    return {{"K", c.K},
            {"theta_max", c.theta_max},
            {"C_hat", finite_or_null(c.C_hat)},
            {"C_hat_se", c.C_hat_se},
            {"C_hat_theta", c.C_hat_theta},
            {"all_finite", c.all_finite},
            {"samples", c.samples},
            {"points", pts}};
}

json to_json_value(const RiskReport& r) {
    return {{"mu", r.mu},
            {"delta", r.delta},
            {"threshold", r.threshold ? json(std::string(to_string(*r.threshold))) : json(nullptr)},
            {"c_used", optional_value(r.c_used)},
            {"e0max", r.e0max},
            {"e0_se", r.e0_se},
            {"tau", r.tau},
            {"type1", r.type1},
            {"type1_se", r.type1_se},
            {"type2", r.type2},
            {"type2_se", r.type2_se},
            {"risk", r.risk},
            {"risk_se", r.risk_se},
            {"trials", r.trials},
            {"sets_evaluated", r.sets_evaluated},
            {"subsampled", r.subsampled},
            {"warnings", r.warnings}};
}

json to_json_value(const SignVectorResult& r) {
    return {{"found", r.vectors.size()},
            {"tries", r.tries},
            {"saturated", r.saturated},
            {"acceptance_rate", r.acceptance_rate},
            {"comparisons", r.comparisons},
            {"passed_comparisons", r.passed_comparisons},
            {"pairwise_pass_rate", r.pairwise_pass_rate},
            {"threshold", r.threshold}};
}

json to_json_value(const CoveringCheck& c) {
    json pair = c.violating_pair ? json{c.violating_pair->first, c.violating_pair->second} : json(nullptr);
    return {{"ok", c.ok},
            {"violating_pair", pair},
            {"violating_index", optional_value(c.violating_index)},
            {"observed_multiplicity", c.observed_multiplicity},
            {"reason", c.reason}};
}

}  // namespace superconc
