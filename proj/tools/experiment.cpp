#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "superconc/batch_io.hpp"
#include "superconc/errors.hpp"
#include "superconc/extremes.hpp"
#include "superconc/rng.hpp"

namespace superconc::cli {

namespace {

constexpr std::string_view kKindNames[] = {"gumbel_convergence", "variance_scaling", "tail_bounds",
                                           "laplace_check",      "field_bound",      "scan_risk",
                                           "sign_vectors",       "verify",           "sample",
                                           "bound"};

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ConfigError("config." + field + ": " + what);
}

double get_double(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) field_error(key, "expected a number");
    return j.at(key).get<double>();
}

// Optional fields accept null, as written by config_to_json.
std::optional<double> get_optional_double(const json& j, const std::string& key) {
    if (j.at(key).is_null()) return std::nullopt;
    return get_double(j, key);
}

std::size_t get_size(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
        field_error(key, "expected a nonnegative integer");
    return j.at(key).get<std::size_t>();
}

std::string get_string(const json& j, const std::string& key) {
    if (!j.at(key).is_string()) field_error(key, "expected a string");
    return j.at(key).get<std::string>();
}

std::vector<double> get_doubles(const json& j, const std::string& key) {
    const auto& a = j.at(key);
    if (!a.is_array()) field_error(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : a) {
        if (!v.is_number()) field_error(key, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::size_t> get_sizes(const json& j, const std::string& key) {
    const auto& a = j.at(key);
    if (!a.is_array()) field_error(key, "expected an array of nonnegative integers");
    std::vector<std::size_t> out;
    for (const auto& v : a) {
        if (!v.is_number_unsigned()) field_error(key, "expected an array of nonnegative integers");
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

template <class F>
auto rethrow_as_field(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        field_error(field, e.what());
    }
}

std::string_view pipeline_name(Pipeline p) {
    switch (p) {
        case Pipeline::sequence: return "sequence";
        case Pipeline::field: return "field";
        case Pipeline::correlated: return "correlated";
    }
    return "sequence";
}

Pipeline pipeline_from_string(std::string_view s) {
    if (s == "sequence") return Pipeline::sequence;
    if (s == "field") return Pipeline::field;
    if (s == "correlated") return Pipeline::correlated;
    throw ConfigError("unknown pipeline '" + std::string(s) + "' (expected sequence, field or correlated)");
}

RhoSource rho_source_from_string(std::string_view s) {
    if (s == "analytic") return RhoSource::analytic;
    if (s == "monte_carlo" || s == "mc") return RhoSource::monte_carlo;
    throw ConfigError("unknown rho source '" + std::string(s) + "' (expected analytic or monte_carlo)");
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// CSV output with the same 17-digit formatting as the JSON files.
class Csv {
public:
    Csv(const std::filesystem::path& path, std::initializer_list<std::string_view> header) : out_(path) {
        if (!out_) throw Error("cannot open " + path.string() + " for writing");
        bool first = true;
        for (auto h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    Csv& cell(double v) {
        sep();
        if (std::isnan(v))
            out_ << "nan";
        else if (std::isinf(v))
            out_ << (v > 0 ? "inf" : "-inf");
        else
            out_ << format_double(v);
        return *this;
    }
    Csv& cell(std::size_t v) {
        sep();
        out_ << v;
        return *this;
    }
    Csv& cell(int v) {
        sep();
        out_ << v;
        return *this;
    }
    Csv& cell(bool v) {
        sep();
        out_ << (v ? "true" : "false");
        return *this;
    }
    Csv& cell(std::string_view v) {
        sep();
        out_ << v;
        return *this;
    }
    void end() {
        out_ << '\n';
        fresh_ = true;
    }

private:
    void sep() {
        if (!fresh_) out_ << ',';
        fresh_ = false;
    }
    std::ofstream out_;
    bool fresh_ = true;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text << '\n';
}

struct Context {
    const ExperimentConfig& cfg;
    std::ostream* progress;
    std::vector<std::string> files;

    std::filesystem::path file(const std::string& name) {
        files.push_back(name);
        return cfg.out / name;
    }
    void note(const std::string& line) const {
        if (progress) *progress << "[superconc] " << line << std::endl;
    }
};

std::uint64_t cell_seed(const ExperimentConfig& cfg, std::size_t cell) { return derive_seed(cfg.seed, cell); }

ExtremeSummary simulate_cell(const ExperimentConfig& cfg, std::size_t n, std::size_t cell) {
    const PathGenerator gen(cfg.model, GridGeometry::sequence(n), cfg.method, cell_seed(cfg, cell));
    return simulate_extremes(gen, cfg.batch, 0, cfg.jobs);
}

// Gumbel convergence.

json run_gumbel(Context& ctx) {
    const auto& cfg = ctx.cfg;
    Csv csv(ctx.file("gumbel.csv"), {"n", "ks", "centering_gap", "a_n", "b_n", "mean", "variance"});
    json cells = json::array();
    std::vector<double> ks;
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
        const std::size_t n = cfg.sizes[i];
        ctx.note("gumbel_convergence n=" + std::to_string(n));
        const auto ex = simulate_cell(cfg, n, i);
        const auto nc = norm_constants(static_cast<double>(n));
        const double d = ks_to_gumbel(ex.maxima, static_cast<double>(n));
        const double gap = centering_gap(ex.maxima, static_cast<double>(n));
        ks.push_back(d);
        csv.cell(n).cell(d).cell(gap).cell(nc.a_n).cell(nc.b_n).cell(ex.mean).cell(ex.variance).end();
        cells.push_back({{"n", n}, {"ks", d}, {"centering_gap", gap}, {"a_n", nc.a_n}, {"b_n", nc.b_n},
                         {"summary", to_json_value(ex)}});
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < ks.size(); ++i) decreasing = decreasing && ks[i] < ks[i - 1];
    return {{"cells", cells}, {"invariants", {{"ks_strictly_decreasing", decreasing}}}};
}

// Variance, tail and Laplace checks on the maxima of each size.

struct VerifyOutputs {
    bool variance = false;
    bool tail = false;
    bool laplace = false;
};

json run_verify_family(Context& ctx, VerifyOutputs which) {
    const auto& cfg = ctx.cfg;
    std::optional<Csv> var_csv, tail_csv, lap_csv;
    if (which.variance) var_csv.emplace(ctx.file("variance.csv"), std::initializer_list<std::string_view>{
                                                                       "n", "var", "se", "var_times_logn", "mean", "mean_se"});
    if (which.tail)
        tail_csv.emplace(ctx.file("tail.csv"),
                         std::initializer_list<std::string_view>{"n", "t", "survival", "lower", "upper", "low_resolution",
                                                                 "bound_fitted", "gaussian_bound"});
    if (which.laplace)
        lap_csv.emplace(ctx.file("laplace.csv"), std::initializer_list<std::string_view>{
                                                     "n", "theta", "margin", "se", "finite", "var_half", "mean_exp"});

    const int C_cov = cfg.model.kind == CovarianceKind::iid ? 1 : 3;
    json cells = json::array();
    std::vector<double> scaled, scaled_se;
    bool var_band = true, tail_ok = true, laplace_ok = true;
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
        const std::size_t n = cfg.sizes[i];
        ctx.note(std::string(which.variance && !which.tail && !which.laplace ? "variance_scaling" : "verify") +
                 " n=" + std::to_string(n) + " batch=" + std::to_string(cfg.batch));
        const auto ex = simulate_cell(cfg, n, i);
        json cell{{"n", n}};

        if (which.variance) {
            const auto v = estimate_var_max(ex.maxima);
            const double logn = std::log(static_cast<double>(n));
            const double vl = v.variance * logn;
            var_csv->cell(n).cell(v.variance).cell(v.se).cell(vl).cell(v.mean).cell(v.mean_se).end();
            cell["variance"] = to_json_value(v);
            cell["var_times_logn"] = vl;
            if (n >= 2) {
                scaled.push_back(vl);
                scaled_se.push_back(v.se * logn);
                var_band = var_band && vl >= 0.4 && vl <= 2.5;
            }
        }

        if (!(which.tail || which.laplace)) {
            cells.push_back(cell);
            continue;
        }
        const double K = display_scale(cfg.model, static_cast<double>(n), cfg.alpha);
        cell["K"] = K;

        if (which.tail) {
            const auto grid = cfg.t_grid.empty() ? tail_grid(ex.maxima, cfg.t_points) : cfg.t_grid;
            auto tail = estimate_tail(ex.maxima, static_cast<double>(n), cfg.center, grid);
            const auto fit = fit_tail_rate(tail, K);
            attach_fit(tail, fit);
            bool nonincreasing = true, banded = true, dominated = fit.c > 0.0;
            for (std::size_t k = 0; k < tail.t.size(); ++k) {
                const double bound = fit.c > 0.0 ? tail_bound(K, fit.c, tail.t[k]) : std::nan("");
                if (k > 0 && tail.survival[k] > tail.survival[k - 1]) nonincreasing = false;
                if (tail.lower[k] > tail.survival[k] || tail.upper[k] < tail.survival[k]) banded = false;
                if (fit.c > 0.0 && tail.survival[k] > bound) dominated = false;
                tail_csv->cell(n)
                    .cell(tail.t[k])
                    .cell(tail.survival[k])
                    .cell(tail.lower[k])
                    .cell(tail.upper[k])
                    .cell(static_cast<bool>(tail.low_resolution[k]))
                    .cell(bound)
                    .cell(gaussian_tail_bound(tail.t[k]))
                    .end();
            }
            json crossing = nullptr;
            if (fit.c > 0.0)
                if (const auto x = tail_crossover(K, fit.c)) crossing = {{"lo", x->lo}, {"hi", x->hi}};
            tail_ok = tail_ok && nonincreasing && banded && fit.ok && dominated;
            cell["tail"] = {{"center", std::string(to_string(cfg.center))},
                            {"center_value", tail.center_value},
                            {"c_hat", fit.c},
                            {"fit", to_json_value(fit)},
                            {"crossover", crossing},
                            {"invariants",
                             {{"survival_nonincreasing", nonincreasing},
                              {"bands_contain_estimate", banded},
                              {"exponential_fit", fit.ok},
                              {"fitted_bound_dominates", dominated}}}};
        }

        if (which.laplace) {
            const auto check = laplace_check(ex.maxima, K, cfg.theta_points);
            bool within = check.all_finite;
            for (const auto& p : check.points) {
                within = within && p.finite && p.margin <= C_cov + 5.0 * p.se;
                lap_csv->cell(n)
                    .cell(p.theta)
                    .cell(p.margin)
                    .cell(p.se)
                    .cell(p.finite)
                    .cell(p.var_half)
                    .cell(p.mean_exp)
                    .end();
            }
            laplace_ok = laplace_ok && within;
            cell["laplace"] = {{"C_hat", check.C_hat},
                               {"C_hat_se", check.C_hat_se},
                               {"C_hat_theta", check.C_hat_theta},
                               {"C_covering", C_cov},
                               {"theta_max", check.theta_max},
                               {"invariants", {{"margins_within_C_plus_5se", within}, {"all_finite", check.all_finite}}}};
        }
        cells.push_back(cell);
    }

    json inv = json::object();
    if (which.variance) {
        bool mono = true;
        for (std::size_t k = 2; k < scaled.size(); ++k)
            mono = mono && scaled[k] <= scaled[k - 1] + 2.0 * std::hypot(scaled_se[k], scaled_se[k - 1]);
        inv["var_times_logn_in_0.4_2.5"] = var_band;
        inv["var_times_logn_nonincreasing_after_first_within_2se"] = mono;
    }
    if (which.tail) inv["tail"] = tail_ok;
    if (which.laplace) inv["laplace"] = laplace_ok;
    return {{"cells", cells}, {"invariants", inv}};
}

// Bounds.

json run_field(Context& ctx) {
    const auto& cfg = ctx.cfg;
    ctx.note("field_bound d=" + std::to_string(cfg.dim) + " batch=" + std::to_string(cfg.batch));
    FieldBoundOptions opts;
    opts.exponent_ratio = cfg.exponent_ratio;
    opts.spacing = cfg.spacing;
    opts.batch = cfg.batch;
    opts.scales = cfg.scales;
    opts.seed = cell_seed(cfg, 0);
    opts.method = cfg.method;
    opts.jobs = cfg.jobs;
    const auto r = field_bound(cfg.model, cfg.dim, cfg.extent, opts);

    const auto pts = GridGeometry::box(cfg.dim, cfg.extent, cfg.spacing).coordinates();
    const auto net = greedy_net(pts, *r.s0);
    const auto nc = verify_net(pts, net, *r.s0);
    const double formula = field_scale(cfg.model, *r.covering_number, *r.exponent);

    Csv csv(ctx.file("field.csv"), {"covering_number", "s0", "exponent", "c1", "c2", "fit_slope", "K", "rho", "rho_se",
                                    "net_size", "multiplicity"});
    csv.cell(*r.covering_number)
        .cell(*r.s0)
        .cell(*r.exponent)
        .cell(r.c1.value_or(std::nan("")))
        .cell(r.c2.value_or(std::nan("")))
        .cell(r.fit_slope.value_or(std::nan("")))
        .cell(r.K)
        .cell(r.rho)
        .cell(r.rho_se)
        .cell(r.net_size.value_or(0))
        .cell(r.multiplicity)
        .end();
    return {{"report", to_json_value(r)},
            {"net", {{"separated", nc.separated}, {"maximal", nc.maximal}, {"min_separation", nc.min_separation},
                     {"max_gap", nc.max_gap}}},
            {"invariants",
             {{"net_separated", nc.separated},
              {"net_maximal", nc.maximal},
              {"c1_le_c2", r.c1 && r.c2 && *r.c1 <= *r.c2},
              {"K_matches_formula", r.K == formula}}}};
}

json run_bound(Context& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.pipeline == Pipeline::field) return run_field(ctx);

    Csv csv(ctx.file("bound.csv"),
            {"n", "alpha", "m", "r0", "rho", "rho_se", "rho_analytic", "K", "K_display", "usable"});
    std::optional<Csv> curve;
    if (cfg.c) curve.emplace(ctx.file("tail_curve.csv"), std::initializer_list<std::string_view>{"n", "t", "bound", "gaussian_bound"});
    std::vector<double> grid = cfg.t_grid;
    if (grid.empty())
        for (int k = 0; k <= 100; ++k) grid.push_back(0.1 * k);

    json reports = json::array();
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
        const std::size_t n = cfg.sizes[i];
        ctx.note(std::string(pipeline_name(cfg.pipeline)) + " bound n=" + std::to_string(n));
        BoundReport r;
        if (cfg.pipeline == Pipeline::correlated) {
            if (cfg.model.kind != CovarianceKind::iid) {
                const auto gram = gram_matrix(cfg.model, n);
                r = correlated_bound(cfg.epsilon, n, &gram);
            } else {
                r = correlated_bound(cfg.epsilon, n);
            }
            r.c = cfg.c;
        } else {
            SequenceBoundOptions o;
            o.rho_source = cfg.rho_source;
            o.c_sud = cfg.c_sud;
            o.c = cfg.c;
            o.batch = cfg.batch;
            o.seed = cell_seed(cfg, i);
            o.method = cfg.method;
            o.jobs = cfg.jobs;
            r = sequence_bound(cfg.model, n, cfg.alpha, o);
        }
        csv.cell(n)
            .cell(r.alpha.value_or(std::nan("")))
            .cell(r.m.value_or(0))
            .cell(r.r0)
            .cell(r.rho)
            .cell(r.rho_se)
            .cell(r.rho_analytic.value_or(std::nan("")))
            .cell(r.K)
            .cell(r.K_display.value_or(std::nan("")))
            .cell(r.usable)
            .end();
        json j = to_json_value(r);
        if (cfg.c && r.usable) {
            const auto b = tail_curve(r.K, *cfg.c, grid);
            const auto g = gaussian_tail_curve(grid);
            for (std::size_t k = 0; k < grid.size(); ++k) curve->cell(n).cell(grid[k]).cell(b[k]).cell(g[k]).end();
            const auto x = tail_crossover(r.K, *cfg.c);
            j["crossover"] = x ? json{{"lo", x->lo}, {"hi", x->hi}} : json(nullptr);
        }
        reports.push_back(j);
    }
    return {{"reports", reports}};
}

// Scan test.

std::vector<double> default_deltas(std::size_t N) {
    std::vector<double> d{1e-3, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    if (N >= 2) {
        d.push_back(std::exp(-static_cast<double>(N)));
        d.push_back(1.0 / std::log(static_cast<double>(N)));
    }
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
}

json run_scan(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const ScanClass cls = cfg.scan_class ? *cfg.scan_class : parse_generator(cfg.generator);
    ctx.note("scan_risk n=" + std::to_string(cls.n) + " N=" + std::to_string(cls.N()) + " K=" + std::to_string(cls.K) +
             " trials=" + std::to_string(cfg.trials));
    RiskOptions ro;
    ro.trials = cfg.trials;
    ro.seed = cfg.seed;
    ro.jobs = cfg.jobs;
    const auto e0 = estimate_E0max(cls, cfg.trials, cfg.seed, cfg.jobs);

    std::optional<double> c = cfg.c;
    json calibration = nullptr;
    if (!c && cls.N() >= 2) {
        const auto cal = calibrate_scan_c(cls, cfg.trials, cfg.seed, cfg.jobs);
        c = cal.c;
        calibration = {{"c", cal.c}, {"K_fit", cal.K_fit}, {"fit", to_json_value(cal.fit)}};
    }

    RiskReport risk = cfg.mu ? estimate_risk(cls, *cfg.mu, cfg.delta, ro)
                             : estimate_risk_at_threshold(cls, cfg.threshold, cfg.delta, c, ro);
    json table = json::array();
    json ordering = json::object();
    if (cls.N() >= 2 && c) {
        const auto deltas = cfg.deltas.empty() ? default_deltas(cls.N()) : cfg.deltas;
        const double K = static_cast<double>(cls.K), N = static_cast<double>(cls.N());
        Csv csv(ctx.file("thresholds.csv"), {"delta", "prop51", "prop52"});
        for (const auto& row : threshold_table(K, N, e0.mean, *c, deltas)) {
            csv.cell(row.delta).cell(row.prop51.value_or(std::nan(""))).cell(row.prop52).end();
            table.push_back({{"delta", row.delta}, {"prop51", opt(row.prop51)}, {"prop52", row.prop52}});
        }
        const double d_log = 1.0 / std::log(N), d_exp = std::exp(-N);
        ordering["prop52_below_prop51_at_inverse_log_N"] =
            d_log <= 2.0 && threshold_prop52(K, N, d_log, *c, e0.mean) < threshold_prop51(K, d_log, e0.mean);
        ordering["prop51_below_prop52_at_exp_minus_N"] =
            threshold_prop51(K, d_exp, e0.mean) < threshold_prop52(K, N, d_exp, *c, e0.mean);
    }
    return {{"class", {{"n", cls.n}, {"K", cls.K}, {"N", cls.N()}}},
            {"e0max", {{"mean", e0.mean}, {"se", e0.se}, {"trials", e0.trials}}},
            {"calibration", calibration},
            {"c", opt(c)},
            {"risk", to_json_value(risk)},
            {"risk_within_delta_3se", risk.risk <= cfg.delta + 3.0 * risk.risk_se},
            {"threshold_table", table},
            {"ordering", ordering}};
}

json run_sign(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const std::size_t n = cfg.sizes.front();
    const double thr = cfg.sign_threshold.value_or(default_sign_threshold(n));
    ctx.note("sign_vectors n=" + std::to_string(n) + " count=" + std::to_string(cfg.count));
    const auto res = find_sign_vectors(n, cfg.count, thr, cfg.seed, cfg.max_tries);
    const bool verified = verify_sign_vectors(res.vectors, thr);
    const double p = sign_pair_pass_probability(n, thr);
    Csv csv(ctx.file("sign_vectors.csv"), {"n", "count", "threshold", "found", "tries", "saturated", "acceptance_rate",
                                           "pairwise_pass_rate", "pass_probability", "verified"});
    csv.cell(n)
        .cell(cfg.count)
        .cell(thr)
        .cell(res.vectors.size())
        .cell(res.tries)
        .cell(res.saturated)
        .cell(res.acceptance_rate)
        .cell(res.pairwise_pass_rate)
        .cell(p)
        .cell(verified)
        .end();
    json j = to_json_value(res);
    j["n"] = n;
    j["pass_probability"] = p;
    j["verified"] = verified;
    return j;
}

json run_sample(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const GridGeometry g = cfg.grid ? GridGeometry::box(cfg.dim, cfg.extent, cfg.spacing)
                                    : GridGeometry::sequence(cfg.sizes.front());
    ctx.note("sample points=" + std::to_string(g.size()) + " batch=" + std::to_string(cfg.batch));
    const PathGenerator gen(cfg.model, g, cfg.method, cfg.seed);
    SampleOptions so;
    so.jobs = cfg.jobs;
    const auto batch = sample_batch(gen, cfg.batch, so);
    write_batch(batch, ctx.file("batch.bin"));
    ctx.files.push_back("batch.bin.json");
    const auto ex = max_argmax(batch);
    Csv csv(ctx.file("extremes.csv"), {"path", "max", "argmax"});
    for (std::size_t k = 0; k < ex.batch(); ++k) csv.cell(k).cell(ex.maxima[k]).cell(ex.argmax[k]).end();
    return {{"geometry", geometry_to_json(g)},
            {"method", std::string(to_string(gen.method()))},
            {"embedding_size", gen.embedding_size()},
            {"extremes", to_json_value(ex)}};
}

std::size_t factor_bytes(const CovarianceModel& model, std::size_t points, const std::array<std::size_t, 2>& axes,
                         int dim, SampleMethod method) {
    if (model.kind == CovarianceKind::iid) return 0;
    const bool chol = method == SampleMethod::cholesky || (method == SampleMethod::automatic && points <= kCholeskyMaxPoints);
    if (chol) return 2 * points * points * sizeof(double);
    std::size_t m = 1;
    for (int k = 0; k < dim; ++k) m *= 2 * axes[static_cast<std::size_t>(k)];
    return 4 * m * 16;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind experiment_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i)
        if (kKindNames[i] == name) return static_cast<ExperimentKind>(i);
    std::string all;
    for (auto k : kKindNames) all += (all.empty() ? "" : ", ") + std::string(k);
    throw ConfigError("unknown experiment kind '" + std::string(name) + "' (expected one of " + all + ")");
}

CovarianceModel parse_model_spec(std::string_view spec) {
    if (!spec.empty() && spec.front() == '{') {
        json j;
        try {
            j = json::parse(spec);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("model: invalid JSON: ") + e.what());
        }
        return model_from_json(j);
    }
    const auto colon = spec.find(':');
    json j{{"kind", std::string(spec.substr(0, colon))}};
    if (colon != std::string_view::npos) {
        json params = json::object();
        std::string rest(spec.substr(colon + 1));
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("model: expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            try {
                std::size_t used = 0;
                const double v = std::stod(item.substr(eq + 1), &used);
                if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
                params[key] = v;
            } catch (const std::logic_error&) {
                throw ConfigError("model.params." + key + ": expected a number");
            }
        }
        j["params"] = params;
    }
    return model_from_json(j);
}

ScanClass parse_generator(std::string_view spec) {
    const auto colon = spec.find(':');
    const auto comma = spec.find(',');
    if (colon == std::string_view::npos || comma == std::string_view::npos || comma < colon)
        throw ConfigError("generator: expected disjoint:N,K or sliding:n,K, got '" + std::string(spec) + "'");
    const std::string kind(spec.substr(0, colon));
    std::size_t a = 0, b = 0;
    try {
        a = std::stoul(std::string(spec.substr(colon + 1, comma - colon - 1)));
        b = std::stoul(std::string(spec.substr(comma + 1)));
    } catch (const std::logic_error&) {
        throw ConfigError("generator: expected two integers in '" + std::string(spec) + "'");
    }
    try {
        if (kind == "disjoint") return ScanClass::disjoint(a, b);
        if (kind == "sliding") return ScanClass::sliding(a, b);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("generator: ") + e.what());
    }
    throw ConfigError("generator: unknown kind '" + kind + "' (expected disjoint or sliding)");
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::set<std::string> known{
        "kind",   "model",        "sizes",     "batch",    "seed",     "method",    "jobs",   "out",
        "pipeline", "alpha",      "rho_source", "c_sud",   "c",        "epsilon",   "t_grid", "t_points",
        "center", "theta_points", "grid",      "dim",      "extent",   "spacing",   "exponent_ratio",
        "scales", "class",        "generator", "mu",       "delta",    "deltas",    "threshold",
        "trials", "count",        "sign_threshold", "max_tries"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) field_error(it.key(), "unknown field");

    ExperimentConfig c;
    if (!j.contains("kind")) field_error("kind", "missing");
    c.kind = rethrow_as_field("kind", [&] { return experiment_kind_from_string(get_string(j, "kind")); });
    if (j.contains("model")) {
        const auto& m = j["model"];
        if (m.is_string())
            c.model = rethrow_as_field("model", [&] { return parse_model_spec(m.get<std::string>()); });
        else
            c.model = model_from_json(m, "config.model");
    }
    if (j.contains("sizes")) c.sizes = get_sizes(j, "sizes");
    if (j.contains("batch")) c.batch = get_size(j, "batch");
    if (j.contains("seed")) c.seed = get_size(j, "seed");
    if (j.contains("method"))
        c.method = rethrow_as_field("method", [&] { return sample_method_from_string(get_string(j, "method")); });
    if (j.contains("jobs")) c.jobs = static_cast<unsigned>(get_size(j, "jobs"));
    if (j.contains("out")) c.out = get_string(j, "out");
    if (j.contains("pipeline"))
        c.pipeline = rethrow_as_field("pipeline", [&] { return pipeline_from_string(get_string(j, "pipeline")); });
    if (j.contains("alpha")) c.alpha = get_double(j, "alpha");
    if (j.contains("rho_source"))
        c.rho_source = rethrow_as_field("rho_source", [&] { return rho_source_from_string(get_string(j, "rho_source")); });
    if (j.contains("c_sud")) c.c_sud = get_optional_double(j, "c_sud");
    if (j.contains("c")) c.c = get_optional_double(j, "c");
    if (j.contains("epsilon")) c.epsilon = get_double(j, "epsilon");
    if (j.contains("t_grid")) c.t_grid = get_doubles(j, "t_grid");
    if (j.contains("t_points")) c.t_points = get_size(j, "t_points");
    if (j.contains("center"))
        c.center = rethrow_as_field("center", [&] { return tail_center_from_string(get_string(j, "center")); });
    if (j.contains("theta_points")) c.theta_points = get_size(j, "theta_points");
    if (j.contains("grid")) {
        if (!j["grid"].is_boolean()) field_error("grid", "expected true or false");
        c.grid = j["grid"].get<bool>();
    }
    if (j.contains("dim")) c.dim = static_cast<int>(get_size(j, "dim"));
    if (j.contains("extent")) c.extent = get_doubles(j, "extent");
    if (j.contains("spacing")) c.spacing = get_double(j, "spacing");
    if (j.contains("exponent_ratio")) c.exponent_ratio = get_optional_double(j, "exponent_ratio");
    if (j.contains("scales")) c.scales = get_size(j, "scales");
    if (j.contains("class") && !j["class"].is_null()) c.scan_class = scan_class_from_json(j["class"], "config.class");
    if (j.contains("generator")) {
        c.generator = get_string(j, "generator");
        rethrow_as_field("generator", [&] { return parse_generator(c.generator); });
    }
    if (j.contains("mu")) c.mu = get_optional_double(j, "mu");
    if (j.contains("delta")) c.delta = get_double(j, "delta");
    if (j.contains("deltas")) c.deltas = get_doubles(j, "deltas");
    if (j.contains("threshold"))
        c.threshold = rethrow_as_field("threshold", [&] { return threshold_kind_from_string(get_string(j, "threshold")); });
    if (j.contains("trials")) c.trials = get_size(j, "trials");
    if (j.contains("count")) c.count = get_size(j, "count");
    if (j.contains("sign_threshold")) c.sign_threshold = get_optional_double(j, "sign_threshold");
    if (j.contains("max_tries")) c.max_tries = get_size(j, "max_tries");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j{{"kind", std::string(to_string(c.kind))},
           {"model", model_to_json(c.model)},
           {"sizes", c.sizes},
           {"batch", c.batch},
           {"seed", c.seed},
           {"method", std::string(to_string(c.method))},
           {"pipeline", std::string(pipeline_name(c.pipeline))},
           {"alpha", c.alpha},
           {"rho_source", std::string(to_string(c.rho_source))},
           {"c_sud", opt(c.c_sud)},
           {"c", opt(c.c)},
           {"epsilon", c.epsilon},
           {"t_grid", c.t_grid},
           {"t_points", c.t_points},
           {"center", std::string(to_string(c.center))},
           {"theta_points", c.theta_points},
           {"grid", c.grid},
           {"dim", c.dim},
           {"extent", c.extent},
           {"spacing", c.spacing},
           {"exponent_ratio", opt(c.exponent_ratio)},
           {"scales", c.scales},
           {"generator", c.generator},
           {"mu", opt(c.mu)},
           {"delta", c.delta},
           {"deltas", c.deltas},
           {"threshold", std::string(to_string(c.threshold))},
           {"trials", c.trials},
           {"count", c.count},
           {"sign_threshold", opt(c.sign_threshold)},
           {"max_tries", c.max_tries}};
    j["class"] = c.scan_class ? scan_class_to_json(*c.scan_class) : json(nullptr);
    return j;
}

std::size_t estimate_memory(const ExperimentConfig& c) {
    std::size_t peak = 0;
    const auto field_cell = [&] {
        const auto g = GridGeometry::box(c.dim, c.extent, c.spacing);
        return factor_bytes(c.model, g.size(), g.points, g.dim, c.method) + g.size() * c.batch * sizeof(double) +
               g.size() * 2 * sizeof(double) * static_cast<std::size_t>(c.dim);
    };
    switch (c.kind) {
        case ExperimentKind::field_bound: return field_cell();
        case ExperimentKind::bound:
            if (c.pipeline == Pipeline::field) return field_cell();
            break;
        case ExperimentKind::sample:
            if (c.grid) return field_cell();
            break;
        case ExperimentKind::scan_risk: {
            std::size_t n = 100;
            if (c.scan_class)
                n = c.scan_class->n;
            else
                try {
                    n = parse_generator(c.generator).n;
                } catch (const ConfigError&) {
                }
            return 2 * c.trials * sizeof(double) + (c.jobs + 1) * n * sizeof(double);
        }
        case ExperimentKind::sign_vectors:
            return c.sizes.empty() ? 0 : c.count * c.sizes.front();
        default: break;
    }
    for (std::size_t n : c.sizes) {
        std::size_t bytes = factor_bytes(c.model, n, {n, 1}, 1, c.method);
        if (c.kind == ExperimentKind::sample)
            bytes += n * c.batch * sizeof(double);
        else
            bytes += c.batch * (sizeof(double) + sizeof(std::size_t)) + n * sizeof(std::size_t) +
                     std::max(1u, c.jobs) * n * sizeof(double);
        if (c.kind == ExperimentKind::bound && c.pipeline == Pipeline::correlated) bytes = n * n * sizeof(double);
        peak = std::max(peak, bytes);
        if (c.kind == ExperimentKind::sample) break;
    }
    return peak;
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
    std::vector<Diagnostic> d;
    const auto add = [&](std::string f, std::string m) { d.push_back({std::move(f), std::move(m)}); };
    try {
        c.model.validate();
    } catch (const ConfigError& e) {
        add("model", e.what());
    }
    const bool sequence_kind = c.kind != ExperimentKind::field_bound && c.kind != ExperimentKind::scan_risk &&
                               !(c.kind == ExperimentKind::bound && c.pipeline == Pipeline::field) &&
                               !(c.kind == ExperimentKind::sample && c.grid);
    if (sequence_kind) {
        if (c.sizes.empty()) add("sizes", "must list at least one size");
        for (std::size_t n : c.sizes) {
            const bool needs_log = c.kind != ExperimentKind::variance_scaling && c.kind != ExperimentKind::sample &&
                                   c.kind != ExperimentKind::sign_vectors;
            if (n < 1 || (needs_log && n < 2)) add("sizes", "size " + std::to_string(n) + " is too small");
        }
    }
    if (c.kind != ExperimentKind::scan_risk && c.kind != ExperimentKind::sign_vectors && c.batch < 3)
        add("batch", "must be at least 3");
    if (c.kind == ExperimentKind::gumbel_convergence && c.batch < 100)
        add("batch", "the KS distance needs at least 100 maxima");
    if (c.kind == ExperimentKind::bound && c.pipeline == Pipeline::sequence && c.rho_source == RhoSource::monte_carlo &&
        c.batch < kMinRhoSamples)
        add("batch", "Monte Carlo rho needs at least " + std::to_string(kMinRhoSamples) + " paths");

    const bool uses_alpha = c.kind == ExperimentKind::tail_bounds || c.kind == ExperimentKind::laplace_check ||
                            c.kind == ExperimentKind::verify ||
                            (c.kind == ExperimentKind::bound && c.pipeline == Pipeline::sequence);
    if (uses_alpha && !(c.alpha > 0.0 && c.alpha < 1.0))
        add("alpha", "range error: must lie in (0, 1); the sequence tail bound holds for some alpha in (0, 1)");
    if (c.kind == ExperimentKind::bound && c.pipeline == Pipeline::correlated && !(c.epsilon > 0.0 && c.epsilon < 1.0))
        add("epsilon", "must lie in (0, 1)");
    if (c.c && !(*c.c > 0.0)) add("c", "must be positive");
    if (c.theta_points < 2) add("theta_points", "must be at least 2");
    if (c.t_points < 2) add("t_points", "must be at least 2");
    if (!std::is_sorted(c.t_grid.begin(), c.t_grid.end())) add("t_grid", "must be non-decreasing");

    const bool field_kind = c.kind == ExperimentKind::field_bound ||
                            (c.kind == ExperimentKind::bound && c.pipeline == Pipeline::field) ||
                            (c.kind == ExperimentKind::sample && c.grid);
    if (field_kind) {
        if (c.dim < 1 || c.dim > 2) add("dim", "must be 1 or 2 (fields of dimension 3 or more are not supported)");
        if (c.extent.size() != static_cast<std::size_t>(c.dim)) add("extent", "needs one entry per axis");
        if (!(c.spacing > 0.0)) add("spacing", "must be positive");
        for (double e : c.extent)
            if (!(e > 0.0)) add("extent", "entries must be positive");
    }

    if (c.kind == ExperimentKind::scan_risk) {
        std::optional<ScanClass> cls = c.scan_class;
        if (!cls) {
            try {
                cls = parse_generator(c.generator);
            } catch (const ConfigError& e) {
                add("generator", e.what());
            }
        }
        if (c.trials < 2) add("trials", "must be at least 2");
        if (c.threshold == ThresholdKind::prop51 && !c.mu && !(c.delta > 0.0 && c.delta <= 2.0))
            add("delta", "must lie in (0, 2] for prop51");
        if (c.threshold == ThresholdKind::prop52 && !c.mu && !(c.delta > 0.0 && c.delta <= 6.0))
            add("delta", "must lie in (0, 6] for prop52");
        if (cls && c.threshold == ThresholdKind::prop52 && !c.mu && cls->N() < 2)
            add("threshold", "prop52 needs N >= 2");
    }
    if (c.kind == ExperimentKind::sign_vectors && c.count < 2) add("count", "must be at least 2");

    if (d.empty()) {
        try {
            const std::size_t bytes = estimate_memory(c);
            const std::size_t cap = memory_cap_bytes();
            if (bytes > cap)
                add(field_kind ? "extent" : "batch",
                    "capacity: largest cell needs about " + std::to_string(bytes) + " bytes, above the cap of " +
                        std::to_string(cap) + " bytes (SUPERCONC_CAP_BYTES)");
        } catch (const Error& e) {
            add("config", e.what());
        }
    }
    return d;
}

RunResult run(const ExperimentConfig& config, std::ostream* progress) {
    const auto diags = validate(config);
    if (!diags.empty()) {
        std::string msg;
        for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + ("config." + d.field + ": " + d.message);
        throw ConfigError(msg);
    }
    std::filesystem::create_directories(config.out);
    const auto start = std::chrono::steady_clock::now();
    Context ctx{config, progress, {}};
    json body;
    switch (config.kind) {
        case ExperimentKind::gumbel_convergence: body = run_gumbel(ctx); break;
        case ExperimentKind::variance_scaling: body = run_verify_family(ctx, {true, false, false}); break;
        case ExperimentKind::tail_bounds: body = run_verify_family(ctx, {false, true, false}); break;
        case ExperimentKind::laplace_check: body = run_verify_family(ctx, {false, false, true}); break;
        case ExperimentKind::verify: body = run_verify_family(ctx, {true, true, true}); break;
        case ExperimentKind::field_bound: body = run_field(ctx); break;
        case ExperimentKind::bound: body = run_bound(ctx); break;
        case ExperimentKind::scan_risk: body = run_scan(ctx); break;
        case ExperimentKind::sign_vectors: body = run_sign(ctx); break;
        case ExperimentKind::sample: body = run_sample(ctx); break;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunResult result;
    result.summary = {{"kind", std::string(to_string(config.kind))}, {"result", body}};
    write_text(ctx.file("summary.json"), dump_json(result.summary));
    std::vector<std::string> listed = ctx.files;
    listed.push_back("manifest.json");
    listed.push_back("timing.json");
    const json manifest{{"config", config_to_json(config)}, {"library_version", SUPERCONC_VERSION}, {"files", listed}};
    write_text(config.out / "manifest.json", dump_json(manifest));
    write_text(config.out / "timing.json", dump_json(json{{"wall_seconds", wall}}));
    result.files = listed;
    result.wall_seconds = wall;
    return result;
}

}  // namespace superconc::cli
