#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>

#include "experiment.hpp"
#include "superconc/errors.hpp"

namespace {

using superconc::cli::ExperimentConfig;
using superconc::cli::ExperimentKind;

struct Setters {
    std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> list;

    template <class T, class F>
    CLI::Option* add(CLI::App* app, const std::string& name, const std::string& desc, F apply) {
        auto value = std::make_shared<T>();
        CLI::Option* o = app->add_option(name, *value, desc);
        list.emplace_back(o, [value, apply](ExperimentConfig& c) { apply(c, *value); });
        return o;
    }

    void apply(ExperimentConfig& c) const {
        for (const auto& [opt, fn] : list)
            if (opt->count() > 0) fn(c);
    }
};

superconc::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw superconc::ConfigError("cannot open " + path);
    try {
        return superconc::json::parse(in);
    } catch (const superconc::json::parse_error& e) {
        throw superconc::ConfigError(path + ": " + e.what());
    }
}

void add_model(Setters& s, CLI::App* app) {
    s.add<std::string>(app, "--model,--cov", "covariance model: kind[:key=value,...], inline JSON, or a JSON file",
                       [](ExperimentConfig& c, const std::string& v) {
                           if (!v.empty() && v.front() != '{' && std::filesystem::is_regular_file(v))
                               c.model = superconc::model_from_json(read_json_file(v));
                           else
                               c.model = superconc::cli::parse_model_spec(v);
                       });
}

void add_sizes(Setters& s, CLI::App* app) {
    s.add<std::vector<std::size_t>>(app, "--n", "sequence length(s), comma separated",
                                    [](ExperimentConfig& c, const std::vector<std::size_t>& v) { c.sizes = v; })
        ->delimiter(',');
}

void add_batch(Setters& s, CLI::App* app) {
    s.add<std::size_t>(app, "--batch", "number of simulated paths per cell",
                       [](ExperimentConfig& c, std::size_t v) { c.batch = v; });
}

void add_method(Setters& s, CLI::App* app) {
    s.add<std::string>(app, "--method", "automatic, cholesky or circulant", [](ExperimentConfig& c, const std::string& v) {
        c.method = superconc::sample_method_from_string(v);
    });
}

void add_field(Setters& s, CLI::App* app, bool marks_grid) {
    s.add<int>(app, "--dim", "field dimension (1 or 2)", [marks_grid](ExperimentConfig& c, int v) {
        c.dim = v;
        if (marks_grid) c.grid = true;
    });
    s.add<std::vector<double>>(app, "--extent", "box extent per axis, comma separated",
                               [marks_grid](ExperimentConfig& c, const std::vector<double>& v) {
                                   c.extent = v;
                                   if (marks_grid) c.grid = true;
                               })
        ->delimiter(',');
    s.add<double>(app, "--spacing", "grid spacing", [](ExperimentConfig& c, double v) { c.spacing = v; });
}

// One "key value" line per constant, blank line between reports.
void print_bound_table(const superconc::json& summary, std::ostream& out) {
    const auto& body = summary.at("result");
    std::vector<superconc::json> reports;
    if (body.contains("reports"))
        for (const auto& r : body["reports"]) reports.push_back(r);
    else
        reports.push_back(body.at("report"));
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i > 0) out << '\n';
        for (auto it = reports[i].begin(); it != reports[i].end(); ++it) {
            if (it.value().is_null()) continue;
            std::string text;
            if (it.value().is_number_float())
                text = superconc::format_double(it.value().get<double>());
            else
                text = it.value().is_string() ? it.value().get<std::string>() : superconc::dump_json(it.value(), 0);
            char key[32];
            std::snprintf(key, sizeof key, "%-16s", it.key().c_str());
            out << key << ' ' << text << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superconcentration experiments for maxima of stationary Gaussian sequences and fields"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path, out;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    bool dry_run = false;
    auto* o_config = app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    auto* o_seed = app.add_option("--seed", seed, "base seed");
    auto* o_jobs = app.add_option("--jobs", jobs, "worker threads");
    auto* o_out = app.add_option("--out", out, "output directory");
    app.add_flag("--dry-run", dry_run, "validate only and print diagnostics");

    Setters s;
    std::map<CLI::App*, ExperimentKind> kinds;

    auto* sample = app.add_subcommand("sample", "draw a batch of paths and write it to batch.bin");
    kinds[sample] = ExperimentKind::sample;
    add_model(s, sample);
    add_sizes(s, sample);
    add_batch(s, sample);
    add_method(s, sample);
    add_field(s, sample, true);

    auto* bound = app.add_subcommand("bound", "covering, rho and K for a tail bound");
    kinds[bound] = ExperimentKind::bound;
    add_model(s, bound);
    add_sizes(s, bound);
    add_batch(s, bound);
    add_method(s, bound);
    add_field(s, bound, false);
    s.add<std::string>(bound, "--pipeline", "sequence, field or correlated", [](ExperimentConfig& c, const std::string& v) {
        if (v == "sequence")
            c.pipeline = superconc::cli::Pipeline::sequence;
        else if (v == "field")
            c.pipeline = superconc::cli::Pipeline::field;
        else if (v == "correlated")
            c.pipeline = superconc::cli::Pipeline::correlated;
        else
            throw superconc::ConfigError("--pipeline: expected sequence, field or correlated");
    });
    s.add<double>(bound, "--alpha", "block exponent in (0, 1)", [](ExperimentConfig& c, double v) { c.alpha = v; });
    s.add<std::string>(bound, "--rho", "analytic or monte_carlo", [](ExperimentConfig& c, const std::string& v) {
        c.rho_source = v == "analytic" ? superconc::RhoSource::analytic : superconc::RhoSource::monte_carlo;
        if (v != "analytic" && v != "monte_carlo" && v != "mc")
            throw superconc::ConfigError("--rho: expected analytic or monte_carlo");
    });
    s.add<double>(bound, "--c-sud", "Sudakov constant for the analytic rho route",
                  [](ExperimentConfig& c, double v) { c.c_sud = v; });
    s.add<double>(bound, "--c", "tail constant c for bound curves", [](ExperimentConfig& c, double v) { c.c = v; });
    s.add<double>(bound, "--epsilon", "correlation level for the correlated pipeline",
                  [](ExperimentConfig& c, double v) { c.epsilon = v; });
    s.add<double>(bound, "--exponent-ratio", "override of the net exponent",
                  [](ExperimentConfig& c, double v) { c.exponent_ratio = v; });
    s.add<std::size_t>(bound, "--scales", "dyadic scales for the supremum regression",
                       [](ExperimentConfig& c, std::size_t v) { c.scales = v; });
    s.add<std::vector<double>>(bound, "--t-grid", "t values for the bound curves",
                               [](ExperimentConfig& c, const std::vector<double>& v) { c.t_grid = v; })
        ->delimiter(',');

    auto* verify = app.add_subcommand("verify", "variance, tail and Laplace-transform checks");
    kinds[verify] = ExperimentKind::verify;
    add_model(s, verify);
    add_sizes(s, verify);
    add_batch(s, verify);
    add_method(s, verify);
    s.add<std::string>(verify, "--check", "variance, tail, laplace or all", [](ExperimentConfig& c, const std::string& v) {
        if (v == "variance")
            c.kind = ExperimentKind::variance_scaling;
        else if (v == "tail")
            c.kind = ExperimentKind::tail_bounds;
        else if (v == "laplace")
            c.kind = ExperimentKind::laplace_check;
        else if (v == "all")
            c.kind = ExperimentKind::verify;
        else
            throw superconc::ConfigError("--check: expected variance, tail, laplace or all");
    });
    s.add<double>(verify, "--alpha", "exponent in the scale max(phi(n^alpha), 1/log n)",
                  [](ExperimentConfig& c, double v) { c.alpha = v; });
    s.add<std::string>(verify, "--center", "mean, b_n or median", [](ExperimentConfig& c, const std::string& v) {
        c.center = superconc::tail_center_from_string(v);
    });
    s.add<std::size_t>(verify, "--theta-points", "points on the theta window",
                       [](ExperimentConfig& c, std::size_t v) { c.theta_points = v; });
    s.add<std::size_t>(verify, "--t-points", "points on the automatic t grid",
                       [](ExperimentConfig& c, std::size_t v) { c.t_points = v; });
    s.add<std::vector<double>>(verify, "--t-grid", "explicit t grid",
                               [](ExperimentConfig& c, const std::vector<double>& v) { c.t_grid = v; })
        ->delimiter(',');

    auto* scan = app.add_subcommand("scan", "scan test risk and threshold comparison");
    kinds[scan] = ExperimentKind::scan_risk;
    s.add<std::string>(scan, "--class", "JSON file with {\"n\": ..., \"sets\": [[...], ...]}",
                       [](ExperimentConfig& c, const std::string& v) {
                           c.scan_class = superconc::scan_class_from_json(read_json_file(v), "class");
                       });
    s.add<std::string>(scan, "--generator", "disjoint:N,K or sliding:n,K", [](ExperimentConfig& c, const std::string& v) {
        superconc::cli::parse_generator(v);
        c.generator = v;
        c.scan_class.reset();
    });
    s.add<double>(scan, "--mu", "alternative mean (default: the chosen threshold)",
                  [](ExperimentConfig& c, double v) { c.mu = v; });
    s.add<double>(scan, "--delta", "target risk", [](ExperimentConfig& c, double v) { c.delta = v; });
    s.add<std::string>(scan, "--threshold", "prop51 or prop52", [](ExperimentConfig& c, const std::string& v) {
        c.threshold = superconc::threshold_kind_from_string(v);
    });
    s.add<double>(scan, "--c", "tail constant (default: calibrated on the null scan maximum)",
                  [](ExperimentConfig& c, double v) { c.c = v; });
    s.add<std::size_t>(scan, "--trials", "Monte Carlo trials", [](ExperimentConfig& c, std::size_t v) { c.trials = v; });
    s.add<std::vector<double>>(scan, "--deltas", "delta grid for the threshold table",
                               [](ExperimentConfig& c, const std::vector<double>& v) { c.deltas = v; })
        ->delimiter(',');

    auto* gumbel = app.add_subcommand("gumbel", "KS distance of normalized maxima to the Gumbel law");
    kinds[gumbel] = ExperimentKind::gumbel_convergence;
    add_model(s, gumbel);
    add_sizes(s, gumbel);
    add_batch(s, gumbel);
    add_method(s, gumbel);

    auto* signvec = app.add_subcommand("signvec", "sign vectors with small pairwise inner products");
    kinds[signvec] = ExperimentKind::sign_vectors;
    s.add<std::size_t>(signvec, "--n", "vector length",
                       [](ExperimentConfig& c, std::size_t v) { c.sizes = {v}; });
    s.add<std::size_t>(signvec, "--count", "number of vectors", [](ExperimentConfig& c, std::size_t v) { c.count = v; });
    s.add<double>(signvec, "--threshold", "bound on |inner product| (default n^(2/3))",
                  [](ExperimentConfig& c, double v) { c.sign_threshold = v; });
    s.add<std::size_t>(signvec, "--max-tries", "candidate budget",
                       [](ExperimentConfig& c, std::size_t v) { c.max_tries = v; });

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg;
        CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
        if (o_config->count() > 0) {
            cfg = superconc::cli::config_from_json(read_json_file(config_path));
            const bool verify_family = cfg.kind == ExperimentKind::variance_scaling ||
                                       cfg.kind == ExperimentKind::tail_bounds ||
                                       cfg.kind == ExperimentKind::laplace_check || cfg.kind == ExperimentKind::verify;
            if (sub && !(sub == verify && verify_family)) cfg.kind = kinds[sub];
        } else if (sub) {
            cfg.kind = kinds[sub];
            if (sub == signvec) cfg.sizes = {100};
        } else {
            std::cerr << app.help();
            return 2;
        }
        s.apply(cfg);
        if (o_seed->count() > 0) cfg.seed = seed;
        if (o_jobs->count() > 0) cfg.jobs = jobs;
        if (o_out->count() > 0) cfg.out = out;

        const auto diags = superconc::cli::validate(cfg);
        if (dry_run) {
            superconc::json j = superconc::json::array();
            for (const auto& d : diags) j.push_back({{"field", d.field}, {"message", d.message}});
            std::cout << superconc::dump_json(superconc::json{{"diagnostics", j},
                                                              {"memory_bytes", superconc::cli::estimate_memory(cfg)},
                                                              {"cap_bytes", superconc::memory_cap_bytes()}})
                      << '\n';
            return diags.empty() ? 0 : 2;
        }
        const auto result = superconc::cli::run(cfg, &std::cerr);
        if (cfg.kind == ExperimentKind::bound)
            print_bound_table(result.summary, std::cout);
        else
            std::cout << superconc::dump_json(result.summary) << '\n';
        return 0;
    } catch (const superconc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const superconc::CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const superconc::HypothesisError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const superconc::ConstraintError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
