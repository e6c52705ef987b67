#pragma once

// Experiment configs and the runner behind the command-line tool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "superconc/covariance.hpp"
#include "superconc/covering.hpp"
#include "superconc/json_io.hpp"
#include "superconc/sampler.hpp"
#include "superconc/scantest.hpp"
#include "superconc/verify.hpp"

namespace superconc::cli {

enum class ExperimentKind {
    gumbel_convergence,
    variance_scaling,
    tail_bounds,
    laplace_check,
    field_bound,
    scan_risk,
    sign_vectors,
    verify,  ///< variance, tail, and Laplace outputs from one set of maxima
    sample,
    bound,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class Pipeline { sequence, field, correlated };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::variance_scaling;
    CovarianceModel model = CovarianceModel::iid();
    std::vector<std::size_t> sizes{16, 256, 4096};
    std::size_t batch = 10000;
    std::uint64_t seed = 1;
    SampleMethod method = SampleMethod::automatic;

    // Not part of the result: excluded from the manifest echo.
    unsigned jobs = 1;
    std::filesystem::path out = "out";

    // Sequence bound and tail scale.
    Pipeline pipeline = Pipeline::sequence;
    double alpha = 0.5;
    RhoSource rho_source = RhoSource::monte_carlo;
    std::optional<double> c_sud;
    std::optional<double> c;
    double epsilon = 0.1;

    // Tail and Laplace checks.
    std::vector<double> t_grid;  ///< empty: tail_grid over the observed maxima
    std::size_t t_points = 200;
    TailCenter center = TailCenter::mean;
    std::size_t theta_points = 21;

    // Fields (and grid sampling when `grid` is set).
    bool grid = false;
    int dim = 1;
    std::vector<double> extent{100.0};
    double spacing = 0.5;
    std::optional<double> exponent_ratio;
    std::size_t scales = 4;

    // Scan test.
    std::optional<ScanClass> scan_class;
    std::string generator = "disjoint:10,10";
    std::optional<double> mu;
    double delta = 0.2;
    std::vector<double> deltas;  ///< empty: default comparison grid
    ThresholdKind threshold = ThresholdKind::prop51;
    std::size_t trials = 2000;

    // Sign vectors (length is sizes.front()).
    std::size_t count = 50;
    std::optional<double> sign_threshold;
    std::size_t max_tries = 10000;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const json& j);
/// Everything that determines the results (no output path, no job count).
json config_to_json(const ExperimentConfig& config);

/// "kind" or "kind:key=value,..." or an inline JSON object.
CovarianceModel parse_model_spec(std::string_view spec);
/// "disjoint:N,K" or "sliding:n,K".
ScanClass parse_generator(std::string_view spec);

struct Diagnostic {
    std::string field;
    std::string message;
};

/// Dry-run checks, including a memory estimate for the largest cell.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

/// Peak bytes of the largest grid cell.
std::size_t estimate_memory(const ExperimentConfig& config);

struct RunResult {
    json summary;
    std::vector<std::string> files;  ///< names inside config.out
    double wall_seconds = 0.0;
};

/// Writes the data files, summary.json, manifest.json and timing.json into
/// config.out. Progress lines go to `progress` when non-null.
RunResult run(const ExperimentConfig& config, std::ostream* progress = nullptr);

}  // namespace superconc::cli
