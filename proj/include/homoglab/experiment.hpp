#pragma once

#include <filesystem>
#include <limits>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homoglab/cell.hpp"
#include "homoglab/convolution.hpp"
#include "homoglab/discretize.hpp"
#include "homoglab/geometry.hpp"
#include "homoglab/homogenized.hpp"
#include "homoglab/kernels.hpp"

namespace homoglab {

enum class Scenario { LocalInHoles, NonlocalInHoles, Strips, CellOnly, Diagnostics };

struct KernelSpec {
    KernelFamily family = KernelFamily::UniformBall;
    double radius = 1.0;
    Kernel make() const { return Kernel(family, radius); }
};

struct ExperimentConfig {
    Scenario scenario = Scenario::LocalInHoles;
    std::vector<int> n_list{2, 4, 8};
    /// Empty means no hole (CellOnly only).
    std::optional<HoleShape> hole = BallHole{0.5};
    int q = 8;             // cells per period for hole partitions
    int strip_grid = 128;  // grid side for the strip sweep
    int cell_grid = 128;   // grid side for CellOnly
    KernelSpec j{KernelFamily::TruncGaussian, 2.0};
    KernelSpec g{KernelFamily::QuarticBump, 0.25};
    SourceSpec source;
    bool mean_correct = false;
    double tol = 1e-10;
    int max_iter = 20000;
    double limit_tol = 1e-12;
    double tol_compat = 1e-10;
    bool spectral = true;
    ConvolutionBackend backend = ConvolutionBackend::Auto;
};

/// Thrown for malformed or inconsistent configuration documents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Full config with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

std::string to_string(Scenario s);

/// One row of the sweep table. Quantities that do not apply stay NaN.
struct SweepRecord {
    int n = 0;
    int m = 0;
    int dofs = 0;
    double x_fraction = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double constraint = 0.0;
    double energy = 0.0;
    double corrector_error = std::numeric_limits<double>::quiet_NaN();
    double error_l2_a = std::numeric_limits<double>::quiet_NaN();
    double error_l2_b = std::numeric_limits<double>::quiet_NaN();
    double error_h1_a = std::numeric_limits<double>::quiet_NaN();
    double m_n = std::numeric_limits<double>::quiet_NaN();
    double adjusted_constraint = std::numeric_limits<double>::quiet_NaN();
    double moment_max = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> moments;  // per test function, max of the u and v errors
    double lambda_min = std::numeric_limits<double>::quiet_NaN();
    /// Diagnostics only: lambda_min of the NonlocalInHoles system at the same n.
    double lambda_min_alt = std::numeric_limits<double>::quiet_NaN();
    double poincare = std::numeric_limits<double>::quiet_NaN();
    double hole_average_deviation = std::numeric_limits<double>::quiet_NaN();
    double limit_residual = std::numeric_limits<double>::quiet_NaN();
    double limit_constraint = std::numeric_limits<double>::quiet_NaN();
    double transversal_defect = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;  // reported only in the manifest metadata
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SweepRecord> records;
    std::optional<EffectiveTensor> tensor;
    std::vector<LimitSolution> limits;  // one per n for the sweep scenarios
    std::vector<Verdict> verdicts;
    bool all_pass() const;
};

/// Runs the sweep. Items run concurrently up to `jobs`; results are merged
/// in n order. Solver failures propagate as NonConvergence.
ExperimentResult run_experiment(const ExperimentConfig& config, int jobs = 1);

/// Writes manifest.json, sweep.csv, verdicts.json, tensor.json and the
/// limit arrays. Everything except the manifest's metadata block is a pure
/// function of the config.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir,
                     const nlohmann::json& metadata);

std::string sweep_csv(const ExperimentResult& result);
nlohmann::json verdicts_json(const ExperimentResult& result);

/// Reads an artifact directory, writes summary.txt and plot_*.dat next to
/// it and returns the summary text. Throws ConfigError("missing manifest").
std::string report(const std::filesystem::path& dir);

/// FNV-1a over the bytes of the given files, in order, as 16 hex digits.
std::string content_hash(const std::vector<std::filesystem::path>& files);

}  // namespace homoglab
