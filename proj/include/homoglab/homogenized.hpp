#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "homoglab/convolution.hpp"
#include "homoglab/discretize.hpp"
#include "homoglab/kernels.hpp"
#include "homoglab/linalg.hpp"
#include "homoglab/solve.hpp"

namespace homoglab {

enum class LimitKind { LocalInHoles, NonlocalInHoles, Strips };

struct LimitSystemSpec {
    LimitKind kind = LimitKind::LocalInHoles;
    double x = 0.5;
    Kernel j;
    Kernel g;
    SourceField f;
    /// Effective tensor, required for NonlocalInHoles.
    std::optional<Eigen::Matrix2d> tensor;
    ConvolutionBackend backend = ConvolutionBackend::Auto;
    int workers = 1;
};

/// Neumann face form of div(Q grad u) on the full grid: q11 on x1-faces,
/// q22 on x2-faces, and the mixed term through the four-cell gradient at
/// every interior vertex.
Eigen::SparseMatrix<double> anisotropic_laplacian(const Grid& grid, const Eigen::Matrix2d& q);

/// Face form with x1-faces only: a second difference along every grid row,
/// no coupling between rows.
Eigen::SparseMatrix<double> transversal_laplacian(const Grid& grid);

/// The limit equations, each divided by its volume-fraction weight so that
/// the collocated system is symmetric. Unknowns are (u, v), both on every
/// grid cell.
class LimitSystem final : public LinearOperator {
public:
    explicit LimitSystem(const LimitSystemSpec& spec);

    std::size_t size() const override;
    void apply(std::span<const double> x, std::span<double> y) const override;
    std::vector<double> diagonal() const override;

    const LimitSystemSpec& spec() const noexcept { return spec_; }
    const Grid& grid() const noexcept { return spec_.f.grid; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }
    const std::vector<double>& constraint() const noexcept { return constraint_; }
    ConstraintMode constraint_mode() const noexcept { return mode_; }
    /// The local operator acting on u (empty matrix content for LocalInHoles).
    const Eigen::SparseMatrix<double>& local_block() const noexcept { return local_; }
    /// sum_k J(x_i - x_k) over all cells (no h^2 factor).
    const std::vector<double>& j_row_sums() const noexcept { return jsum_; }
    const std::vector<double>& g_row_sums() const noexcept { return gsum_; }
    const GridConvolution& j_conv() const noexcept { return jconv_; }
    const GridConvolution& g_conv() const noexcept { return gconv_; }

private:
    LimitSystemSpec spec_;
    ConstraintMode mode_;
    GridConvolution jconv_;
    GridConvolution gconv_;
    std::vector<double> jsum_;
    std::vector<double> gsum_;
    Eigen::SparseMatrix<double> local_;
    std::vector<double> diag_u_;
    std::vector<double> diag_v_;
    double coupling_ = 0.0;  // coefficient of J in the u-v block
    std::vector<double> rhs_;
    std::vector<double> constraint_;
};

struct LimitSolution {
    LimitKind kind = LimitKind::LocalInHoles;
    double x = 0.5;
    Grid grid;
    std::vector<double> u;
    std::vector<double> v;
    ConstraintMode constraint_mode = ConstraintMode::PlainMean;
    /// int u + int v, or int X u + int v for the weighted mode.
    double constraint_value = 0.0;
    /// Largest collocation residual of each strong-form equation.
    double residual_u = 0.0;
    double residual_v = 0.0;
    double solver_residual = 0.0;
    int iterations = 0;
};

/// Pointwise residuals of the strong-form equations at every cell, in the
/// paper's own scaling (f X = ..., f (1 - X) = ...).
std::pair<std::vector<double>, std::vector<double>> collocation_residuals(const LimitSystem& system,
                                                                          std::span<const double> u,
                                                                          std::span<const double> v);

LimitSolution solve_limit(const LimitSystemSpec& spec, const SolverOptions& options);
LimitSolution solve_limit_local_in_holes(const LimitSystemSpec& spec, const SolverOptions& options);
LimitSolution solve_limit_nonlocal_in_holes(const LimitSystemSpec& spec, const SolverOptions& options);
LimitSolution solve_limit_strips(const LimitSystemSpec& spec, const SolverOptions& options);

/// Default solver settings for the limit problems (tol 1e-12).
SolverOptions limit_solver_options();

std::string to_string(LimitKind kind);
nlohmann::json to_json(const LimitSolution& s);

}  // namespace homoglab
