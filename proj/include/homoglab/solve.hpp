#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "homoglab/discretize.hpp"
#include "homoglab/linalg.hpp"

namespace homoglab {

struct SolverOptions {
    double tol = 1e-10;  // relative to the projected rhs
    int max_iter = 20000;
    bool keep_history = true;
    /// Starting vector; projected onto the constraint subspace first.
    std::optional<std::vector<double>> x0;
    /// How often the subspace drift |c.x| is sampled.
    int drift_check_every = 16;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
    /// Largest sampled |c.x| / (|c| |x|) along the iteration.
    double max_subspace_drift = 0.0;
};

/// Preconditioned CG for S x = b on {c.x = 0}. Every iterate, residual and
/// search direction is projected; the preconditioner is P D^{-1} P with D the
/// diagonal of S. Requires b orthogonal to the null direction of S, which
/// then makes S x = b hold exactly (not only up to a multiple of c).
CgResult solve_projected_cg(const LinearOperator& op, std::span<const double> b, std::span<const double> c,
                            const SolverOptions& options = {});

struct SolutionPair {
    std::vector<double> u;  // on A cells, in partition order
    std::vector<double> v;  // on B cells
    double residual_norm = 0.0;
    double constraint_value = 0.0;
    double energy = 0.0;
    int iterations = 0;
    double max_subspace_drift = 0.0;
    double seconds = 0.0;
    std::vector<double> history;

    std::vector<double> stacked() const;
};

SolutionPair solve_constrained(const DiscreteSystem& system, const SolverOptions& options = {});

/// 1/2 x.Sx + sum f u h^2 + sum f v h^2.
double energy_of(const DiscreteSystem& system, std::span<const double> x);
double energy_of(const DiscreteSystem& system, const SolutionPair& pair);

/// Dense oracle: factorizes the bordered matrix [[S, c], [c^T, 0]] with a
/// symmetric indefinite LDL^T and returns x (the multiplier is dropped).
std::vector<double> solve_bordered_dense(const Eigen::MatrixXd& s, std::span<const double> b,
                                         std::span<const double> c);

struct EigenEstimate {
    double value = 0.0;
    std::string method;
    int steps = 0;
};

/// Smallest eigenvalue of P S P on {c.x = 0}. Dense below max_dense dofs,
/// otherwise Lanczos with full reorthogonalization (relative tol 1e-6).
EigenEstimate constrained_min_eigenvalue(const LinearOperator& op, std::span<const double> c,
                                         int max_dense = 4096);
EigenEstimate constrained_min_eigenvalue(const Eigen::MatrixXd& s, std::span<const double> c);

struct SpectralReport {
    /// lambda_min(P S P) divided by the cell area, i.e. measured against the
    /// L^2 mass, so it compares across grids.
    double lambda_min_constrained = 0.0;
    double poincare_constant = 0.0;
    int n = 0;
    int dofs = 0;
    std::string method;
};

SpectralReport coercivity_constant(const DiscreteSystem& system);

/// Best C in |v - mean v|^2 <= C G-form(v, v) over B, both sides discrete
/// (L^2 norm with cell-area weights). Throws DisconnectedRegion if B splits
/// into pieces that G does not couple.
double poincare_constant(const Partition& partition, const Kernel& g, int max_dense = 4096);

nlohmann::json solve_record(const DiscreteSystem& system, const SolutionPair& pair);

}  // namespace homoglab
