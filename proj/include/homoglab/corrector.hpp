#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "homoglab/cell.hpp"
#include "homoglab/geometry.hpp"
#include "homoglab/homogenized.hpp"
#include "homoglab/solve.hpp"

namespace homoglab {

enum class CorrectorKind { HoleAverage, GradientCell };

/// Corrector built from a limit solution, restricted to the n-level regions.
struct CorrectorPair {
    CorrectorKind kind = CorrectorKind::HoleAverage;
    std::vector<double> w1;  // A dofs
    std::vector<double> w2;  // B dofs
    /// int_A w1 + int_B w2
    double m_n = 0.0;
    /// w1 - m_n / (2|A|), w2 - m_n / (2|B|)
    std::vector<double> w1_adjusted;
    std::vector<double> w2_adjusted;
    /// int_A w1_adjusted + int_B w2_adjusted
    double adjusted_constraint = 0.0;
};

/// w2 = v / (1 - X) on B; w1 = average of u / X over each hole (A = holes).
CorrectorPair build_corrector_hole_average(const LimitSolution& limit, const Partition& partition, double x);

/// w1 = u - eps sum_d U^d(x / eps) du/dx_d on A with eps the period 2/n and
/// U^d the cell fields on a grid with one cell-grid cell per partition cell;
/// w2 = v / (1 - X) on B.
CorrectorPair build_corrector_gradient_cell(const LimitSolution& limit, const CellProblem& cell, int n,
                                            const Partition& partition, double x);

/// Centered difference of a grid field along x1 (d = 0) or x2 (d = 1),
/// one-sided on the outer boundary.
std::vector<double> grid_gradient(const Grid& grid, std::span<const double> field, int d);

struct CorrectorError {
    double l2_a = 0.0;
    double l2_b = 0.0;
    /// sqrt of the sum of squared differences across faces inside A.
    double h1_seminorm_a = 0.0;
    /// l2_a + l2_b (HoleAverage) or sqrt(l2_a^2 + h1_seminorm_a^2) + l2_b.
    double total = 0.0;
};

CorrectorError corrector_error(const SolutionPair& solution, const CorrectorPair& corrector,
                               const Partition& partition);

struct TestFunction {
    std::string name;
    std::function<double(Point)> phi;
};

/// {1, x1, x2, x1 x2, sin 2 pi x1, sin 2 pi x2}
const std::vector<TestFunction>& moment_test_set();

struct MomentErrors {
    std::vector<std::string> names;
    std::vector<double> u_error;  // |int_A u_n phi - int w_u u phi|
    std::vector<double> v_error;  // |int_B v_n phi - int v phi|
    double max_error = 0.0;
};

/// The u-moment compares against int u phi, or int X u phi when u is the
/// limit of the extended field (NonlocalInHoles) rather than of chi_A u_n.
MomentErrors weak_moment_errors(const SolutionPair& solution, const Partition& partition,
                                const LimitSolution& limit,
                                const std::vector<TestFunction>& tests = moment_test_set());

/// Max over holes of |hole average of u/X - u/X at the hole center|, the
/// center value read by averaging the cells that touch it.
double hole_average_deviation(const LimitSolution& limit, const Partition& partition, double x);

/// Fills every hole with the discrete harmonic extension of the values on
/// A (five-point Laplace equation, Dirichlet data from the A neighbours).
/// Returns a full-grid field; A cells keep the input values exactly.
std::vector<double> discrete_extension(std::span<const double> u_on_a, const Partition& partition);

bool strictly_decreasing(std::span<const double> values);

}  // namespace homoglab
