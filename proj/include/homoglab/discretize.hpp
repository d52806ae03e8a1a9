#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "homoglab/convolution.hpp"
#include "homoglab/geometry.hpp"
#include "homoglab/kernels.hpp"
#include "homoglab/linalg.hpp"

namespace homoglab {

/// Source sampled at cell centers.
struct SourceField {
    Grid grid;
    std::vector<double> values;

    /// Midpoint integral over the unit square (equal to the mean).
    double integral() const;
};

SourceField sample_source(const Grid& grid, const std::function<double(Point)>& f);

/// Built-in sources. All are mean-free on the midpoint grid: the sines by
/// symmetry, the dipole because its two bumps are translates by (1/2, 1/4),
/// which is a whole number of cells whenever m is a multiple of 4.
enum class SourceFamily { Zero, Sin1, Sin2, BumpDipole };

struct SourceSpec {
    SourceFamily family = SourceFamily::Sin1;
    double amplitude = 1.0;
    double bump_radius = 0.2;
};

std::function<double(Point)> source_function(const SourceSpec& spec);
SourceField make_source(const SourceSpec& spec, const Grid& grid);
std::string to_string(SourceFamily family);
SourceFamily source_family_from_string(const std::string& name);

enum class ConstraintMode { PlainMean, WeightedMean };

struct AssemblyOptions {
    double tol_compat = 1e-10;
    /// Subtract the discrete mean of f instead of rejecting it.
    bool mean_correct = false;
    /// Drop the J transmission block (only meaningful for diagnostics).
    bool include_transmission = true;
    bool check_coupling_support = true;
    ConvolutionBackend backend = ConvolutionBackend::Auto;
    int workers = 1;
};

/// Finite-volume Neumann Laplacian on the A cells: one unit-weight term
/// (u_j - u_i)(phi_j - phi_i) per face shared by two A cells. Faces on the
/// boundary of A are simply absent.
Eigen::SparseMatrix<double> assemble_local_stiffness(const Partition& partition);

/// One nonlocal block of the bilinear form on the stacked (u on A, v on B)
/// dof vector, with midpoint weights K(x_i - x_k) h^4.
///
/// rows == cols:  1/2 sum_{i,k in R} K_ik h^4 (x_k - x_i)(y_k - y_i)
/// rows != cols:      sum_{i in R1, k in R2} K_ik h^4 (x_i - x_k)(y_i - y_k)
class NonlocalForm {
public:
    NonlocalForm(const Kernel& kernel, Region rows, Region cols, std::shared_ptr<const Partition> partition,
                 ConvolutionBackend backend = ConvolutionBackend::Auto, int workers = 1);

    /// y += B x
    void apply_add(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    /// Dense block evaluated pair by pair from the kernel.
    Eigen::MatrixXd materialize() const;

    const GridConvolution& convolution() const noexcept { return conv_; }
    Region rows() const noexcept { return rows_; }
    Region cols() const noexcept { return cols_; }

private:
    void scatter(std::span<const double> x, Region region, std::vector<double>& field) const;

    std::shared_ptr<const Partition> partition_;
    Region rows_;
    Region cols_;
    double scale_;
    GridConvolution conv_;
    std::vector<std::uint8_t> row_mask_;
    std::vector<std::uint8_t> col_mask_;
    std::vector<double> row_weight_sum_;  // per grid cell in rows: sum over cols of K
    std::vector<double> col_weight_sum_;  // per grid cell in cols: sum over rows of K
};

NonlocalForm assemble_nonlocal_form(const Kernel& kernel, Region rows, Region cols, const Partition& partition,
                                    ConvolutionBackend backend = ConvolutionBackend::Auto);

/// S = S_loc (+) 0 + S_J + S_G with rhs -f h^2 and the unweighted mean
/// constraint c_i = h^2.
class DiscreteSystem final : public LinearOperator {
public:
    DiscreteSystem(std::shared_ptr<const Partition> partition, const Kernel& j, const Kernel& g, SourceField source,
                   const AssemblyOptions& options);

    std::size_t size() const override;
    void apply(std::span<const double> x, std::span<double> y) const override;
    std::vector<double> diagonal() const override;

    /// Dense S assembled without the convolution tables (oracle path).
    Eigen::MatrixXd materialize() const;

    const Partition& partition() const noexcept { return *partition_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }
    const std::vector<double>& constraint() const noexcept { return constraint_; }
    ConstraintMode constraint_mode() const noexcept { return ConstraintMode::PlainMean; }
    const SourceField& source() const noexcept { return source_; }
    double h() const noexcept { return partition_->grid.h(); }
    int n_a() const noexcept { return partition_->n_a(); }
    int n_b() const noexcept { return partition_->n_b(); }

    const Eigen::SparseMatrix<double>& local_stiffness() const noexcept { return local_; }
    const NonlocalForm* transmission_form() const noexcept { return j_form_.get(); }
    const NonlocalForm& interaction_form() const noexcept { return *g_form_; }

private:
    std::shared_ptr<const Partition> partition_;
    Eigen::SparseMatrix<double> local_;
    std::unique_ptr<NonlocalForm> j_form_;
    std::unique_ptr<NonlocalForm> g_form_;
    SourceField source_;
    std::vector<double> rhs_;
    std::vector<double> constraint_;
};

/// Throws CompatibilityViolation when |sum f h^2| > tol_compat, unless
/// mean correction was requested.
DiscreteSystem assemble_system(const Partition& partition, const Kernel& j, const Kernel& g, const SourceField& f,
                               const AssemblyOptions& options = {});

/// Sparse y += A x on a span pair.
void sparse_apply_add(const Eigen::SparseMatrix<double>& a, std::span<const double> x, std::span<double> y);

}  // namespace homoglab
