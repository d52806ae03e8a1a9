#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace homoglab {

/// y <- S x for a symmetric operator. Everything the solvers need.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::size_t size() const = 0;
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    virtual std::vector<double> diagonal() const = 0;
};

/// Operator view of a symmetric sparse matrix.
class SparseOperator final : public LinearOperator {
public:
    explicit SparseOperator(Eigen::SparseMatrix<double> a) : a_(std::move(a)) {}
    std::size_t size() const override { return static_cast<std::size_t>(a_.rows()); }
    void apply(std::span<const double> x, std::span<double> y) const override;
    std::vector<double> diagonal() const override;
    const Eigen::SparseMatrix<double>& matrix() const noexcept { return a_; }

private:
    Eigen::SparseMatrix<double> a_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Removes the component of x along c (orthogonal projection onto c^perp).
void project_out(std::span<double> x, std::span<const double> c);

std::vector<double> apply(const LinearOperator& op, std::span<const double> x);
double quadratic_form(const LinearOperator& op, std::span<const double> x);

/// Dense copy of an operator, built column by column from apply().
Eigen::MatrixXd to_dense(const LinearOperator& op);

}  // namespace homoglab
