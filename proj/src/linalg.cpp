#include "homoglab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace homoglab {

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() = a_ * xv;
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(a_.rows()));
    for (Eigen::Index i = 0; i < a_.rows(); ++i) d[i] = a_.coeff(i, i);
    return d;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void project_out(std::span<double> x, std::span<const double> c) {
    const double cc = dot(c, c);
    if (cc == 0.0) return;
    axpy(-dot(x, c) / cc, c, x);
}

std::vector<double> apply(const LinearOperator& op, std::span<const double> x) {
    std::vector<double> y(op.size());
    op.apply(x, y);
    return y;
}

double quadratic_form(const LinearOperator& op, std::span<const double> x) { return dot(x, apply(op, x)); }

Eigen::MatrixXd to_dense(const LinearOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd dense(n, n);
    std::vector<double> e(op.size(), 0.0), col(op.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        op.apply(e, col);
        e[j] = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) dense(i, j) = col[i];
    }
    return dense;
}

}  // namespace homoglab
