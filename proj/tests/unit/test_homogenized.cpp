#include <doctest.h>

#include <cmath>

#include "homoglab/errors.hpp"
#include "homoglab/homogenized.hpp"
#include "homoglab/linalg.hpp"

using namespace homoglab;

namespace {

LimitSystemSpec base_spec(LimitKind kind, int m, SourceSpec f = {}) {
    LimitSystemSpec s;
    s.kind = kind;
    s.x = kind == LimitKind::Strips ? 0.5 : (kind == LimitKind::LocalInHoles ? 0.2 : 0.8);
    s.j = Kernel(KernelFamily::TruncGaussian, 2.0);
    s.g = Kernel(KernelFamily::QuarticBump, 0.25);
    s.f = make_source(f, Grid(m));
    if (kind == LimitKind::NonlocalInHoles) s.tensor = Eigen::Matrix2d{{0.7, 0.0}, {0.0, 0.7}};
    return s;
}

const LimitKind kKinds[] = {LimitKind::LocalInHoles, LimitKind::NonlocalInHoles, LimitKind::Strips};

}  // namespace

TEST_CASE("laplacian blocks annihilate the right functions") {
    const Grid g(16);
    const auto lx = transversal_laplacian(g);
    const auto lq = anisotropic_laplacian(g, Eigen::Matrix2d{{1.0, 0.3}, {0.3, 2.0}});
    std::vector<double> ones(g.size(), 1.0), x2(g.size()), x1(g.size()), out(g.size());
    for (int c = 0; c < g.size(); ++c) {
        x1[c] = g.center(c).x1;
        x2[c] = std::exp(g.center(c).x2);
    }
    std::fill(out.begin(), out.end(), 0.0);
    sparse_apply_add(lq, ones, out);
    CHECK(norm_inf(out) <= 1e-13);
    std::fill(out.begin(), out.end(), 0.0);
    sparse_apply_add(lx, x2, out);
    CHECK(norm_inf(out) == 0.0);
    std::fill(out.begin(), out.end(), 0.0);
    sparse_apply_add(lx, x1, out);
    CHECK(norm_inf(out) > 0.0);
    // Symmetric.
    CHECK((Eigen::MatrixXd(lq) - Eigen::MatrixXd(lq).transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("limit systems: zero source, residuals, constraint, uniqueness") {
    for (auto kind : kKinds) {
        CAPTURE(to_string(kind));
        {
            SourceSpec zero;
            zero.family = SourceFamily::Zero;
            const auto sol = solve_limit(base_spec(kind, 16, zero), limit_solver_options());
            CHECK(norm_inf(sol.u) == 0.0);
            CHECK(norm_inf(sol.v) == 0.0);
        }
        const auto spec = base_spec(kind, 32);
        const auto sol = solve_limit(spec, limit_solver_options());
        CHECK(sol.residual_u <= 1e-8);
        CHECK(sol.residual_v <= 1e-8);
        CHECK(std::abs(sol.constraint_value) <= 1e-12);
        auto opts = limit_solver_options();
        std::vector<double> x0(2 * spec.f.grid.size());
        for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = std::sin(0.3 * i);
        opts.x0 = x0;
        const auto again = solve_limit(spec, opts);
        for (std::size_t i = 0; i < sol.u.size(); ++i) {
            CHECK(std::abs(sol.u[i] - again.u[i]) <= 1e-9);
            CHECK(std::abs(sol.v[i] - again.v[i]) <= 1e-9);
        }
    }
}

TEST_CASE("limit operators are symmetric with a one-dimensional kernel") {
    for (auto kind : kKinds) {
        CAPTURE(to_string(kind));
        const auto spec = base_spec(kind, 8);
        const LimitSystem sys(spec);
        const Eigen::MatrixXd d = to_dense(sys);
        CHECK((d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-15 * d.cwiseAbs().maxCoeff());
        // Constant pairs (a, b) with a (1 - X) = b X when A carries the local
        // operator in holes or strips, and b = (1 - X) a when u is the
        // extended field.
        const double x = spec.x;
        const double a = kind == LimitKind::NonlocalInHoles ? 1.0 : x;
        const double b = 1.0 - x;
        std::vector<double> null(sys.size()), out(sys.size());
        std::fill(null.begin(), null.begin() + sys.size() / 2, a);
        std::fill(null.begin() + sys.size() / 2, null.end(), b);
        sys.apply(null, out);
        CHECK(norm_inf(out) <= 1e-14 * d.cwiseAbs().maxCoeff());
        CHECK(dot(sys.constraint(), null) > 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d, Eigen::EigenvaluesOnly);
        CHECK(std::abs(eig.eigenvalues()(0)) <= 1e-12 * eig.eigenvalues()(d.rows() - 1));
        CHECK(eig.eigenvalues()(1) > 1e-8 * eig.eigenvalues()(d.rows() - 1));
    }
}

TEST_CASE("energy identity a(sol, sol) = -F(sol)") {
    for (auto kind : kKinds) {
        const auto spec = base_spec(kind, 24);
        const LimitSystem sys(spec);
        const auto sol = solve_limit(spec, limit_solver_options());
        std::vector<double> x(sol.u);
        x.insert(x.end(), sol.v.begin(), sol.v.end());
        const double a = quadratic_form(sys, x);
        const double f = dot(sys.rhs(), x);
        CHECK(a == doctest::Approx(f).epsilon(1e-9));
    }
}

TEST_CASE("swap symmetry with a symmetric source and isotropic tensor") {
    const int m = 24;
    auto spec = base_spec(LimitKind::NonlocalInHoles, m);
    // sin(2 pi x1) + sin(2 pi x2) is symmetric under the swap and mean-free.
    spec.f = sample_source(Grid(m), [](Point p) { return std::sin(2 * M_PI * p.x1) + std::sin(2 * M_PI * p.x2); });
    const auto sol = solve_limit(spec, limit_solver_options());
    const Grid& g = sol.grid;
    double worst = 0.0;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            worst = std::max(worst, std::abs(sol.u[g.index(r, c)] - sol.u[g.index(c, r)]));
            worst = std::max(worst, std::abs(sol.v[g.index(r, c)] - sol.v[g.index(c, r)]));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("limit spec validation") {
    auto s = base_spec(LimitKind::LocalInHoles, 8);
    s.x = 1.0;
    CHECK_THROWS_AS(LimitSystem{s}, InvalidSpec);
    auto t = base_spec(LimitKind::NonlocalInHoles, 8);
    t.tensor.reset();
    CHECK_THROWS_AS(LimitSystem{t}, InvalidSpec);
    t.tensor = Eigen::Matrix2d{{1.0, 2.0}, {2.0, 1.0}};
    CHECK_THROWS_AS(LimitSystem{t}, InvalidSpec);
    CHECK_THROWS_AS(solve_limit_strips(base_spec(LimitKind::LocalInHoles, 8), limit_solver_options()), InvalidSpec);
}
