#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "homoglab/discretize.hpp"
#include "homoglab/errors.hpp"
#include "homoglab/solve.hpp"

using namespace homoglab;

namespace {

const Kernel kJ(KernelFamily::TruncGaussian, 2.0);
const Kernel kG(KernelFamily::QuarticBump, 0.25);

DiscreteSystem strips_system(int m, double amplitude = 1.0) {
    const Partition p = build_partition(strip_spec_for_grid(2, m));
    SourceSpec f;
    f.amplitude = amplitude;
    return assemble_system(p, kJ, kG, make_source(f, p.grid));
}

DiscreteSystem hole_system(Configuration c, int n, int q, AssemblyOptions o = {}) {
    PartitionSpec s;
    s.config = c;
    s.n = n;
    s.resolution = q;
    const Partition p = build_partition(s);
    return assemble_system(p, kJ, kG, make_source({}, p.grid), o);
}

// Orthonormal basis of c-perp from a full QR of c.
Eigen::MatrixXd complement_basis(std::span<const double> c) {
    const auto n = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXd cm = Eigen::Map<const Eigen::VectorXd>(c.data(), n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cm);
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(n - 1);
}

}  // namespace

TEST_CASE("zero rhs gives the zero solution") {
    const Partition p = build_partition(strip_spec_for_grid(2, 8));
    const auto sys = assemble_system(p, kJ, kG, make_source({SourceFamily::Zero}, p.grid));
    const auto sol = solve_constrained(sys);
    CHECK(sol.iterations == 0);
    CHECK(norm_inf(sol.stacked()) == 0.0);
}

TEST_CASE("8x8 strips: symmetric S and constrained solution") {
    const auto sys = strips_system(8);
    const Eigen::MatrixXd s = sys.materialize();
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const auto sol = solve_constrained(sys);
    CHECK(std::abs(dot(sys.constraint(), sol.stacked())) <= 1e-15);
    CHECK(sol.residual_norm <= 1e-10);
}

TEST_CASE("CG matches the bordered dense solve") {
    for (int m : {8, 16}) {
        const auto sys = strips_system(m);
        const auto sol = solve_constrained(sys);
        const auto ref = solve_bordered_dense(sys.materialize(), sys.rhs(), sys.constraint());
        const auto x = sol.stacked();
        double diff = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) diff = std::max(diff, std::abs(x[i] - ref[i]));
        CHECK(diff <= 1e-8 * std::max(1.0, norm_inf(ref)));
    }
    const auto hs = hole_system(Configuration::NonlocalInHoles, 2, 8);
    const auto sol = solve_constrained(hs);
    const auto ref = solve_bordered_dense(hs.materialize(), hs.rhs(), hs.constraint());
    const auto x = sol.stacked();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - ref[i]) <= 1e-8 * norm_inf(ref));
}

TEST_CASE("solution is linear in f") {
    const auto a = solve_constrained(strips_system(16, 1.0)).stacked();
    const auto b = solve_constrained(strips_system(16, 2.0)).stacked();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i] - 2.0 * a[i]) <= 1e-12 * norm_inf(b) + 1e-14);
}

TEST_CASE("energy identity and minimality") {
    const auto sys = hole_system(Configuration::LocalInHoles, 2, 8);
    const std::vector<double> zero(sys.size(), 0.0);
    CHECK(energy_of(sys, zero) == 0.0);
    SolverOptions o;
    o.tol = 1e-12;
    const auto sol = solve_constrained(sys, o);
    const auto x = sol.stacked();
    const double e = energy_of(sys, x);
    CHECK(e < 0.0);
    CHECK(std::abs(e + 0.5 * quadratic_form(sys, x)) <= 1e-9 * std::abs(e) + 1e-12);
    CHECK(sol.energy == doctest::Approx(e).epsilon(1e-14));

    std::mt19937_64 rng(42);
    std::normal_distribution<double> nd;
    int increased = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> d(sys.size());
        for (double& v : d) v = nd(rng);
        project_out(d, sys.constraint());
        const double scale = 1e-2 / norm2(d);
        std::vector<double> y = x;
        axpy(scale, d, y);
        increased += energy_of(sys, y) > e;
    }
    CHECK(increased == 100);
}

TEST_CASE("non-convergence carries the residual history") {
    const auto sys = strips_system(16);
    SolverOptions o;
    o.max_iter = 3;
    try {
        solve_constrained(sys, o);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.iterations() == 3);
        CHECK(e.residual_history().size() >= 3);
    }
}

TEST_CASE("starting vector does not change the answer") {
    const auto sys = hole_system(Configuration::NonlocalInHoles, 2, 8);
    SolverOptions o;
    o.tol = 1e-12;
    const auto a = solve_constrained(sys, o).stacked();
    std::vector<double> x0(sys.size());
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = std::cos(1.7 * i);
    o.x0 = x0;
    const auto b = solve_constrained(sys, o).stacked();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9 * norm_inf(a));
}

TEST_CASE("constrained minimum eigenvalue against an explicit basis of c-perp") {
    const auto sys = hole_system(Configuration::LocalInHoles, 2, 8);
    const Eigen::MatrixXd s = sys.materialize();
    const Eigen::MatrixXd q = complement_basis(sys.constraint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q.transpose() * s * q, Eigen::EigenvaluesOnly);
    const double ref = eig.eigenvalues()(0);
    CHECK(ref > 0.0);
    const auto dense = constrained_min_eigenvalue(sys, sys.constraint());
    CHECK(dense.method == "dense");
    CHECK(dense.value == doctest::Approx(ref).epsilon(1e-10));
    const auto lanczos = constrained_min_eigenvalue(sys, sys.constraint(), 0);
    CHECK(lanczos.method == "lanczos");
    CHECK(lanczos.value == doctest::Approx(ref).epsilon(1e-5));
    const auto rep = coercivity_constant(sys);
    CHECK(rep.lambda_min_constrained == doctest::Approx(ref / sys.partition().grid.cell_area()).epsilon(1e-10));
}

TEST_CASE("dropping the transmission block loses coercivity") {
    AssemblyOptions o;
    o.include_transmission = false;
    const auto sys = hole_system(Configuration::LocalInHoles, 2, 8, o);
    CHECK(std::abs(constrained_min_eigenvalue(sys, sys.constraint()).value) <= 1e-8);
}

TEST_CASE("Poincare constant of two B cells") {
    // m = 2 strips: B is the bottom row, two cells at distance h = 1/2.
    const Partition p = build_partition(strip_spec_for_grid(2, 2));
    REQUIRE(p.n_b() == 2);
    const Kernel g(KernelFamily::QuarticBump, 1.0);
    const double h = p.grid.h();
    const double w = g.eval_pair(p.grid.center(p.b_cells[0]), p.grid.center(p.b_cells[1]));
    CHECK(poincare_constant(p, g) == doctest::Approx(h * h / (2.0 * w * std::pow(h, 4))).epsilon(1e-12));
}

TEST_CASE("Poincare constant rejects G-disconnected B") {
    // Holes in B with a short G: each hole is its own component.
    PartitionSpec s;
    s.config = Configuration::NonlocalInHoles;
    s.n = 4;
    const Partition p = build_partition(s);
    CHECK_THROWS_AS(poincare_constant(p, Kernel(KernelFamily::QuarticBump, 0.05)), DisconnectedRegion);
}
