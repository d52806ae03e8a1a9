// One PASS/FAIL line per acceptance criterion. Thresholds are checked here
// directly from the computed quantities, not from the experiment verdicts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "homoglab/cell.hpp"
#include "homoglab/corrector.hpp"
#include "homoglab/discretize.hpp"
#include "homoglab/errors.hpp"
#include "homoglab/experiment.hpp"
#include "homoglab/homogenized.hpp"
#include "homoglab/solve.hpp"

using namespace homoglab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const Kernel kJ(KernelFamily::TruncGaussian, 2.0);
const Kernel kG(KernelFamily::QuarticBump, 0.25);

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string seq(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
    return s + "]";
}

bool decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

double max_over_min(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

Partition hole_partition(Configuration c, int n, int q = 8) {
    PartitionSpec s;
    s.config = c;
    s.n = n;
    s.resolution = q;
    s.hole = BallHole{0.5};
    return build_partition(s);
}

ExperimentResult sweep(Scenario scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    c.n_list = {2, 4, 8};
    c.spectral = false;
    if (scenario == Scenario::Strips) c.hole.reset();
    return run_experiment(c);
}

std::vector<double> field(const ExperimentResult& r, double SweepRecord::*f) {
    std::vector<double> out;
    for (const auto& rec : r.records) out.push_back(rec.*f);
    return out;
}

Outcome kernel_admissibility() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    std::string detail;
    for (auto fam : {KernelFamily::UniformBall, KernelFamily::QuarticBump, KernelFamily::TruncGaussian}) {
        for (double r : {0.25, 2.0}) {
            const Kernel k(fam, r);
            const double mass = quadrature_mass(k);
            bool sym = true;
            for (int t = 0; t < 1000; ++t) {
                const Point x{u(rng), u(rng)}, y{u(rng), u(rng)};
                sym = sym && k.eval_pair(x, y) == k.eval_pair(y, x);
            }
            const bool good = mass >= 0.9999 && mass <= 1.0001 && k(0.0) > 0.0 && sym;
            ok = ok && good;
            detail += to_string(fam) + "(R=" + num(r) + ") mass " + num(mass) + (good ? "" : " BAD") + "; ";
        }
    }
    return {ok, detail};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    double apply_diff = 0.0, solve_diff = 0.0;
    std::vector<Partition> parts{hole_partition(Configuration::LocalInHoles, 2, 16),
                                 hole_partition(Configuration::NonlocalInHoles, 2, 16),
                                 build_partition(strip_spec_for_grid(2, 16))};
    for (const auto& p : parts) {
        const auto sys = assemble_system(p, kJ, kG, make_source({}, p.grid));
        const Eigen::MatrixXd dense = sys.materialize();
        std::vector<double> x(sys.size()), y(sys.size());
        for (int t = 0; t < 50; ++t) {
            for (double& v : x) v = nd(rng);
            sys.apply(x, y);
            const Eigen::VectorXd ref = dense * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
            for (std::size_t i = 0; i < x.size(); ++i) apply_diff = std::max(apply_diff, std::abs(y[i] - ref(i)));
        }
        SolverOptions o;
        o.tol = 1e-12;
        const auto cg = solve_constrained(sys, o).stacked();
        const auto lu = solve_bordered_dense(dense, sys.rhs(), sys.constraint());
        for (std::size_t i = 0; i < cg.size(); ++i) solve_diff = std::max(solve_diff, std::abs(cg[i] - lu[i]));
    }
    return {apply_diff <= 1e-12 && solve_diff <= 1e-8,
            "max |apply - dense| " + num(apply_diff) + " (<= 1e-12), max |CG - bordered| " + num(solve_diff) +
                " (<= 1e-8)"};
}

Outcome coercivity() {
    bool ok = true;
    std::string detail;
    for (auto c : {Configuration::LocalInHoles, Configuration::NonlocalInHoles}) {
        std::vector<double> lam;
        for (int n : {2, 4, 8}) {
            const Partition p = hole_partition(c, n);
            lam.push_back(coercivity_constant(assemble_system(p, kJ, kG, make_source({}, p.grid))).lambda_min_constrained);
        }
        const bool pos = std::all_of(lam.begin(), lam.end(), [](double v) { return v > 0.0; });
        ok = ok && pos && max_over_min(lam) <= 3.0;
        detail += to_string(c) + " lambda_min " + seq(lam) + " ratio " + num(max_over_min(lam)) + "; ";
    }
    return {ok, detail};
}

Outcome energy() {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    double worst_identity = 0.0;
    int increased = 0, draws = 0;
    for (auto c : {Configuration::LocalInHoles, Configuration::NonlocalInHoles}) {
        const Partition p = hole_partition(c, 4);
        const auto sys = assemble_system(p, kJ, kG, make_source({}, p.grid));
        SolverOptions o;
        o.tol = 1e-12;
        const auto x = solve_constrained(sys, o).stacked();
        const double e = energy_of(sys, x);
        worst_identity = std::max(worst_identity, std::abs(e + 0.5 * quadratic_form(sys, x)) / std::abs(e));
        for (int t = 0; t < 100; ++t) {
            std::vector<double> d(sys.size());
            for (double& v : d) v = nd(rng);
            project_out(d, sys.constraint());
            const double s = 1e-2 / norm2(d);
            std::vector<double> y = x;
            axpy(s, d, y);
            increased += energy_of(sys, y) > e;
            ++draws;
        }
    }
    return {worst_identity <= 1e-9 && increased == draws,
            "|E + x.Sx/2| / |E| = " + num(worst_identity) + ", " + std::to_string(increased) + "/" +
                std::to_string(draws) + " perturbations increase E"};
}

Outcome tensor() {
    const auto plain = effective_tensor(solve_cell(std::nullopt, 32));
    const double id = (plain.q - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
    const auto disk = effective_tensor(solve_cell(BallHole{0.5}, 128));
    const auto& q = disk.q;
    const auto ev = disk.eigenvalues();
    const double cap = 1.0 - std::numbers::pi / 16.0;
    const double asym = std::abs(q(0, 1) - q(1, 0)) / q.norm();
    const bool ok = id <= 1e-10 && asym <= 1e-10 && std::abs(q(0, 1)) <= 1e-3 &&
                    std::abs(q(0, 0) - q(1, 1)) <= 0.02 * q(0, 0) && ev(0) > 0.0 && ev(1) <= cap &&
                    disk.defect <= 1e-6;
    return {ok, "no hole |q - I| " + num(id) + "; disk q11 " + num(q(0, 0)) + " q22 " + num(q(1, 1)) + " q12 " +
                    num(q(0, 1)) + " asym " + num(asym) + " eig [" + num(ev(0)) + ", " + num(ev(1)) + "] cap " + num(cap) +
                    " route defect " + num(disk.defect)};
}

Outcome local_in_holes_corrector(const ExperimentResult& r) {
    const auto err = field(r, &SweepRecord::corrector_error);
    std::vector<double> mn;
    for (double v : field(r, &SweepRecord::m_n)) mn.push_back(std::abs(v));
    return {decreasing(err) && decreasing(mn), "error " + seq(err) + ", |m_n| " + seq(mn)};
}

Outcome nonlocal_in_holes_corrector(const ExperimentResult& r) {
    const auto err = field(r, &SweepRecord::corrector_error);
    return {decreasing(err), "L2(B) + H1(A) error " + seq(err)};
}

Outcome moments(const ExperimentResult& local, const ExperimentResult& strips) {
    const auto a = field(local, &SweepRecord::moment_max);
    const auto b = field(strips, &SweepRecord::moment_max);
    const bool exact_half = std::all_of(strips.limits.begin(), strips.limits.end(),
                                        [](const LimitSolution& l) { return l.x == 0.5; });
    return {a.back() < a.front() && b.back() < b.front() && exact_half,
            "LocalInHoles " + seq(a) + ", Strips " + seq(b) + (exact_half ? ", X = 1/2" : ", X != 1/2")};
}

Outcome transversality() {
    const int m = 128;
    LimitSystemSpec s;
    s.kind = LimitKind::Strips;
    s.x = 0.5;
    s.j = kJ;
    s.g = kG;
    s.f = make_source({}, Grid(m));
    const LimitSystem sys(s);
    const Grid& g = sys.grid();
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> prof(m);
        for (int r = 0; r < m; ++r) {
            const double x2 = g.center(g.index(r, 0)).x2;
            prof[r] = t == 0 ? x2 : t == 1 ? std::exp(3 * x2) : 1e3 * nd(rng);
        }
        std::vector<double> f(g.size()), out(g.size(), 0.0);
        for (int c = 0; c < g.size(); ++c) f[c] = prof[g.row(c)];
        sparse_apply_add(sys.local_block(), f, out);
        worst = std::max(worst, norm_inf(out));
    }
    return {worst <= 1e-12, "max |L g(x2)| over 20 profiles " + num(worst)};
}

Outcome compatibility() {
    const Partition p = hole_partition(Configuration::LocalInHoles, 4);
    bool raised = false;
    try {
        assemble_system(p, kJ, kG, sample_source(p.grid, [](Point x) { return std::sin(2 * M_PI * x.x1) + 0.1; }));
    } catch (const CompatibilityViolation&) {
        raised = true;
    }
    double constraint = 0.0;
    for (auto fam : {SourceFamily::Sin1, SourceFamily::Sin2, SourceFamily::BumpDipole}) {
        SourceSpec f;
        f.family = fam;
        const auto sys = assemble_system(p, kJ, kG, make_source(f, p.grid));
        constraint = std::max(constraint, std::abs(solve_constrained(sys).constraint_value));
    }
    std::vector<double> cp;
    for (int n : {2, 4, 8}) cp.push_back(poincare_constant(hole_partition(Configuration::LocalInHoles, n), kG));
    return {raised && constraint <= 1e-9 && max_over_min(cp) <= 2.0,
            std::string(raised ? "mean 0.1 rejected" : "mean 0.1 ACCEPTED") + ", constraint " + num(constraint) +
                ", C_P " + seq(cp) + " ratio " + num(max_over_min(cp))};
}

}  // namespace

int main() {
    int failures = 0;
    const auto run = [&](int id, double limit_s, const std::function<Outcome()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = out.pass && s < limit_s;
        failures += !pass;
        std::printf("criterion %2d: %s  %s  [%.2f s, limit %g s]\n", id, pass ? "PASS" : "FAIL", out.detail.c_str(), s,
                    limit_s);
        std::fflush(stdout);
    };

    run(1, 1, kernel_admissibility);
    run(2, 10, oracle_equivalence);
    run(3, 120, coercivity);
    run(4, 30, energy);
    run(5, 60, tensor);
    ExperimentResult local, strips;
    run(6, 300, [&] {
        local = sweep(Scenario::LocalInHoles);
        return local_in_holes_corrector(local);
    });
    run(7, 600, [] { return nonlocal_in_holes_corrector(sweep(Scenario::NonlocalInHoles)); });
    run(8, 600, [&] {
        strips = sweep(Scenario::Strips);
        if (local.records.empty()) local = sweep(Scenario::LocalInHoles);
        return moments(local, strips);
    });
    run(9, 60, transversality);
    run(10, 120, compatibility);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
