#include "homoglab/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <lapacke.h>

#include "homoglab/errors.hpp"

namespace homoglab {

namespace {

constexpr int kMaxRestarts = 5;
constexpr int kMaxLanczosSteps = 600;
constexpr double kLanczosTol = 1e-6;

std::vector<double> unit(std::span<const double> c) {
    std::vector<double> out(c.begin(), c.end());
    const double nc = norm2(out);
    if (nc == 0.0) throw InvalidSpec("constraint vector is zero");
    for (double& x : out) x /= nc;
    return out;
}

void project(std::span<double> x, std::span<const double> c_unit) {
    const double s = dot(x, c_unit);
    axpy(-s, c_unit, x);
}

}  // namespace

CgResult solve_projected_cg(const LinearOperator& op, std::span<const double> b, std::span<const double> c,
                            const SolverOptions& options) {
    const std::size_t n = op.size();
    if (b.size() != n || c.size() != n) throw InvalidSpec("solver: dimension mismatch");
    const auto cu = unit(c);

    CgResult out;
    out.x.assign(n, 0.0);
    if (options.x0) {
        if (options.x0->size() != n) throw InvalidSpec("solver: starting vector has the wrong size");
        out.x = *options.x0;
        project(out.x, cu);
    }

    std::vector<double> pb(b.begin(), b.end());
    project(pb, cu);
    const double bnorm = norm2(pb);
    if (bnorm == 0.0) {
        std::fill(out.x.begin(), out.x.end(), 0.0);
        return out;
    }

    std::vector<double> inv_diag = op.diagonal();
    for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), q(n);
    const auto precondition = [&] {
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        project(z, cu);
    };
    const auto true_residual = [&] {
        op.apply(out.x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        project(r, cu);
        return norm2(r) / bnorm;
    };
    const auto drift = [&] {
        const double nx = norm2(out.x);
        return nx == 0.0 ? 0.0 : std::abs(dot(out.x, cu)) / nx;
    };

    double rel = true_residual();
    if (options.keep_history) out.history.push_back(rel);
    int it = 0;
    for (int restart = 0; restart <= kMaxRestarts && rel > options.tol; ++restart) {
        precondition();
        p = z;
        double rz = dot(r, z);
        while (rel > options.tol && it < options.max_iter) {
            op.apply(p, q);
            project(q, cu);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break;  // lost positivity: restart from the true residual
            const double alpha = rz / pq;
            axpy(alpha, p, out.x);
            axpy(-alpha, q, r);
            ++it;
            if (it % std::max(1, options.drift_check_every) == 0) {
                out.max_subspace_drift = std::max(out.max_subspace_drift, drift());
            }
            project(out.x, cu);
            rel = norm2(r) / bnorm;
            if (options.keep_history) out.history.push_back(rel);
            precondition();
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        // The recursive residual can drift from the true one; confirm.
        rel = true_residual();
        if (it >= options.max_iter) break;
    }
    out.iterations = it;
    out.relative_residual = rel;
    out.max_subspace_drift = std::max(out.max_subspace_drift, drift());
    if (rel > options.tol) {
        std::ostringstream msg;
        msg << "projected CG stopped at relative residual " << rel << " after " << it << " iterations (tol "
            << options.tol << ")";
        throw NonConvergence(msg.str(), it, out.history);
    }
    return out;
}

std::vector<double> SolutionPair::stacked() const {
    std::vector<double> x(u);
    x.insert(x.end(), v.begin(), v.end());
    return x;
}

SolutionPair solve_constrained(const DiscreteSystem& system, const SolverOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const auto cg = solve_projected_cg(system, system.rhs(), system.constraint(), options);
    SolutionPair pair;
    const auto na = static_cast<std::size_t>(system.n_a());
    pair.u.assign(cg.x.begin(), cg.x.begin() + na);
    pair.v.assign(cg.x.begin() + na, cg.x.end());
    pair.residual_norm = cg.relative_residual;
    pair.constraint_value = dot(cg.x, system.constraint());
    pair.energy = energy_of(system, cg.x);
    pair.iterations = cg.iterations;
    pair.max_subspace_drift = cg.max_subspace_drift;
    pair.history = cg.history;
    pair.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return pair;
}

double energy_of(const DiscreteSystem& system, std::span<const double> x) {
    if (x.size() != system.size()) throw InvalidSpec("energy: dimension mismatch");
    return 0.5 * quadratic_form(system, x) - dot(system.rhs(), x);
}

double energy_of(const DiscreteSystem& system, const SolutionPair& pair) {
    return energy_of(system, pair.stacked());
}

std::vector<double> solve_bordered_dense(const Eigen::MatrixXd& s, std::span<const double> b,
                                         std::span<const double> c) {
    const auto n = static_cast<lapack_int>(s.rows());
    if (s.cols() != n || static_cast<lapack_int>(b.size()) != n || static_cast<lapack_int>(c.size()) != n) {
        throw InvalidSpec("bordered solve: dimension mismatch");
    }
    const lapack_int nb = n + 1;
    std::vector<double> k(static_cast<std::size_t>(nb) * nb, 0.0);
    for (lapack_int i = 0; i < n; ++i) {
        for (lapack_int j = 0; j < n; ++j) k[static_cast<std::size_t>(i) * nb + j] = s(i, j);
        k[static_cast<std::size_t>(i) * nb + n] = c[i];
        k[static_cast<std::size_t>(n) * nb + i] = c[i];
    }
    std::vector<double> rhs(b.begin(), b.end());
    rhs.push_back(0.0);
    std::vector<lapack_int> ipiv(nb);
    const lapack_int info = LAPACKE_dsysv(LAPACK_ROW_MAJOR, 'U', nb, 1, k.data(), nb, ipiv.data(), rhs.data(), 1);
    if (info != 0) {
        throw NonConvergence("bordered LDL^T factorization failed (info " + std::to_string(info) + ")", 0, {});
    }
    rhs.pop_back();
    return rhs;
}

EigenEstimate constrained_min_eigenvalue(const Eigen::MatrixXd& s, std::span<const double> c) {
    const auto n = s.rows();
    const auto cu = unit(c);
    Eigen::Map<const Eigen::VectorXd> cv(cu.data(), n);
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - cv * cv.transpose();
    Eigen::MatrixXd m = proj * s * proj;
    m = 0.5 * (m + m.transpose());
    // Lift the c direction above the spectrum so the smallest eigenvalue is
    // the one on the constraint subspace.
    const double lift = 1.0 + m.cwiseAbs().rowwise().sum().maxCoeff();
    m += lift * cv * cv.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NonConvergence("dense eigensolver failed", 0, {});
    return {eig.eigenvalues()(0), "dense", 0};
}

EigenEstimate constrained_min_eigenvalue(const LinearOperator& op, std::span<const double> c, int max_dense) {
    const auto n = static_cast<int>(op.size());
    if (n <= max_dense) return constrained_min_eigenvalue(to_dense(op), c);

    const auto cu = unit(c);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    std::vector<double> q(n);
    for (double& x : q) x = gauss(rng);
    project(q, cu);
    const double q0 = norm2(q);
    for (double& x : q) x /= q0;

    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> w(n);
    double previous = std::numeric_limits<double>::infinity();
    const int steps_cap = std::min(kMaxLanczosSteps, n - 1);
    for (int k = 0; k < steps_cap; ++k) {
        basis.push_back(q);
        op.apply(q, w);
        project(w, cu);
        alpha.push_back(dot(w, q));
        // Full reorthogonalization, twice for stability.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& v : basis) axpy(-dot(w, v), v, w);
        }
        project(w, cu);
        const double b = norm2(w);

        const int dim = static_cast<int>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
        const double theta = eig.eigenvalues()(0);
        const double bound = std::abs(b * eig.eigenvectors()(dim - 1, 0));
        if (bound <= kLanczosTol * std::abs(theta) || b == 0.0 ||
            (std::abs(theta - previous) <= 1e-12 * std::abs(theta) && bound <= 1e-3 * std::abs(theta))) {
            return {theta, "lanczos", dim};
        }
        previous = theta;
        beta.push_back(b);
        for (int i = 0; i < n; ++i) q[i] = w[i] / b;
    }
    std::ostringstream msg;
    msg << "Lanczos did not reach relative tolerance " << kLanczosTol << " in " << steps_cap << " steps";
    throw NonConvergence(msg.str(), steps_cap, {});
}

SpectralReport coercivity_constant(const DiscreteSystem& system) {
    SpectralReport report;
    const auto est = constrained_min_eigenvalue(system, system.constraint());
    const double h2 = system.partition().grid.cell_area();
    report.lambda_min_constrained = est.value / h2;
    report.n = system.partition().spec.n;
    report.dofs = static_cast<int>(system.size());
    report.method = est.method;
    return report;
}

namespace {

/// The G block restricted to B dofs.
class InteractionOperator final : public LinearOperator {
public:
    InteractionOperator(const NonlocalForm& form, int na, int nb) : form_(form), na_(na), nb_(nb) {}
    std::size_t size() const override { return static_cast<std::size_t>(nb_); }
    void apply(std::span<const double> x, std::span<double> y) const override {
        std::vector<double> xs(static_cast<std::size_t>(na_ + nb_), 0.0), ys(xs.size(), 0.0);
        std::copy(x.begin(), x.end(), xs.begin() + na_);
        form_.apply_add(xs, ys);
        std::copy(ys.begin() + na_, ys.end(), y.begin());
    }
    std::vector<double> diagonal() const override {
        const auto d = form_.diagonal();
        return {d.begin() + na_, d.end()};
    }

private:
    const NonlocalForm& form_;
    int na_;
    int nb_;
};

void check_coupled(const Partition& p, const GridConvolution& conv) {
    const Grid& grid = p.grid;
    const int m = grid.m();
    // Cells are linked when the kernel weight between them is positive.
    // Flood fill over B using the convolution table's reach.
    const int nb = p.n_b();
    std::vector<int> seen(nb, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        const int cell = p.b_cells[k];
        const int r0 = grid.row(cell);
        const int c0 = grid.col(cell);
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                const int other = grid.index(r, c);
                if (p.in_a(other)) continue;
                const int j = p.dof_of_cell[other];
                if (seen[j]) continue;
                if (conv.weight(std::abs(r - r0), std::abs(c - c0)) > 0.0) {
                    seen[j] = 1;
                    ++reached;
                    stack.push_back(j);
                }
            }
        }
    }
    if (reached != nb) {
        throw DisconnectedRegion("region B splits into components that the kernel G does not connect (" +
                                 std::to_string(reached) + " of " + std::to_string(nb) + " cells reached)");
    }
}

}  // namespace

double poincare_constant(const Partition& partition, const Kernel& g, int max_dense) {
    auto shared = std::make_shared<const Partition>(partition);
    NonlocalForm form(g, Region::B, Region::B, shared);
    check_coupled(partition, form.convolution());
    InteractionOperator op(form, partition.n_a(), partition.n_b());
    const std::vector<double> c(partition.n_b(), 1.0);
    const auto est = constrained_min_eigenvalue(op, c, max_dense);
    if (!(est.value > 0.0)) throw DisconnectedRegion("G-form has a second null direction on B");
    return partition.grid.cell_area() / est.value;
}

nlohmann::json solve_record(const DiscreteSystem& system, const SolutionPair& pair) {
    return {
        {"dofs", system.size()},
        {"n_a", system.n_a()},
        {"n_b", system.n_b()},
        {"iterations", pair.iterations},
        {"residual", pair.residual_norm},
        {"constraint", pair.constraint_value},
        {"energy", pair.energy},
        {"seconds", pair.seconds},
    };
}

}  // namespace homoglab
