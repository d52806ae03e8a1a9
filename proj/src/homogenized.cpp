#include "homoglab/homogenized.hpp"

#include <cmath>

#include "homoglab/errors.hpp"

namespace homoglab {

Eigen::SparseMatrix<double> anisotropic_laplacian(const Grid& grid, const Eigen::Matrix2d& q) {
    const int m = grid.m();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(grid.size()) * 13);
    const auto pair = [&](int a, int b, double w) {
        t.emplace_back(a, a, w);
        t.emplace_back(b, b, w);
        t.emplace_back(a, b, -w);
        t.emplace_back(b, a, -w);
    };
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            if (c + 1 < m) pair(grid.index(r, c), grid.index(r, c + 1), q(0, 0));
            if (r + 1 < m) pair(grid.index(r, c), grid.index(r + 1, c), q(1, 1));
        }
    }
    const double q12 = 0.5 * (q(0, 1) + q(1, 0));
    if (q12 != 0.0) {
        // Vertex gradients g1 = (a1 . u) / 2h, g2 = (a2 . u) / 2h over the four
        // surrounding cells; the term 2 q12 g1 g2 h^2 becomes q12/4 (a1 a2^T + a2 a1^T).
        for (int r = 0; r + 1 < m; ++r) {
            for (int c = 0; c + 1 < m; ++c) {
                const int cells[4] = {grid.index(r, c), grid.index(r, c + 1), grid.index(r + 1, c),
                                      grid.index(r + 1, c + 1)};
                const double a1[4] = {-1.0, 1.0, -1.0, 1.0};
                const double a2[4] = {-1.0, -1.0, 1.0, 1.0};
                for (int i = 0; i < 4; ++i) {
                    for (int j = 0; j < 4; ++j) {
                        t.emplace_back(cells[i], cells[j], 0.25 * q12 * (a1[i] * a2[j] + a2[i] * a1[j]));
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> l(grid.size(), grid.size());
    l.setFromTriplets(t.begin(), t.end());
    l.prune(0.0);
    l.makeCompressed();
    return l;
}

Eigen::SparseMatrix<double> transversal_laplacian(const Grid& grid) {
    const int m = grid.m();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(grid.size()) * 3);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c + 1 < m; ++c) {
            const int a = grid.index(r, c);
            const int b = grid.index(r, c + 1);
            t.emplace_back(a, a, 1.0);
            t.emplace_back(b, b, 1.0);
            t.emplace_back(a, b, -1.0);
            t.emplace_back(b, a, -1.0);
        }
    }
    Eigen::SparseMatrix<double> l(grid.size(), grid.size());
    l.setFromTriplets(t.begin(), t.end());
    l.makeCompressed();
    return l;
}

namespace {

std::vector<double> row_sums(const GridConvolution& conv) {
    const int cells = conv.grid().size();
    std::vector<double> ones(cells, 1.0), out(cells);
    conv.apply(ones, out);
    return out;
}

}  // namespace

LimitSystem::LimitSystem(const LimitSystemSpec& spec)
    : spec_(spec),
      mode_(spec.kind == LimitKind::NonlocalInHoles ? ConstraintMode::WeightedMean : ConstraintMode::PlainMean),
      jconv_(spec.j, spec.f.grid, spec.backend, spec.workers),
      gconv_(spec.g, spec.f.grid, spec.backend, spec.workers) {
    const double x = spec_.x;
    if (!(x > 0.0 && x < 1.0)) throw InvalidSpec("volume fraction X must lie in (0, 1)");
    const Grid& grid = spec_.f.grid;
    if (grid.m() <= 0) throw InvalidSpec("limit system needs a sampled source");
    const int cells = grid.size();
    const double h2 = grid.cell_area();
    const double h4 = h2 * h2;
    jsum_ = row_sums(jconv_);
    gsum_ = row_sums(gconv_);

    double u_weight = 0.0;  // factor on diag(jsum) in the u equation
    double f_weight = 1.0;  // factor on f in the u equation
    double c_weight = 1.0;  // constraint weight on u
    switch (spec_.kind) {
        case LimitKind::LocalInHoles:
            local_.resize(cells, cells);
            u_weight = (1.0 - x) / x;
            coupling_ = -h4;
            break;
        case LimitKind::NonlocalInHoles: {
            if (!spec_.tensor) throw InvalidSpec("NonlocalInHoles limit needs the effective tensor");
            const Eigen::Matrix2d& q = *spec_.tensor;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (q + q.transpose()));
            if (!(eig.eigenvalues()(0) > 0.0)) throw InvalidSpec("effective tensor is not positive definite");
            local_ = anisotropic_laplacian(grid, q);
            u_weight = x * (1.0 - x);
            coupling_ = -h4 * x;
            f_weight = x;
            c_weight = x;
            break;
        }
        case LimitKind::Strips:
            local_ = transversal_laplacian(grid) / x;
            u_weight = (1.0 - x) / x;
            coupling_ = -h4;
            break;
    }
    diag_u_.resize(cells);
    diag_v_.resize(cells);
    for (int i = 0; i < cells; ++i) {
        diag_u_[i] = h4 * u_weight * jsum_[i];
        diag_v_[i] = h4 * (x / (1.0 - x) * jsum_[i] + gsum_[i]);
    }
    rhs_.resize(2 * static_cast<std::size_t>(cells));
    constraint_.resize(rhs_.size());
    for (int i = 0; i < cells; ++i) {
        rhs_[i] = -f_weight * spec_.f.values[i] * h2;
        rhs_[cells + i] = -spec_.f.values[i] * h2;
        constraint_[i] = c_weight * h2;
        constraint_[cells + i] = h2;
    }
}

std::size_t LimitSystem::size() const { return rhs_.size(); }

void LimitSystem::apply(std::span<const double> x, std::span<double> y) const {
    const auto cells = static_cast<std::size_t>(grid().size());
    const auto u = x.first(cells);
    const auto v = x.subspan(cells, cells);
    auto yu = y.first(cells);
    auto yv = y.subspan(cells, cells);
    const double h2 = grid().cell_area();
    const double h4 = h2 * h2;
    std::vector<double> ju(cells), jv(cells), gv(cells);
    jconv_.apply(v, jv);
    jconv_.apply(u, ju);
    gconv_.apply(v, gv);
    for (std::size_t i = 0; i < cells; ++i) {
        yu[i] = diag_u_[i] * u[i] + coupling_ * jv[i];
        yv[i] = diag_v_[i] * v[i] - h4 * gv[i] + coupling_ * ju[i];
    }
    if (local_.nonZeros() > 0) sparse_apply_add(local_, u, yu);
}

std::vector<double> LimitSystem::diagonal() const {
    const auto cells = static_cast<std::size_t>(grid().size());
    const double h2 = grid().cell_area();
    const double g0 = gconv_.weight(0, 0);
    std::vector<double> d(2 * cells);
    for (std::size_t i = 0; i < cells; ++i) {
        d[i] = diag_u_[i] + (local_.nonZeros() > 0 ? local_.coeff(static_cast<int>(i), static_cast<int>(i)) : 0.0);
        d[cells + i] = diag_v_[i] - h2 * h2 * g0;
    }
    return d;
}

std::pair<std::vector<double>, std::vector<double>> collocation_residuals(const LimitSystem& system,
                                                                          std::span<const double> u,
                                                                          std::span<const double> v) {
    const auto& spec = system.spec();
    const Grid& grid = system.grid();
    const auto cells = static_cast<std::size_t>(grid.size());
    const double x = spec.x;
    const double h2 = grid.cell_area();
    std::vector<double> ju(cells), jv(cells), gv(cells), lu(cells, 0.0);
    system.j_conv().apply(v, jv);
    system.j_conv().apply(u, ju);
    system.g_conv().apply(v, gv);
    const auto& js = system.j_row_sums();
    const auto& gs = system.g_row_sums();
    const auto& f = spec.f.values;

    // The diffusion term: div(Q grad u) or the transversal Laplacian, as a
    // plain (unscaled) five-point expression.
    if (spec.kind != LimitKind::LocalInHoles) {
        Eigen::SparseMatrix<double> l = spec.kind == LimitKind::Strips ? transversal_laplacian(grid)
                                                                       : anisotropic_laplacian(grid, *spec.tensor);
        sparse_apply_add(l, u, lu);
        for (double& val : lu) val = -val / h2;
    }

    std::vector<double> ru(cells), rv(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double int_jv = jv[i] * h2;
        const double int_ju = ju[i] * h2;
        const double int_g = (gv[i] - gs[i] * v[i]) * h2;
        const double mass_j = js[i] * h2;
        switch (spec.kind) {
            case LimitKind::LocalInHoles:
            case LimitKind::Strips:
                ru[i] = lu[i] + x * int_jv - (1.0 - x) * mass_j * u[i] - f[i] * x;
                rv[i] = (1.0 - x) * int_g + (1.0 - x) * int_ju - x * mass_j * v[i] - f[i] * (1.0 - x);
                break;
            case LimitKind::NonlocalInHoles:
                ru[i] = lu[i] + x * int_jv - x * (1.0 - x) * mass_j * u[i] - f[i] * x;
                rv[i] = (1.0 - x) * int_g + x * (1.0 - x) * int_ju - x * mass_j * v[i] - f[i] * (1.0 - x);
                break;
        }
    }
    return {std::move(ru), std::move(rv)};
}

SolverOptions limit_solver_options() {
    SolverOptions o;
    o.tol = 1e-12;
    o.keep_history = false;
    return o;
}

LimitSolution solve_limit(const LimitSystemSpec& spec, const SolverOptions& options) {
    const LimitSystem system(spec);
    const auto cg = solve_projected_cg(system, system.rhs(), system.constraint(), options);
    const auto cells = static_cast<std::size_t>(system.grid().size());
    LimitSolution s;
    s.kind = spec.kind;
    s.x = spec.x;
    s.grid = system.grid();
    s.u.assign(cg.x.begin(), cg.x.begin() + cells);
    s.v.assign(cg.x.begin() + cells, cg.x.end());
    s.constraint_mode = system.constraint_mode();
    s.constraint_value = dot(cg.x, system.constraint());
    s.solver_residual = cg.relative_residual;
    s.iterations = cg.iterations;
    const auto [ru, rv] = collocation_residuals(system, s.u, s.v);
    s.residual_u = norm_inf(ru);
    s.residual_v = norm_inf(rv);
    return s;
}

LimitSolution solve_limit_local_in_holes(const LimitSystemSpec& spec, const SolverOptions& options) {
    if (spec.kind != LimitKind::LocalInHoles) throw InvalidSpec("expected a LocalInHoles limit spec");
    return solve_limit(spec, options);
}

LimitSolution solve_limit_nonlocal_in_holes(const LimitSystemSpec& spec, const SolverOptions& options) {
    if (spec.kind != LimitKind::NonlocalInHoles) throw InvalidSpec("expected a NonlocalInHoles limit spec");
    return solve_limit(spec, options);
}

LimitSolution solve_limit_strips(const LimitSystemSpec& spec, const SolverOptions& options) {
    if (spec.kind != LimitKind::Strips) throw InvalidSpec("expected a Strips limit spec");
    return solve_limit(spec, options);
}

std::string to_string(LimitKind kind) {
    switch (kind) {
        case LimitKind::LocalInHoles: return "LocalInHoles";
        case LimitKind::NonlocalInHoles: return "NonlocalInHoles";
        case LimitKind::Strips: return "Strips";
    }
    return "?";
}

nlohmann::json to_json(const LimitSolution& s) {
    return {
        {"kind", to_string(s.kind)},
        {"X", s.x},
        {"m", s.grid.m()},
        {"constraint_mode", s.constraint_mode == ConstraintMode::WeightedMean ? "WeightedMean" : "PlainMean"},
        {"constraint_value", s.constraint_value},
        {"residual_u", s.residual_u},
        {"residual_v", s.residual_v},
        {"solver_residual", s.solver_residual},
        {"iterations", s.iterations},
    };
}

}  // namespace homoglab
