#include "homoglab/corrector.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "homoglab/errors.hpp"

namespace homoglab {

namespace {

void check_fraction(double x) {
    if (!(x > 0.0 && x < 1.0)) throw InvalidSpec("volume fraction X must lie in (0, 1)");
}

void check_same_grid(const LimitSolution& limit, const Partition& partition) {
    if (!(limit.grid == partition.grid)) throw InvalidSpec("limit solution and partition use different grids");
}

void finish(CorrectorPair& pair, const Partition& p) {
    const double h2 = p.grid.cell_area();
    double sa = 0.0, sb = 0.0;
    for (double w : pair.w1) sa += w;
    for (double w : pair.w2) sb += w;
    pair.m_n = (sa + sb) * h2;
    const double shift_a = pair.m_n / (2.0 * p.volume_a);
    const double shift_b = pair.m_n / (2.0 * p.volume_b);
    pair.w1_adjusted = pair.w1;
    pair.w2_adjusted = pair.w2;
    double adjusted = 0.0;
    for (double& w : pair.w1_adjusted) {
        w -= shift_a;
        adjusted += w;
    }
    for (double& w : pair.w2_adjusted) {
        w -= shift_b;
        adjusted += w;
    }
    pair.adjusted_constraint = adjusted * h2;
}

std::vector<double> v_part(const LimitSolution& limit, const Partition& p, double x) {
    std::vector<double> w2(p.n_b());
    for (int k = 0; k < p.n_b(); ++k) w2[k] = limit.v[p.b_cells[k]] / (1.0 - x);
    return w2;
}

}  // namespace

CorrectorPair build_corrector_hole_average(const LimitSolution& limit, const Partition& partition, double x) {
    check_fraction(x);
    check_same_grid(limit, partition);
    if (partition.spec.config != Configuration::LocalInHoles) {
        throw InvalidSpec("hole-average corrector needs the LocalInHoles partition");
    }
    CorrectorPair pair;
    pair.kind = CorrectorKind::HoleAverage;
    std::vector<double> hole_mean(partition.hole_count, 0.0);
    std::vector<int> hole_size(partition.hole_count, 0);
    for (int cell : partition.a_cells) {
        const int j = partition.hole_index_of_cell[cell];
        hole_mean[j] += limit.u[cell] / x;
        ++hole_size[j];
    }
    for (int j = 0; j < partition.hole_count; ++j) {
        if (hole_size[j] > 0) hole_mean[j] /= hole_size[j];
    }
    pair.w1.resize(partition.n_a());
    for (int k = 0; k < partition.n_a(); ++k) {
        pair.w1[k] = hole_mean[partition.hole_index_of_cell[partition.a_cells[k]]];
    }
    pair.w2 = v_part(limit, partition, x);
    finish(pair, partition);
    return pair;
}

std::vector<double> grid_gradient(const Grid& grid, std::span<const double> field, int d) {
    const int m = grid.m();
    const double h = grid.h();
    std::vector<double> g(grid.size(), 0.0);
    if (m < 2) return g;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int pos = d == 0 ? c : r;
            const auto at = [&](int k) { return d == 0 ? field[grid.index(r, k)] : field[grid.index(k, c)]; };
            double val;
            if (pos == 0) {
                val = (at(1) - at(0)) / h;
            } else if (pos == m - 1) {
                val = (at(m - 1) - at(m - 2)) / h;
            } else {
                val = (at(pos + 1) - at(pos - 1)) / (2.0 * h);
            }
            g[grid.index(r, c)] = val;
        }
    }
    return g;
}

CorrectorPair build_corrector_gradient_cell(const LimitSolution& limit, const CellProblem& cell, int n,
                                            const Partition& partition, double x) {
    check_fraction(x);
    check_same_grid(limit, partition);
    if (partition.spec.config != Configuration::NonlocalInHoles) {
        throw InvalidSpec("gradient-cell corrector needs the NonlocalInHoles partition");
    }
    if (n != partition.spec.n) throw InvalidSpec("corrector index n differs from the partition's n");
    const int q = partition.spec.resolution;
    if (cell.m_c != q) {
        throw InvalidSpec("cell grid (" + std::to_string(cell.m_c) + ") does not match the partition period (" +
                          std::to_string(q) + " cells)");
    }
    const double eps = partition.spec.lattice_pitch();
    const Grid& grid = partition.grid;
    const auto g1 = grid_gradient(grid, limit.u, 0);
    const auto g2 = grid_gradient(grid, limit.u, 1);

    CorrectorPair pair;
    pair.kind = CorrectorKind::GradientCell;
    pair.w1.resize(partition.n_a());
    for (int k = 0; k < partition.n_a(); ++k) {
        const int c = partition.a_cells[k];
        const int local = cell.grid.index(grid.row(c) % q, grid.col(c) % q);
        pair.w1[k] = limit.u[c] - eps * (cell.value(0, local) * g1[c] + cell.value(1, local) * g2[c]);
    }
    pair.w2 = v_part(limit, partition, x);
    finish(pair, partition);
    return pair;
}

CorrectorError corrector_error(const SolutionPair& solution, const CorrectorPair& corrector,
                               const Partition& partition) {
    if (solution.u.size() != corrector.w1_adjusted.size() || solution.v.size() != corrector.w2_adjusted.size()) {
        throw InvalidSpec("solution and corrector sizes differ");
    }
    const Grid& grid = partition.grid;
    const double h2 = grid.cell_area();
    std::vector<double> ea(solution.u.size());
    double sa = 0.0, sb = 0.0;
    for (std::size_t k = 0; k < ea.size(); ++k) {
        ea[k] = solution.u[k] - corrector.w1_adjusted[k];
        sa += ea[k] * ea[k];
    }
    for (std::size_t k = 0; k < solution.v.size(); ++k) {
        const double e = solution.v[k] - corrector.w2_adjusted[k];
        sb += e * e;
    }
    double semi = 0.0;
    const int m = grid.m();
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int cell = grid.index(r, c);
            if (!partition.in_a(cell)) continue;
            for (int next : {c + 1 < m ? grid.index(r, c + 1) : -1, r + 1 < m ? grid.index(r + 1, c) : -1}) {
                if (next < 0 || !partition.in_a(next)) continue;
                const double d = ea[partition.dof_of_cell[cell]] - ea[partition.dof_of_cell[next]];
                semi += d * d;
            }
        }
    }
    CorrectorError out;
    out.l2_a = std::sqrt(sa * h2);
    out.l2_b = std::sqrt(sb * h2);
    out.h1_seminorm_a = std::sqrt(semi);
    out.total = corrector.kind == CorrectorKind::GradientCell
                    ? std::sqrt(out.l2_a * out.l2_a + out.h1_seminorm_a * out.h1_seminorm_a) + out.l2_b
                    : out.l2_a + out.l2_b;
    return out;
}

const std::vector<TestFunction>& moment_test_set() {
    static const std::vector<TestFunction> tests = [] {
        const double tp = 2.0 * std::numbers::pi;
        return std::vector<TestFunction>{
            {"1", [](Point) { return 1.0; }},
            {"x1", [](Point p) { return p.x1; }},
            {"x2", [](Point p) { return p.x2; }},
            {"x1x2", [](Point p) { return p.x1 * p.x2; }},
            {"sin2pi_x1", [tp](Point p) { return std::sin(tp * p.x1); }},
            {"sin2pi_x2", [tp](Point p) { return std::sin(tp * p.x2); }},
        };
    }();
    return tests;
}

MomentErrors weak_moment_errors(const SolutionPair& solution, const Partition& partition,
                                const LimitSolution& limit, const std::vector<TestFunction>& tests) {
    check_same_grid(limit, partition);
    const Grid& grid = partition.grid;
    const double h2 = grid.cell_area();
    const double u_weight = limit.kind == LimitKind::NonlocalInHoles ? limit.x : 1.0;
    MomentErrors out;
    for (const auto& t : tests) {
        double un = 0.0, vn = 0.0, ul = 0.0, vl = 0.0;
        for (int k = 0; k < partition.n_a(); ++k) un += solution.u[k] * t.phi(grid.center(partition.a_cells[k]));
        for (int k = 0; k < partition.n_b(); ++k) vn += solution.v[k] * t.phi(grid.center(partition.b_cells[k]));
        for (int cell = 0; cell < grid.size(); ++cell) {
            const double phi = t.phi(grid.center(cell));
            ul += limit.u[cell] * phi;
            vl += limit.v[cell] * phi;
        }
        const double eu = std::abs(un - u_weight * ul) * h2;
        const double ev = std::abs(vn - vl) * h2;
        out.names.push_back(t.name);
        out.u_error.push_back(eu);
        out.v_error.push_back(ev);
        out.max_error = std::max({out.max_error, eu, ev});
    }
    return out;
}

double hole_average_deviation(const LimitSolution& limit, const Partition& partition, double x) {
    check_fraction(x);
    check_same_grid(limit, partition);
    if (partition.hole_count == 0) throw InvalidSpec("partition has no holes");
    const Grid& grid = partition.grid;
    const int q = partition.spec.resolution;
    const int periods = partition.spec.periods_per_side();
    const auto holes = partition.hole_cells();
    double worst = 0.0;
    for (int j = 0; j < partition.hole_count; ++j) {
        double mean = 0.0;
        for (int cell : holes[j]) mean += limit.u[cell] / x;
        mean /= static_cast<double>(holes[j].size());
        const int br = j / periods;
        const int bc = j % periods;
        double center = 0.0;
        if (q % 2 == 0) {
            const int r0 = br * q + q / 2;
            const int c0 = bc * q + q / 2;
            center = 0.25 *
                     (limit.u[grid.index(r0 - 1, c0 - 1)] + limit.u[grid.index(r0 - 1, c0)] +
                      limit.u[grid.index(r0, c0 - 1)] + limit.u[grid.index(r0, c0)]) /
                     x;
        } else {
            center = limit.u[grid.index(br * q + q / 2, bc * q + q / 2)] / x;
        }
        worst = std::max(worst, std::abs(mean - center));
    }
    return worst;
}

std::vector<double> discrete_extension(std::span<const double> u_on_a, const Partition& partition) {
    if (u_on_a.size() != static_cast<std::size_t>(partition.n_a())) {
        throw InvalidSpec("extension input does not match the A cells");
    }
    const Grid& grid = partition.grid;
    const int m = grid.m();
    std::vector<double> out(grid.size(), 0.0);
    for (int k = 0; k < partition.n_a(); ++k) out[partition.a_cells[k]] = u_on_a[k];
    if (partition.hole_count == 0) return out;
    for (const auto& hole : partition.hole_cells()) {
        if (hole.empty() || partition.in_a(hole.front())) continue;  // only holes in B are filled
        const int n = static_cast<int>(hole.size());
        std::vector<int> local(grid.size(), -1);
        for (int i = 0; i < n; ++i) local[hole[i]] = i;
        std::vector<Eigen::Triplet<double>> t;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            const int cell = hole[i];
            const int r = grid.row(cell);
            const int c = grid.col(cell);
            int degree = 0;
            const int nbrs[4][2] = {{r, c - 1}, {r, c + 1}, {r - 1, c}, {r + 1, c}};
            for (const auto& rc : nbrs) {
                if (rc[0] < 0 || rc[0] >= m || rc[1] < 0 || rc[1] >= m) continue;
                const int other = grid.index(rc[0], rc[1]);
                ++degree;
                if (local[other] >= 0) {
                    t.emplace_back(i, local[other], -1.0);
                } else {
                    b(i) += out[other];
                }
            }
            t.emplace_back(i, i, static_cast<double>(degree));
        }
        Eigen::SparseMatrix<double> a(n, n);
        a.setFromTriplets(t.begin(), t.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
        if (solver.info() != Eigen::Success) throw NonConvergence("hole extension factorization failed", 0, {});
        const Eigen::VectorXd sol = solver.solve(b);
        for (int i = 0; i < n; ++i) out[hole[i]] = sol(i);
    }
    return out;
}

bool strictly_decreasing(std::span<const double> values) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] < values[i - 1])) return false;
    }
    return true;
}

}  // namespace homoglab
