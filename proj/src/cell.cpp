#include "homoglab/cell.hpp"

#include <cmath>
#include <thread>

#include "homoglab/errors.hpp"
#include "homoglab/linalg.hpp"
#include "homoglab/solve.hpp"

namespace homoglab {

double CellProblem::value(int i, int cell) const {
    const int d = dof_of_cell[cell];
    return d < 0 ? 0.0 : fields[i][d];
}

std::vector<double> CellProblem::load(int i) const {
    const int m = m_c;
    const double h = grid.h();
    std::vector<double> b(perforated_cells.size(), 0.0);
    for (int cell : perforated_cells) {
        const int r = grid.row(cell);
        const int c = grid.col(cell);
        // i = 0 walks along x1 (columns), i = 1 along x2 (rows).
        const int next = i == 0 ? grid.index(r, (c + 1) % m) : grid.index((r + 1) % m, c);
        if (in_hole[next]) continue;
        b[dof_of_cell[next]] += h;
        b[dof_of_cell[cell]] -= h;
    }
    return b;
}

double CellProblem::face_measure(int i) const {
    const int m = m_c;
    int faces = 0;
    for (int cell : perforated_cells) {
        const int r = grid.row(cell);
        const int c = grid.col(cell);
        const int next = i == 0 ? grid.index(r, (c + 1) % m) : grid.index((r + 1) % m, c);
        if (!in_hole[next]) ++faces;
    }
    return faces * grid.cell_area();
}

CellProblem solve_cell(const std::optional<HoleShape>& hole, int m_c, double tol, int workers) {
    if (m_c < 2) throw InvalidSpec("cell grid needs at least 2 cells per side");
    CellProblem cp;
    cp.hole = hole;
    cp.m_c = m_c;
    cp.grid = Grid(m_c);
    const Grid& grid = cp.grid;
    const int m = m_c;
    cp.in_hole.assign(grid.size(), 0);
    if (hole) {
        cp.in_hole = rasterize_hole(*hole, m);
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                if (cp.in_hole[grid.index(r, c)] && (r == 0 || c == 0 || r == m - 1 || c == m - 1)) {
                    throw InvalidSpec("cell hole touches the cell boundary");
                }
            }
        }
    }
    cp.dof_of_cell.assign(grid.size(), -1);
    for (int cell = 0; cell < grid.size(); ++cell) {
        if (cp.in_hole[cell]) continue;
        cp.dof_of_cell[cell] = static_cast<int>(cp.perforated_cells.size());
        cp.perforated_cells.push_back(cell);
    }
    const int n = static_cast<int>(cp.perforated_cells.size());
    if (n == 0) throw InvalidSpec("cell hole covers the whole cell");
    cp.theta = static_cast<double>(n) / grid.size();

    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> diag(n, 0.0);
    std::vector<std::vector<int>> neighbours(n);
    for (int cell : cp.perforated_cells) {
        const int r = grid.row(cell);
        const int c = grid.col(cell);
        for (int next : {grid.index(r, (c + 1) % m), grid.index((r + 1) % m, c)}) {
            if (cp.in_hole[next]) continue;
            const int i = cp.dof_of_cell[cell];
            const int j = cp.dof_of_cell[next];
            diag[i] += 1.0;
            diag[j] += 1.0;
            triplets.emplace_back(i, j, -1.0);
            triplets.emplace_back(j, i, -1.0);
            neighbours[i].push_back(j);
            neighbours[j].push_back(i);
        }
    }
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, diag[i]);
    cp.stiffness.resize(n, n);
    cp.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    cp.stiffness.makeCompressed();

    std::vector<int> seen(n, 0), stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        for (int j : neighbours[k]) {
            if (!seen[j]) {
                seen[j] = 1;
                ++reached;
                stack.push_back(j);
            }
        }
    }
    if (reached != n) throw InvalidSpec("perforated cell is disconnected; the cell problem would be singular");

    const SparseOperator op(cp.stiffness);
    const std::vector<double> ones(n, 1.0);
    SolverOptions options;
    options.tol = tol;
    options.keep_history = false;
    const auto solve_one = [&](int i) {
        const auto b = cp.load(i);
        if (norm_inf(b) == 0.0) {
            cp.fields[i].assign(n, 0.0);
            return;
        }
        auto result = solve_projected_cg(op, b, ones, options);
        cp.fields[i] = std::move(result.x);
        cp.residual[i] = result.relative_residual;
        cp.iterations[i] = result.iterations;
    };
    if (workers > 1) {
        std::thread second(solve_one, 1);
        solve_one(0);
        second.join();
    } else {
        solve_one(0);
        solve_one(1);
    }
    return cp;
}

Eigen::Vector2d EffectiveTensor::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues();
}

EffectiveTensor effective_tensor(const CellProblem& cp) {
    EffectiveTensor t;
    t.theta = cp.theta;
    t.m_c = cp.m_c;
    t.hole = cp.hole ? describe(*cp.hole) : "none";
    const std::array<std::vector<double>, 2> loads{cp.load(0), cp.load(1)};
    t.face_measure = {cp.face_measure(0), cp.face_measure(1)};
    const auto n = static_cast<Eigen::Index>(cp.perforated_cells.size());
    std::array<Eigen::VectorXd, 2> ku;
    for (int i = 0; i < 2; ++i) {
        Eigen::Map<const Eigen::VectorXd> ui(cp.fields[i].data(), n);
        ku[i] = cp.stiffness * ui;
    }
    // |Y| = 1.
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double id = i == j ? t.face_measure[i] : 0.0;
            const double yj_ui = dot(loads[j], cp.fields[i]);
            const double yi_uj = dot(loads[i], cp.fields[j]);
            const double ui_uj = dot(cp.fields[i], std::span<const double>(ku[j].data(), ku[j].size()));
            t.q(i, j) = id - yj_ui;
            t.q_energy(i, j) = id - yj_ui - yi_uj + ui_uj;
        }
    }
    const double qn = t.q.norm();
    t.defect = qn > 0.0 ? (t.q - t.q_energy).norm() / qn : 0.0;
    return t;
}

nlohmann::json to_json(const EffectiveTensor& t) {
    const auto ev = t.eigenvalues();
    return {
        {"q", {{t.q(0, 0), t.q(0, 1)}, {t.q(1, 0), t.q(1, 1)}}},
        {"q_energy", {{t.q_energy(0, 0), t.q_energy(0, 1)}, {t.q_energy(1, 0), t.q_energy(1, 1)}}},
        {"theta", t.theta},
        {"face_measure", {t.face_measure[0], t.face_measure[1]}},
        {"eigenvalues", {ev(0), ev(1)}},
        {"m_c", t.m_c},
        {"hole_spec", t.hole},
        {"defect", t.defect},
    };
}

}  // namespace homoglab
