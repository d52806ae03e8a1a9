#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "homoglab/geometry.hpp"

namespace homoglab {

/// Periodic problem on the perforated unit cell Y* = Y \ T:
///   Delta U^i = 0 in Y*,  grad U^i . eta = eta_i on the hole boundary,
///   U^i periodic, zero mean over Y*.
/// Discretized with the finite-volume face form on an m_c x m_c periodic
/// grid. The boundary load is the form applied to the coordinate y_i, which
/// on a grid is +h / -h across every i-directed face inside Y*.
struct CellProblem {
    std::optional<HoleShape> hole;
    int m_c = 0;
    Grid grid;
    std::vector<std::uint8_t> in_hole;  // per cell
    std::vector<int> perforated_cells;   // Y* cells, grid order
    std::vector<int> dof_of_cell;        // -1 in the hole
    std::array<std::vector<double>, 2> fields;  // U^1, U^2 on Y* dofs
    std::array<double, 2> residual{};     // relative residual of each solve
    std::array<int, 2> iterations{};
    double theta = 1.0;                    // |Y*| / |Y|
    Eigen::SparseMatrix<double> stiffness; // periodic face form on Y*

    /// U^i at a cell, zero inside the hole.
    double value(int i, int cell) const;
    /// Face-form load a(y_i, .) on Y* dofs.
    std::vector<double> load(int i) const;
    /// (number of i-directed faces inside Y*) * h^2.
    double face_measure(int i) const;
};

/// Throws InvalidSpec when the hole reaches the cell border or Y* splits.
CellProblem solve_cell(const std::optional<HoleShape>& hole, int m_c, double tol = 1e-12, int workers = 1);

struct EffectiveTensor {
    Eigen::Matrix2d q = Eigen::Matrix2d::Identity();         // from the flux identity
    Eigen::Matrix2d q_energy = Eigen::Matrix2d::Identity();  // from the energy identity
    double theta = 1.0;
    std::array<double, 2> face_measure{1.0, 1.0};
    int m_c = 0;
    std::string hole;
    /// |q - q_energy| / |q| in the Frobenius norm.
    double defect = 0.0;
    Eigen::Vector2d eigenvalues() const;
};

/// q_ij = (delta_ij |Y*|_i - a(y_j, U^i)) / |Y|, and the energy route
/// q_ij = a(y_i - U^i, y_j - U^j) / |Y|.
EffectiveTensor effective_tensor(const CellProblem& cp);

nlohmann::json to_json(const EffectiveTensor& t);

}  // namespace homoglab
