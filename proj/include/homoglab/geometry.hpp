#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "homoglab/grid.hpp"

namespace homoglab {

enum class Configuration { LocalInHoles, NonlocalInHoles, Strips };

/// Disk of radius C/n on the 2/n lattice, i.e. radius C/2 in period units.
struct BallHole {
    double radius_factor = 0.5;
};

/// Centered axis-aligned rectangle; sides are fractions of the period side.
struct RectHole {
    double width_fraction = 0.5;
    double height_fraction = 0.5;
};

using HoleShape = std::variant<BallHole, RectHole>;

struct PartitionSpec {
    Configuration config = Configuration::LocalInHoles;
    int n = 2;
    HoleShape hole = BallHole{};
    /// Grid cells per side of one microstructure period.
    int resolution = 8;

    /// Side of one period: 2/n for holes, two strip heights for strips.
    double lattice_pitch() const;
    int periods_per_side() const;
    int grid_cells_per_side() const;
};

enum class Region : std::uint8_t { A, B };

struct Partition {
    PartitionSpec spec;
    Grid grid;
    std::vector<Region> region_of_cell;
    std::vector<int> a_cells;
    std::vector<int> b_cells;
    /// Position of a cell inside a_cells or b_cells, depending on its region.
    std::vector<int> dof_of_cell;
    double volume_a = 0.0;
    double volume_b = 0.0;
    double x_fraction = 0.0;
    /// Hole id (0-based) per cell, -1 outside holes. Empty for strips.
    std::vector<int> hole_index_of_cell;
    int hole_count = 0;
    /// Strip label k in 1..2^{n-1}, counted from the bottom. Empty for holes.
    std::vector<int> strip_index_of_cell;

    bool in_a(int cell) const { return region_of_cell[cell] == Region::A; }
    int n_a() const { return static_cast<int>(a_cells.size()); }
    int n_b() const { return static_cast<int>(b_cells.size()); }
    /// Position of the cell in the stacked (u on A, v on B) dof vector.
    int global_dof(int cell) const { return in_a(cell) ? dof_of_cell[cell] : n_a() + dof_of_cell[cell]; }
    /// Cells of each hole, in grid order.
    std::vector<std::vector<int>> hole_cells() const;
};

/// Row-major q x q membership mask of one rasterized hole in its period
/// block. A cell belongs to the hole iff its center lies inside the shape.
std::vector<std::uint8_t> rasterize_hole(const HoleShape& hole, int q);

Partition build_hole_partition(const PartitionSpec& spec);
Partition build_strip_partition(const PartitionSpec& spec);
Partition build_partition(const PartitionSpec& spec);

/// Strip spec on a fixed m x m grid (resolution derived from m).
PartitionSpec strip_spec_for_grid(int n, int m);

struct LimitFractions {
    double x = 0.0;
    double hole_fraction = 0.0;
    std::string detail;
};

/// Analytic limit of |A_n| / |Omega| as n grows.
LimitFractions limit_fractions(const PartitionSpec& spec);

std::string to_string(Configuration config);
Configuration configuration_from_string(const std::string& name);
std::string describe(const HoleShape& hole);

}  // namespace homoglab
