#include "homoglab/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "homoglab/errors.hpp"

namespace homoglab {

namespace {

constexpr int kMaxCellsPerSide = 1 << 13;

void check_hole_shape(const HoleShape& hole) {
    if (const auto* ball = std::get_if<BallHole>(&hole)) {
        if (!(ball->radius_factor > 0.0 && ball->radius_factor < 1.0)) {
            throw InvalidSpec("ball hole radius factor must lie in (0, 1)");
        }
    } else {
        const auto& rect = std::get<RectHole>(hole);
        if (!(rect.width_fraction > 0.0 && rect.width_fraction < 1.0 && rect.height_fraction > 0.0 &&
              rect.height_fraction < 1.0)) {
            throw InvalidSpec("rectangular hole fractions must lie in (0, 1)");
        }
    }
}

void finalize(Partition& p) {
    const int cells = p.grid.size();
    p.dof_of_cell.assign(cells, -1);
    p.a_cells.clear();
    p.b_cells.clear();
    for (int cell = 0; cell < cells; ++cell) {
        if (p.region_of_cell[cell] == Region::A) {
            p.dof_of_cell[cell] = static_cast<int>(p.a_cells.size());
            p.a_cells.push_back(cell);
        } else {
            p.dof_of_cell[cell] = static_cast<int>(p.b_cells.size());
            p.b_cells.push_back(cell);
        }
    }
    const double area = p.grid.cell_area();
    p.volume_a = static_cast<double>(p.a_cells.size()) * area;
    p.volume_b = static_cast<double>(p.b_cells.size()) * area;
    p.x_fraction = static_cast<double>(p.a_cells.size()) / static_cast<double>(cells);
    if (p.a_cells.empty() || p.b_cells.empty()) {
        throw InvalidSpec("partition has an empty region");
    }
}

}  // namespace

double PartitionSpec::lattice_pitch() const {
    if (config == Configuration::Strips) {
        return 2.0 / std::ldexp(1.0, n - 1);
    }
    return 2.0 / n;
}

int PartitionSpec::periods_per_side() const {
    if (config == Configuration::Strips) {
        return n >= 2 ? (1 << (n - 2)) : 0;
    }
    return n / 2;
}

int PartitionSpec::grid_cells_per_side() const { return periods_per_side() * resolution; }

std::vector<std::vector<int>> Partition::hole_cells() const {
    std::vector<std::vector<int>> out(hole_count);
    for (int cell = 0; cell < static_cast<int>(hole_index_of_cell.size()); ++cell) {
        if (hole_index_of_cell[cell] >= 0) out[hole_index_of_cell[cell]].push_back(cell);
    }
    return out;
}

std::vector<std::uint8_t> rasterize_hole(const HoleShape& hole, int q) {
    if (q < 1) throw InvalidSpec("resolution must be positive");
    check_hole_shape(hole);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(q) * q, 0);
    // Offsets of cell centers from the block center, in units of half a cell.
    for (int b = 0; b < q; ++b) {
        const long dy = 2L * b + 1 - q;
        for (int a = 0; a < q; ++a) {
            const long dx = 2L * a + 1 - q;
            bool inside = false;
            if (const auto* ball = std::get_if<BallHole>(&hole)) {
                const double radius = ball->radius_factor * q;
                inside = static_cast<double>(dx * dx + dy * dy) < radius * radius;
            } else {
                const auto& rect = std::get<RectHole>(hole);
                inside = std::abs(static_cast<double>(dx)) < rect.width_fraction * q &&
                         std::abs(static_cast<double>(dy)) < rect.height_fraction * q;
            }
            mask[static_cast<std::size_t>(b) * q + a] = inside ? 1 : 0;
        }
    }
    return mask;
}

Partition build_hole_partition(const PartitionSpec& spec) {
    if (spec.config == Configuration::Strips) {
        throw InvalidSpec("build_hole_partition called with a strip configuration");
    }
    if (spec.n < 2 || spec.n % 2 != 0) {
        throw InvalidSpec("hole configurations need an even n >= 2 so the 2/n lattice tiles the unit square");
    }
    const int q = spec.resolution;
    const auto mask = rasterize_hole(spec.hole, q);
    int filled = 0;
    bool touches_border = false;
    for (int b = 0; b < q; ++b) {
        for (int a = 0; a < q; ++a) {
            if (!mask[static_cast<std::size_t>(b) * q + a]) continue;
            ++filled;
            if (a == 0 || b == 0 || a == q - 1 || b == q - 1) touches_border = true;
        }
    }
    if (filled == 0) {
        std::ostringstream msg;
        msg << "empty hole: " << describe(spec.hole) << " covers no cell center at resolution " << q;
        throw InvalidSpec(msg.str());
    }
    if (touches_border) {
        throw InvalidSpec("hole reaches the boundary of its period block; holes must stay separated and interior");
    }
    const int periods = spec.periods_per_side();
    const int m = periods * q;
    if (m > kMaxCellsPerSide) throw InvalidSpec("grid too large");

    Partition p;
    p.spec = spec;
    p.grid = Grid(m);
    p.region_of_cell.assign(p.grid.size(), Region::B);
    p.hole_index_of_cell.assign(p.grid.size(), -1);
    p.hole_count = periods * periods;
    const Region hole_region = spec.config == Configuration::LocalInHoles ? Region::A : Region::B;
    const Region matrix_region = hole_region == Region::A ? Region::B : Region::A;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int cell = p.grid.index(r, c);
            const bool in_hole = mask[static_cast<std::size_t>(r % q) * q + (c % q)] != 0;
            p.region_of_cell[cell] = in_hole ? hole_region : matrix_region;
            if (in_hole) p.hole_index_of_cell[cell] = (r / q) * periods + (c / q);
        }
    }
    finalize(p);
    return p;
}

Partition build_strip_partition(const PartitionSpec& spec) {
    if (spec.config != Configuration::Strips) {
        throw InvalidSpec("build_strip_partition called with a hole configuration");
    }
    if (spec.n < 2) throw InvalidSpec("strips need n >= 2");
    if (spec.n > 14) throw InvalidSpec("strip index n too large for a desk-scale grid");
    if (spec.resolution < 2 || spec.resolution % 2 != 0) {
        throw InvalidSpec("grid side must be a multiple of the strip count 2^(n-1)");
    }
    const int m = spec.grid_cells_per_side();
    if (m > kMaxCellsPerSide) throw InvalidSpec("grid too large");
    const int strip_height = spec.resolution / 2;

    Partition p;
    p.spec = spec;
    p.grid = Grid(m);
    p.region_of_cell.assign(p.grid.size(), Region::B);
    p.strip_index_of_cell.assign(p.grid.size(), 0);
    for (int r = 0; r < m; ++r) {
        const int k = r / strip_height + 1;
        for (int c = 0; c < m; ++c) {
            const int cell = p.grid.index(r, c);
            p.strip_index_of_cell[cell] = k;
            p.region_of_cell[cell] = (k % 2 == 0) ? Region::A : Region::B;
        }
    }
    finalize(p);
    return p;
}

Partition build_partition(const PartitionSpec& spec) {
    return spec.config == Configuration::Strips ? build_strip_partition(spec) : build_hole_partition(spec);
}

PartitionSpec strip_spec_for_grid(int n, int m) {
    if (n < 2 || n > 14) throw InvalidSpec("strips need 2 <= n <= 14");
    const int strips = 1 << (n - 1);
    if (m <= 0 || m % strips != 0) {
        throw InvalidSpec("grid side " + std::to_string(m) + " is not a multiple of the strip count " +
                          std::to_string(strips));
    }
    PartitionSpec spec;
    spec.config = Configuration::Strips;
    spec.n = n;
    spec.resolution = 2 * (m / strips);
    return spec;
}

LimitFractions limit_fractions(const PartitionSpec& spec) {
    LimitFractions out;
    if (spec.config == Configuration::Strips) {
        out.x = 0.5;
        out.hole_fraction = 0.0;
        out.detail = "half of the equal-height strips";
        return out;
    }
    check_hole_shape(spec.hole);
    if (const auto* ball = std::get_if<BallHole>(&spec.hole)) {
        out.hole_fraction = std::numbers::pi * ball->radius_factor * ball->radius_factor / 4.0;
    } else {
        const auto& rect = std::get<RectHole>(spec.hole);
        out.hole_fraction = rect.width_fraction * rect.height_fraction;
    }
    if (spec.config == Configuration::LocalInHoles) {
        out.x = out.hole_fraction;
        out.detail = "A is the union of holes";
    } else {
        out.x = 1.0 - out.hole_fraction;
        out.detail = "A is the perforated matrix";
    }
    return out;
}

std::string to_string(Configuration config) {
    switch (config) {
        case Configuration::LocalInHoles: return "LocalInHoles";
        case Configuration::NonlocalInHoles: return "NonlocalInHoles";
        case Configuration::Strips: return "Strips";
    }
    return "?";
}

Configuration configuration_from_string(const std::string& name) {
    if (name == "LocalInHoles") return Configuration::LocalInHoles;
    if (name == "NonlocalInHoles") return Configuration::NonlocalInHoles;
    if (name == "Strips") return Configuration::Strips;
    throw InvalidSpec("unknown configuration '" + name + "'");
}

std::string describe(const HoleShape& hole) {
    std::ostringstream os;
    if (const auto* ball = std::get_if<BallHole>(&hole)) {
        os << "ball(C=" << ball->radius_factor << ")";
    } else {
        const auto& rect = std::get<RectHole>(hole);
        os << "rect(" << rect.width_fraction << "x" << rect.height_fraction << ")";
    }
    return os.str();
}

}  // namespace homoglab
