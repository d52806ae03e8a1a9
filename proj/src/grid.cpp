#include "homoglab/grid.hpp"

#include "homoglab/errors.hpp"

namespace homoglab {

Grid::Grid(int m) : m_(m), h_(m > 0 ? 1.0 / m : 0.0) {
    if (m <= 0) throw InvalidSpec("grid needs at least one cell per side");
}

}  // namespace homoglab
