#pragma once

#include <cstddef>

namespace homoglab {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Uniform m x m cell grid on the unit square. Cells are stored row-major with
/// the row index running along x2 and the column index along x1.
class Grid {
public:
    Grid() = default;
    explicit Grid(int m);

    int m() const noexcept { return m_; }
    double h() const noexcept { return h_; }
    int size() const noexcept { return m_ * m_; }
    double cell_area() const noexcept { return h_ * h_; }

    int index(int row, int col) const noexcept { return row * m_ + col; }
    int row(int cell) const noexcept { return cell / m_; }
    int col(int cell) const noexcept { return cell % m_; }

    Point center(int cell) const noexcept {
        return {(col(cell) + 0.5) * h_, (row(cell) + 0.5) * h_};
    }

    bool operator==(const Grid& other) const noexcept { return m_ == other.m_; }

private:
    int m_ = 0;
    double h_ = 0.0;
};

}  // namespace homoglab
