#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "homoglab/grid.hpp"
#include "homoglab/kernels.hpp"

namespace homoglab {

enum class ConvolutionBackend { Auto, Direct, Fft };

/// Auto picks the tiled direct sum up to 64 x 64 grids and FFT above.
ConvolutionBackend resolve_backend(ConvolutionBackend requested, int m);

/// Discrete kernel sum on a uniform grid with midpoint weights:
///
///   out[i] = sum_k K(x_i - x_k) field[k]
///
/// The weights depend only on the cell offset, so they are tabulated once.
/// The direct backend walks cache-sized tiles of target rows; every target
/// accumulates its sources in a fixed order, so results do not depend on
/// the worker count. The FFT backend evaluates the same linear (zero
/// padded) convolution in O(M log M).
class GridConvolution {
public:
    GridConvolution(const Kernel& kernel, const Grid& grid, ConvolutionBackend backend = ConvolutionBackend::Auto,
                    int workers = 1);
    ~GridConvolution();
    GridConvolution(GridConvolution&&) noexcept;
    GridConvolution& operator=(GridConvolution&&) noexcept;
    GridConvolution(const GridConvolution&) = delete;
    GridConvolution& operator=(const GridConvolution&) = delete;

    /// Targets with target_mask[i] == 0 are written as zero (the direct
    /// backend skips them entirely). An empty mask selects every cell.
    void apply(std::span<const double> field, std::span<double> out,
               std::span<const std::uint8_t> target_mask = {}) const;

    /// K(h * sqrt(dr^2 + dc^2)) for non-negative offsets.
    double weight(int dr, int dc) const;

    ConvolutionBackend backend() const noexcept { return backend_; }
    const Grid& grid() const noexcept { return grid_; }
    const Kernel& kernel() const noexcept { return kernel_; }

private:
    void apply_direct(std::span<const double> field, std::span<double> out,
                      std::span<const std::uint8_t> target_mask) const;
    void apply_direct_rows(std::span<const double> field, std::span<double> out,
                           std::span<const std::uint8_t> target_mask, const std::vector<int>& source_rows,
                           int row_begin, int row_end) const;
    void apply_fft(std::span<const double> field, std::span<double> out,
                   std::span<const std::uint8_t> target_mask) const;

    Kernel kernel_;
    Grid grid_;
    ConvolutionBackend backend_;
    int workers_;
    int width_ = 0;                 // 2m - 1
    std::vector<double> table_;     // m rows of width_ entries, centered at column m - 1
    std::vector<int> column_reach_; // largest |dc| with a nonzero weight, per |dr|
    int row_reach_ = 0;

    struct FftState;
    std::unique_ptr<FftState> fft_;
};

}  // namespace homoglab
