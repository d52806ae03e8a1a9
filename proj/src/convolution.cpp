#include "homoglab/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <thread>

#include <fftw3.h>

#include "homoglab/errors.hpp"

namespace homoglab {

namespace {

constexpr int kTileRows = 8;
constexpr int kDirectMaxSide = 64;

// FFTW's planner is not reentrant; execution with fresh arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

}  // namespace

struct GridConvolution::FftState {
    int padded = 0;
    ComplexBuffer spectrum;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~FftState() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

ConvolutionBackend resolve_backend(ConvolutionBackend requested, int m) {
    if (requested != ConvolutionBackend::Auto) return requested;
    return m <= kDirectMaxSide ? ConvolutionBackend::Direct : ConvolutionBackend::Fft;
}

GridConvolution::GridConvolution(const Kernel& kernel, const Grid& grid, ConvolutionBackend backend, int workers)
    : kernel_(kernel), grid_(grid), backend_(resolve_backend(backend, grid.m())), workers_(std::max(1, workers)) {
    const int m = grid_.m();
    const double h = grid_.h();
    width_ = 2 * m - 1;
    table_.assign(static_cast<std::size_t>(m) * width_, 0.0);
    column_reach_.assign(m, -1);
    row_reach_ = -1;
    for (int dr = 0; dr < m; ++dr) {
        double* row = table_.data() + static_cast<std::size_t>(dr) * width_ + (m - 1);
        for (int dc = 0; dc < m; ++dc) {
            const double w = kernel_(h * std::sqrt(static_cast<double>(dr) * dr + static_cast<double>(dc) * dc));
            row[dc] = w;
            row[-dc] = w;
            if (w != 0.0) column_reach_[dr] = dc;
        }
        if (column_reach_[dr] >= 0) row_reach_ = dr;
    }

    if (backend_ == ConvolutionBackend::Fft) {
        fft_ = std::make_unique<FftState>();
        const int p = 2 * m;
        fft_->padded = p;
        const std::size_t real_size = static_cast<std::size_t>(p) * p;
        const std::size_t complex_size = static_cast<std::size_t>(p) * (p / 2 + 1);
        RealBuffer kernel_pad(fftw_alloc_real(real_size));
        fft_->spectrum.reset(fftw_alloc_complex(complex_size));
        std::fill(kernel_pad.get(), kernel_pad.get() + real_size, 0.0);
        for (int dr = -(m - 1); dr <= m - 1; ++dr) {
            for (int dc = -(m - 1); dc <= m - 1; ++dc) {
                const int r = (dr + p) % p;
                const int c = (dc + p) % p;
                kernel_pad.get()[static_cast<std::size_t>(r) * p + c] = weight(std::abs(dr), std::abs(dc));
            }
        }
        RealBuffer scratch(fftw_alloc_real(real_size));
        {
            std::lock_guard lock(planner_mutex());
            fft_->forward = fftw_plan_dft_r2c_2d(p, p, scratch.get(), fft_->spectrum.get(), FFTW_ESTIMATE);
            fft_->backward = fftw_plan_dft_c2r_2d(p, p, fft_->spectrum.get(), scratch.get(), FFTW_ESTIMATE);
        }
        if (!fft_->forward || !fft_->backward) throw std::runtime_error("FFTW planning failed");
        fftw_execute_dft_r2c(fft_->forward, kernel_pad.get(), fft_->spectrum.get());
    }
}

GridConvolution::~GridConvolution() = default;
GridConvolution::GridConvolution(GridConvolution&&) noexcept = default;
GridConvolution& GridConvolution::operator=(GridConvolution&&) noexcept = default;

double GridConvolution::weight(int dr, int dc) const {
    return table_[static_cast<std::size_t>(dr) * width_ + (grid_.m() - 1) + dc];
}

void GridConvolution::apply(std::span<const double> field, std::span<double> out,
                            std::span<const std::uint8_t> target_mask) const {
    const auto cells = static_cast<std::size_t>(grid_.size());
    if (field.size() != cells || out.size() != cells || (!target_mask.empty() && target_mask.size() != cells)) {
        throw InvalidSpec("convolution field does not match the grid");
    }
    if (backend_ == ConvolutionBackend::Fft) {
        apply_fft(field, out, target_mask);
    } else {
        apply_direct(field, out, target_mask);
    }
}

void GridConvolution::apply_direct(std::span<const double> field, std::span<double> out,
                                   std::span<const std::uint8_t> target_mask) const {
    const int m = grid_.m();
    std::fill(out.begin(), out.end(), 0.0);
    // Rows with no nonzero source value contribute nothing.
    std::vector<int> source_rows;
    source_rows.reserve(m);
    for (int r = 0; r < m; ++r) {
        const auto row = field.subspan(static_cast<std::size_t>(r) * m, m);
        if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) source_rows.push_back(r);
    }
    if (source_rows.empty() || row_reach_ < 0) return;

    const int tiles = (m + kTileRows - 1) / kTileRows;
    const int workers = std::min(workers_, tiles);
    if (workers <= 1) {
        apply_direct_rows(field, out, target_mask, source_rows, 0, m);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int tile_begin = tiles * w / workers;
        const int tile_end = tiles * (w + 1) / workers;
        const int row_begin = tile_begin * kTileRows;
        const int row_end = std::min(m, tile_end * kTileRows);
        pool.emplace_back([&, row_begin, row_end] {
            apply_direct_rows(field, out, target_mask, source_rows, row_begin, row_end);
        });
    }
    for (auto& t : pool) t.join();
}

void GridConvolution::apply_direct_rows(std::span<const double> field, std::span<double> out,
                                        std::span<const std::uint8_t> target_mask,
                                        const std::vector<int>& source_rows, int row_begin, int row_end) const {
    const int m = grid_.m();
    const bool masked = !target_mask.empty();
    for (int tile = row_begin; tile < row_end; tile += kTileRows) {
        const int tile_end = std::min(row_end, tile + kTileRows);
        // Source rows outer so each source row stays in cache across the tile.
        for (int rs : source_rows) {
            if (rs + row_reach_ < tile || rs - row_reach_ >= tile_end) continue;
            const double* src = field.data() + static_cast<std::size_t>(rs) * m;
            for (int rt = tile; rt < tile_end; ++rt) {
                const int dr = std::abs(rt - rs);
                if (dr > row_reach_) continue;
                const int reach = column_reach_[dr];
                if (reach < 0) continue;
                const double* weights = table_.data() + static_cast<std::size_t>(dr) * width_ + (m - 1);
                double* dst = out.data() + static_cast<std::size_t>(rt) * m;
                const std::uint8_t* mask_row = masked ? target_mask.data() + static_cast<std::size_t>(rt) * m : nullptr;
                for (int ct = 0; ct < m; ++ct) {
                    if (mask_row && !mask_row[ct]) continue;
                    const int lo = std::max(0, ct - reach);
                    const int hi = std::min(m - 1, ct + reach);
                    const double* w = weights - ct;
                    double acc = 0.0;
                    for (int cs = lo; cs <= hi; ++cs) acc += w[cs] * src[cs];
                    dst[ct] += acc;
                }
            }
        }
    }
}

void GridConvolution::apply_fft(std::span<const double> field, std::span<double> out,
                                std::span<const std::uint8_t> target_mask) const {
    const int m = grid_.m();
    const int p = fft_->padded;
    const std::size_t real_size = static_cast<std::size_t>(p) * p;
    const std::size_t complex_size = static_cast<std::size_t>(p) * (p / 2 + 1);
    RealBuffer buffer(fftw_alloc_real(real_size));
    ComplexBuffer spectrum(fftw_alloc_complex(complex_size));
    double* buf = buffer.get();
    std::fill(buf, buf + real_size, 0.0);
    for (int r = 0; r < m; ++r) {
        std::copy_n(field.data() + static_cast<std::size_t>(r) * m, m, buf + static_cast<std::size_t>(r) * p);
    }
    fftw_execute_dft_r2c(fft_->forward, buf, spectrum.get());
    const fftw_complex* k = fft_->spectrum.get();
    fftw_complex* s = spectrum.get();
    for (std::size_t i = 0; i < complex_size; ++i) {
        const double re = s[i][0] * k[i][0] - s[i][1] * k[i][1];
        const double im = s[i][0] * k[i][1] + s[i][1] * k[i][0];
        s[i][0] = re;
        s[i][1] = im;
    }
    fftw_execute_dft_c2r(fft_->backward, s, buf);
    const double scale = 1.0 / static_cast<double>(real_size);
    const bool masked = !target_mask.empty();
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const std::size_t cell = static_cast<std::size_t>(r) * m + c;
            out[cell] = (masked && !target_mask[cell]) ? 0.0 : buf[static_cast<std::size_t>(r) * p + c] * scale;
        }
    }
}

}  // namespace homoglab
