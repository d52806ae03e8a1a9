#include "homoglab/discretize.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "homoglab/errors.hpp"

namespace homoglab {

double SourceField::integral() const {
    double total = 0.0;
    for (double v : values) total += v;
    return total * grid.cell_area();
}

SourceField sample_source(const Grid& grid, const std::function<double(Point)>& f) {
    SourceField out{grid, std::vector<double>(grid.size())};
    for (int cell = 0; cell < grid.size(); ++cell) out.values[cell] = f(grid.center(cell));
    return out;
}

std::function<double(Point)> source_function(const SourceSpec& spec) {
    const double a = spec.amplitude;
    const double two_pi = 2.0 * std::numbers::pi;
    switch (spec.family) {
        case SourceFamily::Zero:
            return [](Point) { return 0.0; };
        case SourceFamily::Sin1:
            return [a, two_pi](Point p) { return a * std::sin(two_pi * p.x1); };
        case SourceFamily::Sin2:
            return [a, two_pi](Point p) { return a * std::sin(two_pi * p.x2); };
        case SourceFamily::BumpDipole: {
            const double s = spec.bump_radius;
            if (!(s > 0.0 && s <= 0.25)) throw InvalidSpec("dipole bump radius must lie in (0, 0.25]");
            const auto bump = [s](double d1, double d2) {
                const double t = 1.0 - (d1 * d1 + d2 * d2) / (s * s);
                return t > 0.0 ? t * t * t : 0.0;
            };
            return [a, bump](Point p) { return a * (bump(p.x1 - 0.25, p.x2 - 0.25) - bump(p.x1 - 0.75, p.x2 - 0.5)); };
        }
    }
    throw InvalidSpec("unknown source family");
}

SourceField make_source(const SourceSpec& spec, const Grid& grid) {
    return sample_source(grid, source_function(spec));
}

std::string to_string(SourceFamily family) {
    switch (family) {
        case SourceFamily::Zero: return "zero";
        case SourceFamily::Sin1: return "sin1";
        case SourceFamily::Sin2: return "sin2";
        case SourceFamily::BumpDipole: return "bump-dipole";
    }
    return "?";
}

SourceFamily source_family_from_string(const std::string& name) {
    if (name == "zero") return SourceFamily::Zero;
    if (name == "sin1") return SourceFamily::Sin1;
    if (name == "sin2") return SourceFamily::Sin2;
    if (name == "bump-dipole") return SourceFamily::BumpDipole;
    throw InvalidSpec("unknown source family '" + name + "'");
}

Eigen::SparseMatrix<double> assemble_local_stiffness(const Partition& partition) {
    const Grid& grid = partition.grid;
    const int m = grid.m();
    const int na = partition.n_a();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(na) * 5);
    std::vector<double> diag(na, 0.0);
    const auto face = [&](int c0, int c1) {
        if (!partition.in_a(c0) || !partition.in_a(c1)) return;
        const int i = partition.dof_of_cell[c0];
        const int j = partition.dof_of_cell[c1];
        diag[i] += 1.0;
        diag[j] += 1.0;
        triplets.emplace_back(i, j, -1.0);
        triplets.emplace_back(j, i, -1.0);
    };
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int cell = grid.index(r, c);
            if (c + 1 < m) face(cell, grid.index(r, c + 1));
            if (r + 1 < m) face(cell, grid.index(r + 1, c));
        }
    }
    for (int i = 0; i < na; ++i) {
        if (diag[i] != 0.0) triplets.emplace_back(i, i, diag[i]);
    }
    Eigen::SparseMatrix<double> s(na, na);
    s.setFromTriplets(triplets.begin(), triplets.end());
    s.makeCompressed();
    return s;
}

void sparse_apply_add(const Eigen::SparseMatrix<double>& a, std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() += a * xv;
}

namespace {

std::vector<std::uint8_t> region_mask(const Partition& p, Region region) {
    std::vector<std::uint8_t> mask(p.grid.size(), 0);
    for (int cell = 0; cell < p.grid.size(); ++cell) mask[cell] = p.region_of_cell[cell] == region ? 1 : 0;
    return mask;
}

const std::vector<int>& cells_of(const Partition& p, Region region) {
    return region == Region::A ? p.a_cells : p.b_cells;
}

int dof_offset(const Partition& p, Region region) { return region == Region::A ? 0 : p.n_a(); }

}  // namespace

NonlocalForm::NonlocalForm(const Kernel& kernel, Region rows, Region cols, std::shared_ptr<const Partition> partition,
                           ConvolutionBackend backend, int workers)
    : partition_(std::move(partition)),
      rows_(rows),
      cols_(cols),
      conv_(kernel, partition_->grid, backend, workers) {
    const Grid& grid = partition_->grid;
    const double h = grid.h();
    scale_ = h * h * h * h;
    row_mask_ = region_mask(*partition_, rows_);
    col_mask_ = region_mask(*partition_, cols_);

    std::vector<double> indicator(grid.size());
    row_weight_sum_.assign(grid.size(), 0.0);
    for (int c = 0; c < grid.size(); ++c) indicator[c] = col_mask_[c];
    conv_.apply(indicator, row_weight_sum_, row_mask_);
    if (rows_ == cols_) {
        col_weight_sum_ = row_weight_sum_;
    } else {
        col_weight_sum_.assign(grid.size(), 0.0);
        for (int c = 0; c < grid.size(); ++c) indicator[c] = row_mask_[c];
        conv_.apply(indicator, col_weight_sum_, col_mask_);
    }
}

void NonlocalForm::scatter(std::span<const double> x, Region region, std::vector<double>& field) const {
    const Partition& p = *partition_;
    field.assign(p.grid.size(), 0.0);
    const auto& cells = cells_of(p, region);
    const int offset = dof_offset(p, region);
    for (std::size_t k = 0; k < cells.size(); ++k) field[cells[k]] = x[offset + k];
}

void NonlocalForm::apply_add(std::span<const double> x, std::span<double> y) const {
    const Partition& p = *partition_;
    const std::size_t total = static_cast<std::size_t>(p.n_a() + p.n_b());
    if (x.size() != total || y.size() != total) throw InvalidSpec("nonlocal form: vector size mismatch");
    std::vector<double> field;
    std::vector<double> conv(p.grid.size());

    // Rows side: h^4 (s_i x_i - sum_{k in cols} K_ik x_k) for i in rows.
    scatter(x, cols_, field);
    conv_.apply(field, conv, row_mask_);
    {
        const auto& cells = cells_of(p, rows_);
        const int offset = dof_offset(p, rows_);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const int cell = cells[k];
            y[offset + k] += scale_ * (row_weight_sum_[cell] * x[offset + k] - conv[cell]);
        }
    }
    if (rows_ == cols_) return;

    // Cols side of the mixed form.
    scatter(x, rows_, field);
    conv_.apply(field, conv, col_mask_);
    const auto& cells = cells_of(p, cols_);
    const int offset = dof_offset(p, cols_);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const int cell = cells[k];
        y[offset + k] += scale_ * (col_weight_sum_[cell] * x[offset + k] - conv[cell]);
    }
}

std::vector<double> NonlocalForm::diagonal() const {
    const Partition& p = *partition_;
    std::vector<double> d(static_cast<std::size_t>(p.n_a() + p.n_b()), 0.0);
    const double self = rows_ == cols_ ? conv_.weight(0, 0) : 0.0;
    {
        const auto& cells = cells_of(p, rows_);
        const int offset = dof_offset(p, rows_);
        for (std::size_t k = 0; k < cells.size(); ++k) d[offset + k] = scale_ * (row_weight_sum_[cells[k]] - self);
    }
    if (rows_ != cols_) {
        const auto& cells = cells_of(p, cols_);
        const int offset = dof_offset(p, cols_);
        for (std::size_t k = 0; k < cells.size(); ++k) d[offset + k] = scale_ * col_weight_sum_[cells[k]];
    }
    return d;
}

Eigen::MatrixXd NonlocalForm::materialize() const {
    const Partition& p = *partition_;
    const Grid& grid = p.grid;
    const Kernel& k = conv_.kernel();
    const int total = p.n_a() + p.n_b();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total, total);
    const auto& rcells = cells_of(p, rows_);
    const auto& ccells = cells_of(p, cols_);
    const int roff = dof_offset(p, rows_);
    const int coff = dof_offset(p, cols_);
    for (std::size_t a = 0; a < rcells.size(); ++a) {
        const Point xa = grid.center(rcells[a]);
        for (std::size_t b = 0; b < ccells.size(); ++b) {
            if (rows_ == cols_ && a == b) continue;
            const double w = scale_ * k.eval_pair(xa, grid.center(ccells[b]));
            if (w == 0.0) continue;
            const int i = roff + static_cast<int>(a);
            const int j = coff + static_cast<int>(b);
            if (rows_ == cols_) {
                // each unordered pair appears twice in the loop, each time with weight 1/2 * 2
                out(i, i) += w;
                out(i, j) -= w;
            } else {
                out(i, i) += w;
                out(j, j) += w;
                out(i, j) -= w;
                out(j, i) -= w;
            }
        }
    }
    return out;
}

NonlocalForm assemble_nonlocal_form(const Kernel& kernel, Region rows, Region cols, const Partition& partition,
                                    ConvolutionBackend backend) {
    return NonlocalForm(kernel, rows, cols, std::make_shared<const Partition>(partition), backend);
}

DiscreteSystem::DiscreteSystem(std::shared_ptr<const Partition> partition, const Kernel& j, const Kernel& g,
                               SourceField source, const AssemblyOptions& options)
    : partition_(std::move(partition)), source_(std::move(source)) {
    const Partition& p = *partition_;
    if (!(source_.grid == p.grid)) throw InvalidSpec("source grid does not match the partition grid");
    local_ = assemble_local_stiffness(p);
    if (options.include_transmission) {
        j_form_ = std::make_unique<NonlocalForm>(j, Region::A, Region::B, partition_, options.backend, options.workers);
    }
    g_form_ = std::make_unique<NonlocalForm>(g, Region::B, Region::B, partition_, options.backend, options.workers);

    const double h2 = p.grid.cell_area();
    const int total = p.n_a() + p.n_b();
    rhs_.assign(total, 0.0);
    constraint_.assign(total, h2);
    for (int cell = 0; cell < p.grid.size(); ++cell) rhs_[p.global_dof(cell)] = -source_.values[cell] * h2;
}

std::size_t DiscreteSystem::size() const { return static_cast<std::size_t>(n_a() + n_b()); }

void DiscreteSystem::apply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    const auto na = static_cast<std::size_t>(n_a());
    sparse_apply_add(local_, x.first(na), y.first(na));
    if (j_form_) j_form_->apply_add(x, y);
    g_form_->apply_add(x, y);
}

std::vector<double> DiscreteSystem::diagonal() const {
    std::vector<double> d = g_form_->diagonal();
    if (j_form_) {
        const auto dj = j_form_->diagonal();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dj[i];
    }
    for (int i = 0; i < n_a(); ++i) d[i] += local_.coeff(i, i);
    return d;
}

Eigen::MatrixXd DiscreteSystem::materialize() const {
    Eigen::MatrixXd s = g_form_->materialize();
    if (j_form_) s += j_form_->materialize();
    s.topLeftCorner(n_a(), n_a()) += Eigen::MatrixXd(local_);
    return s;
}

DiscreteSystem assemble_system(const Partition& partition, const Kernel& j, const Kernel& g, const SourceField& f,
                               const AssemblyOptions& options) {
    if (!(f.grid == partition.grid)) throw InvalidSpec("source grid does not match the partition grid");
    if (options.include_transmission && options.check_coupling_support) {
        const auto report = validate_coupling_support(j);
        if (!report.ok) throw InvalidSpec("coupling kernel J rejected: " + report.message);
    }
    SourceField source = f;
    const double integral = source.integral();
    if (std::abs(integral) > options.tol_compat) {
        if (!options.mean_correct) {
            std::ostringstream msg;
            msg << "source is not mean-free: integral " << integral << " exceeds tolerance " << options.tol_compat;
            throw CompatibilityViolation(msg.str(), integral);
        }
        for (double& v : source.values) v -= integral;
    }
    return DiscreteSystem(std::make_shared<const Partition>(partition), j, g, std::move(source), options);
}

}  // namespace homoglab
