#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "homoglab/grid.hpp"

namespace homoglab {

enum class KernelFamily { UniformBall, QuarticBump, TruncGaussian };

/// Radial, compactly supported probability density on R^2.
///
/// UniformBall:   c                          for r < R
/// QuarticBump:   c (1 - (r/R)^2)^2          for r < R
/// TruncGaussian: c (exp(-r^2/2s^2) - exp(-R^2/2s^2)), s = R/3, for r < R
///
/// The Gaussian is shifted so the profile is continuous at r = R. The
/// constant c is the analytic normalization of each profile.
class Kernel {
public:
    Kernel() = default;
    Kernel(KernelFamily family, double support_radius);

    KernelFamily family() const noexcept { return family_; }
    double support_radius() const noexcept { return radius_; }
    double norm_const() const noexcept { return norm_; }

    /// Unnormalized radial profile.
    double profile(double r) const noexcept;

    double operator()(double r) const noexcept { return norm_ * profile(r); }

    /// K(|x - y|). Symmetric in its arguments bit for bit.
    double eval_pair(Point x, Point y) const noexcept {
        const double d1 = x.x1 - y.x1;
        const double d2 = x.x2 - y.x2;
        return (*this)(std::sqrt(d1 * d1 + d2 * d2));
    }

private:
    KernelFamily family_ = KernelFamily::UniformBall;
    double radius_ = 1.0;
    double norm_ = 0.0;
    double gauss_sigma_ = 0.0;
    double gauss_floor_ = 0.0;
};

Kernel make_kernel(KernelFamily family, double support_radius);

struct SupportReport {
    bool ok = false;
    /// Smallest value of J over the closed ball of radius domain_diam.
    double min_value = 0.0;
    double support_radius = 0.0;
    double domain_diam = 0.0;
    std::string message;
};

/// Checks that J is bounded away from zero on a ball whose radius exceeds
/// the domain diameter, so every pair of points interacts.
SupportReport validate_coupling_support(const Kernel& j, double domain_diam = std::sqrt(2.0));

/// Midpoint sum of K over a square grid covering its support.
double quadrature_mass(const Kernel& k, int samples_per_radius = 256);

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

}  // namespace homoglab
