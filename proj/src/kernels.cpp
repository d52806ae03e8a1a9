#include "homoglab/kernels.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "homoglab/errors.hpp"

namespace homoglab {

Kernel::Kernel(KernelFamily family, double support_radius) : family_(family), radius_(support_radius) {
    if (!(support_radius > 0.0) || !std::isfinite(support_radius)) {
        throw InvalidSpec("kernel support radius must be positive");
    }
    const double pi = std::numbers::pi;
    const double r2 = radius_ * radius_;
    switch (family_) {
        case KernelFamily::UniformBall:
            norm_ = 1.0 / (pi * r2);
            break;
        case KernelFamily::QuarticBump:
            // int_0^R (1 - (r/R)^2)^2 2 pi r dr = pi R^2 / 3
            norm_ = 3.0 / (pi * r2);
            break;
        case KernelFamily::TruncGaussian: {
            gauss_sigma_ = radius_ / 3.0;
            const double s2 = gauss_sigma_ * gauss_sigma_;
            gauss_floor_ = std::exp(-r2 / (2.0 * s2));
            // int_0^R (exp(-r^2/2s^2) - e_R) 2 pi r dr = 2 pi s^2 (1 - e_R) - pi R^2 e_R
            norm_ = 1.0 / (2.0 * pi * s2 * (1.0 - gauss_floor_) - pi * r2 * gauss_floor_);
            break;
        }
    }
}

double Kernel::profile(double r) const noexcept {
    if (r >= radius_) return 0.0;
    switch (family_) {
        case KernelFamily::UniformBall:
            return 1.0;
        case KernelFamily::QuarticBump: {
            const double t = r / radius_;
            const double s = 1.0 - t * t;
            return s * s;
        }
        case KernelFamily::TruncGaussian:
            return std::exp(-r * r / (2.0 * gauss_sigma_ * gauss_sigma_)) - gauss_floor_;
    }
    return 0.0;
}

Kernel make_kernel(KernelFamily family, double support_radius) { return Kernel(family, support_radius); }

SupportReport validate_coupling_support(const Kernel& j, double domain_diam) {
    SupportReport report;
    report.support_radius = j.support_radius();
    report.domain_diam = domain_diam;
    constexpr int samples = 4096;
    double lowest = j(domain_diam);
    for (int i = 0; i < samples; ++i) {
        lowest = std::min(lowest, j(domain_diam * i / samples));
    }
    report.min_value = lowest;
    report.ok = j.support_radius() > domain_diam && lowest > 0.0;
    std::ostringstream msg;
    if (report.ok) {
        msg << "support radius " << j.support_radius() << " exceeds domain diameter " << domain_diam
            << "; min J on the diameter ball = " << lowest;
    } else if (j.support_radius() <= domain_diam) {
        msg << "support radius " << j.support_radius() << " does not exceed domain diameter " << domain_diam;
    } else {
        msg << "J vanishes somewhere on the diameter ball";
    }
    report.message = msg.str();
    return report;
}

double quadrature_mass(const Kernel& k, int samples_per_radius) {
    const int n = samples_per_radius;
    const double step = k.support_radius() / n;
    double total = 0.0;
    for (int i = -n; i < n; ++i) {
        const double y = (i + 0.5) * step;
        double row = 0.0;
        for (int j = -n; j < n; ++j) {
            const double x = (j + 0.5) * step;
            row += k(std::sqrt(x * x + y * y));
        }
        total += row;
    }
    return total * step * step;
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::UniformBall: return "UniformBall";
        case KernelFamily::QuarticBump: return "QuarticBump";
        case KernelFamily::TruncGaussian: return "TruncGaussian";
    }
    return "?";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "UniformBall") return KernelFamily::UniformBall;
    if (name == "QuarticBump") return KernelFamily::QuarticBump;
    if (name == "TruncGaussian") return KernelFamily::TruncGaussian;
    throw InvalidSpec("unknown kernel family '" + std::string(name) + "'");
}

}  // namespace homoglab
