#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace homoglab {

/// Rejected input: malformed spec, inconsistent grid, degenerate geometry.
class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The source does not integrate to zero over the domain.
class CompatibilityViolation : public std::runtime_error {
public:
    CompatibilityViolation(const std::string& what, double integral)
        : std::runtime_error(what), integral_(integral) {}
    double integral() const noexcept { return integral_; }

private:
    double integral_;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, int iterations, std::vector<double> history)
        : std::runtime_error(what), iterations_(iterations), history_(std::move(history)) {}
    int iterations() const noexcept { return iterations_; }
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    int iterations_;
    std::vector<double> history_;
};

class DisconnectedRegion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace homoglab
