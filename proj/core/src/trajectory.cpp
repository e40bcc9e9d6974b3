#include "servofunnel/trajectory.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

namespace servofunnel {

namespace {

// Normalized time in [0, 1]; throws outside the window.
double normalized(const TrajectorySpec& spec, double t) {
    if (!(t >= spec.t0 && t <= spec.tf)) {
        throw std::domain_error("sigma: t outside [t0, tf]");
    }
    return (t - spec.t0) / (spec.tf - spec.t0);
}

// Compensated Horner evaluation: the coefficients reach 1.6e5 with
// alternating signs, so plain Horner loses ~1e-11 near x = 1. Error-free
// transformations carry the rounding terms of each multiply-add.
template <typename Coefficient>
double compensated_horner(const TimingCoefficients& c, Coefficient weight, double x) {
    double s = weight(0) * c[0];
    double err = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double prod = s * x;
        const double prod_err = std::fma(s, x, -prod);
        const double ci = weight(i) * c[i];
        const double sum = prod + ci;
        const double z = sum - prod;
        const double sum_err = (prod - (sum - z)) + (ci - z);
        s = sum;
        err = err * x + (prod_err + sum_err);
    }
    return s + err;
}

// x^8 * (c15 x^7 + ... + c8)
double timing_law(const TimingCoefficients& c, double x) {
    const double p = compensated_horner(c, [](std::size_t) { return 1.0; }, x);
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return x4 * x4 * p;
}

// d/dx of timing_law: x^7 * (15 c15 x^7 + 14 c14 x^6 + ... + 8 c8).
double timing_law_slope(const TimingCoefficients& c, double x) {
    const double p = compensated_horner(
        c, [](std::size_t i) { return static_cast<double>(15 - i); }, x);
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return x4 * x2 * x * p;
}

}  // namespace

TrajectorySpec TrajectorySpec::two_revolutions() {
    TrajectorySpec spec;
    spec.y0 = 0.0;
    spec.yf = 4.0 * std::numbers::pi;
    spec.t0 = 0.0;
    spec.tf = 10.0;
    return spec;
}

void TrajectorySpec::validate() const {
    if (!std::isfinite(y0) || !std::isfinite(yf) || !std::isfinite(t0) || !std::isfinite(tf)) {
        throw std::invalid_argument("TrajectorySpec: values must be finite");
    }
    if (!(tf > t0)) throw std::invalid_argument("TrajectorySpec: tf must exceed t0");
    if (std::abs(timing_law(coefficients, 0.0)) > 1e-12 ||
        std::abs(timing_law(coefficients, 1.0) - 1.0) > 1e-12) {
        throw std::invalid_argument("TrajectorySpec: timing law must satisfy sigma(t0)=0, sigma(tf)=1");
    }
}

double sigma(const TrajectorySpec& spec, double t) {
    const double x = normalized(spec, t);
    // The standard step is point-symmetric about x = 1/2. Near x = 1 the
    // direct form rounds to neighbouring ulps of 1 and can step backwards;
    // the reflected form keeps it monotone.
    if (spec.coefficients == kSmoothStepCoefficients && x > 0.5) {
        return 1.0 - timing_law(spec.coefficients, 1.0 - x);
    }
    return timing_law(spec.coefficients, x);
}

double sigma_derivative(const TrajectorySpec& spec, double t) {
    return timing_law_slope(spec.coefficients, normalized(spec, t)) / (spec.tf - spec.t0);
}

double y_ref_at(const TrajectorySpec& spec, double t) {
    if (t < spec.t0) return spec.y0;
    if (t > spec.tf) return spec.yf;
    return spec.y0 + sigma(spec, t) * (spec.yf - spec.y0);
}

double y_ref_derivative(const TrajectorySpec& spec, double t) {
    if (t < spec.t0 || t > spec.tf) return 0.0;
    return sigma_derivative(spec, t) * (spec.yf - spec.y0);
}

}  // namespace servofunnel
