// Rest-to-rest output reference built from a degree-15 smooth-step timing law.
#pragma once

#include <array>

namespace servofunnel {

/// Monomial coefficients of the timing law for powers 15 down to 8.
using TimingCoefficients = std::array<double, 8>;

inline constexpr TimingCoefficients kSmoothStepCoefficients = {
    -3432.0, 25740.0, -83160.0, 150150.0, -163800.0, 108108.0, -40040.0, 6435.0};

struct TrajectorySpec {
    double y0 = 0.0;    ///< initial output [rad/s]
    double yf = 0.0;    ///< final output [rad/s]
    double t0 = 0.0;    ///< transition start [s]
    double tf = 10.0;   ///< transition end [s]
    TimingCoefficients coefficients = kSmoothStepCoefficients;

    /// 0 -> 4*pi rad/s (two revolutions per second) over [0, 10] s.
    static TrajectorySpec two_revolutions();

    /// Throws std::invalid_argument if tf <= t0, values are non-finite, or the
    /// coefficients do not map the window onto [0, 1] at its endpoints.
    void validate() const;

    bool operator==(const TrajectorySpec&) const = default;
};

/// Timing law on [t0, tf]. Throws std::domain_error outside the window.
double sigma(const TrajectorySpec& spec, double t);

/// Time derivative of sigma [1/s]; same domain as sigma().
double sigma_derivative(const TrajectorySpec& spec, double t);

/// Piecewise reference: y0 before t0, blend on [t0, tf], yf after tf.
double y_ref_at(const TrajectorySpec& spec, double t);

/// Exact derivative of y_ref_at [rad/s²].
double y_ref_derivative(const TrajectorySpec& spec, double t);

}  // namespace servofunnel
