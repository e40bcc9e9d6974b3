// Tracking performance measures on equidistant control-tick series: input
// energy and squared error (trapezoidal rule) over the transient window, input
// variance and squared error over the stationary window.
#pragma once

#include "servofunnel/closedloop.hpp"
#include "servofunnel/trajectory.hpp"

#include <span>
#include <stdexcept>

namespace servofunnel {

class WindowOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class EmptyWindow : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct MetricsWindow {
    double begin = 0.0;
    double end = 0.0;
};

struct MetricsReport {
    double u_sum_t = 0.0;   ///< integral of u^2 over the transient window
    double e_sum_t = 0.0;   ///< integral of e^2 over the transient window
    double var_u_s = 0.0;   ///< population variance of u over the stationary window
    double e_sum_s = 0.0;   ///< integral of e^2 over the stationary window
    MetricsWindow transient;
    MetricsWindow stationary;
};

/// Inclusive index range [first, last] of grid ticks covering [a, b]. Window
/// ends snap to the nearest tick; ties move toward the window interior.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
};
IndexRange snap_window(std::span<const double> t, double a, double b);

/// Trapezoidal integral of value^2 over [a, b].
double integrate_square(std::span<const double> t, std::span<const double> values,
                        double a, double b);

/// Population variance (divide by N). Throws EmptyWindow for N = 0.
double variance(std::span<const double> values);

/// variance() of the samples whose ticks lie in the snapped window [a, b].
double window_variance(std::span<const double> t, std::span<const double> values,
                       double a, double b);

enum class ErrorSignal { Measured, True };

/// Transient window [0, tf], stationary window [tf, tf + 5].
MetricsReport report(const Trace& trace, const TrajectorySpec& spec,
                     ErrorSignal signal = ErrorSignal::Measured);

}  // namespace servofunnel
