#include "servofunnel/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <vector>

namespace servofunnel {

namespace {

constexpr double kStationaryLength = 5.0;

double grid_step(std::span<const double> t) {
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double expected = t.front() + static_cast<double>(i) * h;
        if (std::abs(t[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
            throw std::invalid_argument(fmt::format("metrics: grid is not equidistant at index {}", i));
        }
    }
    return h;
}

}  // namespace

IndexRange snap_window(std::span<const double> t, double a, double b) {
    if (!(b >= a)) throw std::invalid_argument("metrics: window end precedes its start");
    if (t.empty()) throw WindowOutOfRange("metrics: no samples");
    if (t.size() == 1) {
        if (a == t.front() && b == t.front()) return {0, 0};
        throw WindowOutOfRange("metrics: a single sample cannot cover a window");
    }
    const double h = grid_step(t);
    const double pa = (a - t.front()) / h;
    const double pb = (b - t.front()) / h;
    // Nearest tick, ties rounded up for the start and down for the end.
    const double ia = std::floor(pa + 0.5);
    const double ib = std::ceil(pb - 0.5);
    const double last = static_cast<double>(t.size() - 1);
    if (ia < 0.0 || ib > last) {
        throw WindowOutOfRange(fmt::format("metrics: window [{}, {}] not covered by samples on [{}, {}]",
                                           a, b, t.front(), t.back()));
    }
    if (ib < ia) return {static_cast<std::size_t>(ia), static_cast<std::size_t>(ia)};
    return {static_cast<std::size_t>(ia), static_cast<std::size_t>(ib)};
}

double integrate_square(std::span<const double> t, std::span<const double> values,
                        double a, double b) {
    if (t.size() != values.size()) throw std::invalid_argument("metrics: series lengths differ");
    const IndexRange r = snap_window(t, a, b);
    double sum = 0.0;
    for (std::size_t i = r.first; i < r.last; ++i) {
        sum += 0.5 * (t[i + 1] - t[i]) * (values[i] * values[i] + values[i + 1] * values[i + 1]);
    }
    return sum;
}

double variance(std::span<const double> values) {
    if (values.empty()) throw EmptyWindow("metrics: variance of an empty window");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return acc / n;
}

double window_variance(std::span<const double> t, std::span<const double> values,
                       double a, double b) {
    if (t.size() != values.size()) throw std::invalid_argument("metrics: series lengths differ");
    const IndexRange r = snap_window(t, a, b);
    return variance(values.subspan(r.first, r.last - r.first + 1));
}

MetricsReport report(const Trace& trace, const TrajectorySpec& spec, ErrorSignal signal) {
    const std::size_t n = trace.ticks.size();
    std::vector<double> t(n), u(n), e(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TickSample& s = trace.ticks[i];
        t[i] = s.t;
        u[i] = s.u;
        e[i] = signal == ErrorSignal::Measured ? s.e : s.y_true - s.y_ref;
    }

    MetricsReport m;
    m.transient = {0.0, spec.tf};
    m.stationary = {spec.tf, spec.tf + kStationaryLength};
    m.u_sum_t = integrate_square(t, u, m.transient.begin, m.transient.end);
    m.e_sum_t = integrate_square(t, e, m.transient.begin, m.transient.end);
    m.var_u_s = window_variance(t, u, m.stationary.begin, m.stationary.end);
    m.e_sum_s = integrate_square(t, e, m.stationary.begin, m.stationary.end);
    return m;
}

}  // namespace servofunnel
