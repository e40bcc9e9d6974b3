#pragma once

namespace servofunnel {

/// One classical fourth-order Runge-Kutta step of x' = f(t, x).
template <typename F, typename X>
X rk4_step(F&& f, double t, const X& x, double h) {
    const X k1 = f(t, x);
    const X k2 = f(t + 0.5 * h, X(x + (0.5 * h) * k1));
    const X k3 = f(t + 0.5 * h, X(x + (0.5 * h) * k2));
    const X k4 = f(t + h, X(x + h * k3));
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace servofunnel
