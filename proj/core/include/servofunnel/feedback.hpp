// Funnel controller for relative-degree-one outputs. The law needs no plant
// parameters; it only requires the error to start inside the funnel.
#pragma once

#include "servofunnel/outcome.hpp"

namespace servofunnel {

/// Exponential funnel boundary psi(t) = s * exp(-q_decay * t) + c.
struct FunnelSpec {
    double s = 1.0;        ///< initial surplus width [rad/s]
    double q_decay = 0.1;  ///< decay rate [1/s]
    double c = 0.5;        ///< asymptotic width [rad/s]

    /// Throws std::invalid_argument unless c > 0, s >= 0, q_decay >= 0.
    void validate() const;

    bool operator==(const FunnelSpec&) const = default;
};

double psi(const FunnelSpec& spec, double t);

/// The error reached or left the funnel; the law is undefined there.
struct FunnelViolation {
    double error = 0.0;
    double psi = 0.0;
};

/// psi^2 / (psi^2 - e^2), the state-dependent gain of the funnel law.
Outcome<double, FunnelViolation> funnel_gain(double y, double y_ref, double psi_t);

/// u_fb = -psi^2 e / (psi^2 - e^2) with e = y - y_ref.
Outcome<double, FunnelViolation> funnel_law(double y, double y_ref, double psi_t);

}  // namespace servofunnel
