#include "servofunnel/feedback.hpp"

#include <cmath>
#include <stdexcept>

namespace servofunnel {

void FunnelSpec::validate() const {
    if (!std::isfinite(s) || !std::isfinite(q_decay) || !std::isfinite(c)) {
        throw std::invalid_argument("FunnelSpec: parameters must be finite");
    }
    if (!(c > 0.0)) throw std::invalid_argument("FunnelSpec: c must be > 0 (inf psi > 0)");
    if (!(s >= 0.0)) throw std::invalid_argument("FunnelSpec: s must be >= 0");
    if (!(q_decay >= 0.0)) throw std::invalid_argument("FunnelSpec: q_decay must be >= 0 (bounded psi)");
}

double psi(const FunnelSpec& spec, double t) { return spec.s * std::exp(-spec.q_decay * t) + spec.c; }

Outcome<double, FunnelViolation> funnel_gain(double y, double y_ref, double psi_t) {
    const double e = y - y_ref;
    // NaN errors fail this test and are treated as violations.
    if (!(std::abs(e) < psi_t)) return FunnelViolation{e, psi_t};
    const double psi_sq = psi_t * psi_t;
    return psi_sq / (psi_sq - e * e);
}

Outcome<double, FunnelViolation> funnel_law(double y, double y_ref, double psi_t) {
    auto gain = funnel_gain(y, y_ref, psi_t);
    if (!gain) return gain.error();
    return -*gain * (y - y_ref);
}

}  // namespace servofunnel
