#include "servofunnel/plant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace servofunnel {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace

double friction_torque(const FrictionModel& model, double velocity) {
    return std::visit(
        overloaded{
            [](const NoFriction&) { return 0.0; },
            [velocity](const CoulombFriction& c) { return -c.magnitude * sign(velocity); },
        },
        model);
}

OscillatorParams OscillatorParams::nominal() { return OscillatorParams{}; }

OscillatorParams OscillatorParams::without_friction() const {
    OscillatorParams p = *this;
    p.friction = NoFriction{};
    return p;
}

void OscillatorParams::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("OscillatorParams: " + what);
    };
    require(std::isfinite(I1) && I1 > 0.0, "I1 must be finite and > 0");
    require(std::isfinite(I2) && I2 > 0.0, "I2 must be finite and > 0");
    require(std::isfinite(k) && k >= 0.0, "k must be finite and >= 0");
    require(std::isfinite(d) && d >= 0.0, "d must be finite and >= 0");
    if (const auto* c = std::get_if<CoulombFriction>(&friction)) {
        require(std::isfinite(c->magnitude) && c->magnitude >= 0.0,
                "Coulomb friction magnitude must be finite and >= 0");
    }
}

Eigen::Vector2d eval_dynamics(const OscillatorParams& params,
                              const GeneralizedState& state, double u) {
    // Shaft torque acting on flywheel 2; flywheel 1 receives the reaction.
    const double shaft = params.d * (state.v[0] - state.v[1]) +
                         params.k * (state.q[0] - state.q[1]);
    const double tau1 = -shaft + friction_torque(params.friction, state.v[0]) + u;
    return {tau1 / params.I1, shaft / params.I2};
}

ReducedRealization reduced_realization(const OscillatorParams& params) {
    const double I1 = params.I1, I2 = params.I2, k = params.k, d = params.d;
    ReducedRealization r;
    r.M = Eigen::Vector3d(1.0, I1, I2).asDiagonal();
    r.A_tilde << 0.0, 1.0, -1.0,
                 -k, -d, d,
                 k, d, -d;
    r.B_tilde << 0.0, 1.0, 0.0;
    const Eigen::Matrix3d M_inv = Eigen::Vector3d(1.0, 1.0 / I1, 1.0 / I2).asDiagonal();
    r.A = M_inv * r.A_tilde;
    r.B = M_inv * r.B_tilde;
    r.C << 0.0, 1.0, 0.0;

    r.R = -d / I1;
    r.S << k / I1, d / I1;
    r.Q << 0.0, 1.0,
           -k / I2, -d / I2;
    r.P << -1.0, d / I2;
    r.Gamma = r.C.dot(r.B);
    return r;
}

MinimumPhaseReport check_minimum_phase(const OscillatorParams& params) {
    // Characteristic polynomial of Q: l^2 + (d/I2) l + k/I2.
    const double b = params.d / params.I2;
    const double c = params.k / params.I2;
    const double disc = b * b - 4.0 * c;

    MinimumPhaseReport report;
    if (disc >= 0.0) {
        // Stable form of the quadratic formula for real roots.
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + sq);
        const double r1 = q;
        const double r2 = (q != 0.0) ? c / q : -b - q;
        report.eigenvalues = {std::complex<double>(r1, 0.0), std::complex<double>(r2, 0.0)};
    } else {
        const double re = -0.5 * b;
        const double im = 0.5 * std::sqrt(-disc);
        report.eigenvalues = {std::complex<double>(re, im), std::complex<double>(re, -im)};
    }
    report.is_minimum_phase = report.eigenvalues[0].real() < 0.0 &&
                              report.eigenvalues[1].real() < 0.0;
    return report;
}

}  // namespace servofunnel
