// Two-flywheel torsional oscillator: equations of motion, output map and the
// input-output (Byrnes-Isidori style) decomposition of its vibration dynamics.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <variant>

namespace servofunnel {

struct NoFriction {
    bool operator==(const NoFriction&) const = default;
};

/// Constant-magnitude Coulomb friction on the driven flywheel [N·m].
struct CoulombFriction {
    double magnitude = 0.0;
    bool operator==(const CoulombFriction&) const = default;
};

using FrictionModel = std::variant<NoFriction, CoulombFriction>;

/// Friction torque acting on a body rotating at `velocity` [rad/s].
/// Opposes motion; zero at rest.
double friction_torque(const FrictionModel& model, double velocity);

/// Physical constants of the oscillator. The simulated "hardware" and the
/// controller's nominal model are two instances of this type.
struct OscillatorParams {
    double I1 = 0.136;   ///< driven flywheel inertia [kg·m²]
    double I2 = 0.12;    ///< load flywheel inertia [kg·m²]
    double k = 33.6;     ///< shaft stiffness [N·m/rad]
    double d = 0.016;    ///< shaft damping [N·m·s/rad]
    FrictionModel friction = NoFriction{};

    /// Identified bench values, frictionless.
    static OscillatorParams nominal();

    /// Same constants with friction removed.
    [[nodiscard]] OscillatorParams without_friction() const;

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;

    bool operator==(const OscillatorParams&) const = default;
};

/// Generalized coordinates q = (phi1, phi2) [rad] and velocities v [rad/s].
struct GeneralizedState {
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    Eigen::Vector2d v = Eigen::Vector2d::Zero();

    [[nodiscard]] bool is_finite() const { return q.allFinite() && v.allFinite(); }
};

/// Angular accelerations M^{-1} (f(q, v) + B u) for input torque u on flywheel 1.
Eigen::Vector2d eval_dynamics(const OscillatorParams& params,
                              const GeneralizedState& state, double u);

/// Tracked output: angular velocity of the driven flywheel.
inline double output(const GeneralizedState& state) { return state.v[0]; }

/// Reduced realization x = (dphi, phi1', phi2') with the rigid-body motion
/// removed, and its decomposition into output dynamics
///   y' = R y + S eta + F1(y) + Gamma u,   eta' = Q eta + P y
/// with internal state eta = (-dphi, phi2').
struct ReducedRealization {
    Eigen::Matrix3d M;
    Eigen::Matrix3d A_tilde;
    Eigen::Vector3d B_tilde;
    Eigen::Matrix3d A;
    Eigen::Vector3d B;
    Eigen::RowVector3d C;

    double R = 0.0;
    Eigen::RowVector2d S;
    Eigen::Matrix2d Q;
    Eigen::Vector2d P;
    double Gamma = 0.0;
};

ReducedRealization reduced_realization(const OscillatorParams& params);

struct MinimumPhaseReport {
    std::array<std::complex<double>, 2> eigenvalues;
    bool is_minimum_phase = false;
};

/// Spectrum of the internal-dynamics matrix Q. Marginal eigenvalues (zero
/// real part) do not count as minimum phase.
MinimumPhaseReport check_minimum_phase(const OscillatorParams& params);

}  // namespace servofunnel
