// Servo-constraint inverse model: the oscillator's equations of motion are
// appended by the algebraic constraint y(q, v) = y_ref(t), and the resulting
// DAE is integrated with implicit Euler. The input that realizes the
// constraint is the feedforward torque.
#pragma once

#include "servofunnel/outcome.hpp"
#include "servofunnel/plant.hpp"
#include "servofunnel/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace servofunnel {

/// Discrete inverse-model solution at time t.
struct InverseModelState {
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    double u = 0.0;
    double t = 0.0;
};

struct AnalyticJacobian {};
struct FiniteDifferenceJacobian {
    double step = 1e-7;
};
using JacobianMethod = std::variant<AnalyticJacobian, FiniteDifferenceJacobian>;

struct NewtonOptions {
    int max_iterations = 10;
    /// Bound on the max-norm of the scaled residual. Each equation is divided
    /// by max(1, |x|) where x is the quantity it updates: q_i for the
    /// kinematic rows, v_i for the dynamic rows, y_ref for the constraint.
    double residual_tolerance = 1e-10;
    JacobianMethod jacobian = AnalyticJacobian{};

    void validate() const;
};

struct InconsistentStart {
    std::string reason;
};

struct NewtonDiverged {
    std::size_t step = 0;      ///< index of the failing step (1-based grid index)
    double t = 0.0;            ///< target time of the failing step
    double residual = 0.0;     ///< scaled residual after the last iteration
};

/// Newton unknowns in fixed order (q1, q2, v1, v2, u).
using DaeVector = Eigen::Matrix<double, 5, 1>;
using DaeJacobian = Eigen::Matrix<double, 5, 5>;

/// Residual of one implicit Euler step of the servo-constraint DAE:
///   q - q_n - dt v = 0
///   v - v_n - dt M^{-1}(f(q, v) + B u) = 0
///   y(q, v) - y_ref(t_{n+1}) = 0
DaeVector implicit_euler_residual(const OscillatorParams& params,
                                  const InverseModelState& prev, double dt,
                                  double y_ref_next, const DaeVector& z);

/// Analytic Jacobian of implicit_euler_residual with respect to z.
DaeJacobian implicit_euler_jacobian(const OscillatorParams& params, double dt,
                                    const DaeVector& z);

/// Forward-difference Jacobian, used to validate the analytic one.
DaeJacobian implicit_euler_jacobian_fd(const OscillatorParams& params,
                                       const InverseModelState& prev, double dt,
                                       double y_ref_next, const DaeVector& z,
                                       double step);

/// Max-norm of the residual after per-equation scaling.
double scaled_residual_norm(const DaeVector& residual, const DaeVector& z);

struct StepResult {
    InverseModelState state;
    int iterations = 0;
    double residual = 0.0;
};

/// Initial values satisfying the servo constraint and the dynamics at
/// t_start: zero shaft deflection, both flywheels at y_ref(t_start), and the
/// torque that produces the reference acceleration on flywheel 1.
Outcome<InverseModelState, InconsistentStart> consistent_initialization(
    const OscillatorParams& nominal, const TrajectorySpec& spec, double t_start);

inline Outcome<InverseModelState, InconsistentStart> consistent_initialization(
    const OscillatorParams& nominal, const TrajectorySpec& spec) {
    return consistent_initialization(nominal, spec, spec.t0);
}

/// One implicit Euler step to t_next = prev.t + dt, solved by Newton's
/// method warm-started from prev.
Outcome<StepResult, NewtonDiverged> implicit_euler_step(
    const InverseModelState& prev, double t_next, double dt,
    const OscillatorParams& nominal, const TrajectorySpec& spec,
    const NewtonOptions& opts);

/// Stateful stepper for online (real-time style) use: one step per call on
/// the grid t_k = t_start + k * dt.
class InverseModelStepper {
public:
    /// Throws std::runtime_error if no consistent start exists.
    InverseModelStepper(OscillatorParams nominal, TrajectorySpec spec, double dt,
                        NewtonOptions opts, double t_start = 0.0);

    const InverseModelState& state() const { return state_; }
    std::size_t step_index() const { return step_; }
    double dt() const { return dt_; }

    /// Advance to grid point step_index() + 1.
    Outcome<StepResult, NewtonDiverged> advance();

private:
    OscillatorParams nominal_;
    TrajectorySpec spec_;
    double dt_;
    NewtonOptions opts_;
    double t_start_;
    InverseModelState state_;
    std::size_t step_ = 0;
};

enum class TableProvenance { Online, Precomputed };

/// Feedforward torque on a uniform grid t_k = k * dt.
struct FeedforwardTable {
    double dt = 1e-3;
    std::vector<double> t;
    std::vector<double> u_ffw;
    std::vector<int> newton_iterations;   ///< per sample; 0 at the initial sample
    TableProvenance provenance = TableProvenance::Precomputed;

    std::size_t size() const { return u_ffw.size(); }

    /// Sample at grid index k; throws std::out_of_range beyond the table.
    double at_index(std::size_t k) const;
    /// Throws std::invalid_argument if the grid is not uniform or has
    /// non-finite samples.
    void validate() const;
};

Outcome<FeedforwardTable, NewtonDiverged> solve_feedforward(
    const OscillatorParams& nominal, const TrajectorySpec& spec, double dt,
    double horizon, const NewtonOptions& opts);

struct TuningFactors {
    double f_act = 1.0;    ///< actuator scale
    double f_fric = 0.0;   ///< constant friction compensation [N·m]
    bool operator==(const TuningFactors&) const = default;
};

/// u = f_act * u_ffw + f_fric
inline double apply_tuning(double u_ffw, const TuningFactors& factors) {
    return factors.f_act * u_ffw + factors.f_fric;
}

/// Two-column CSV "t,u_ffw" with '#' header lines. `header` lines are
/// written verbatim after the '# ' prefix.
void write_feedforward_csv(std::ostream& out, const FeedforwardTable& table,
                           const std::vector<std::string>& header);
FeedforwardTable read_feedforward_csv(std::istream& in);

}  // namespace servofunnel
