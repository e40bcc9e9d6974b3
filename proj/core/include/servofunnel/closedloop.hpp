// Sampled-data closed loop: the "true" oscillator is integrated on a fine grid
// while the controller updates at the control frequency and holds its output
// between ticks.
#pragma once

#include "servofunnel/feedback.hpp"
#include "servofunnel/feedforward.hpp"
#include "servofunnel/plant.hpp"
#include "servofunnel/trajectory.hpp"

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace servofunnel {

struct FeedforwardOnly {
    TuningFactors tuning;
};
struct FeedbackOnly {
    FunnelSpec funnel;
};
struct Combined {
    TuningFactors tuning;
    FunnelSpec funnel;
};
using ControllerMode = std::variant<FeedforwardOnly, FeedbackOnly, Combined>;

bool uses_feedforward(const ControllerMode& mode);
bool uses_feedback(const ControllerMode& mode);
std::optional<FunnelSpec> funnel_of(const ControllerMode& mode);
std::optional<TuningFactors> tuning_of(const ControllerMode& mode);
/// "feedforward", "feedback" or "combined".
std::string mode_name(const ControllerMode& mode);

struct IdealMeasurement {};

/// Incremental encoder on flywheel 1 followed by a filtered difference
/// quotient, plus additive white velocity noise. The defaults are synthetic.
struct EncoderMeasurement {
    double angle_quantum = 2.0 * std::numbers::pi / 4096.0;  ///< [rad]
    double filter_time_constant = 5e-3;                      ///< [s]
    double noise_std = 0.0;                                  ///< [rad/s]
};
using MeasurementModel = std::variant<IdealMeasurement, EncoderMeasurement>;

/// Solve one implicit Euler step per control tick inside the loop.
struct OnlineFeedforward {
    double dt = 1e-3;
    NewtonOptions newton;
};
/// Look up a precomputed solution at each tick.
struct TableFeedforward {
    FeedforwardTable table;
};
using FeedforwardSource = std::variant<OnlineFeedforward, TableFeedforward>;

struct SimulationConfig {
    std::string id = "run";
    OscillatorParams true_params = OscillatorParams::nominal();
    OscillatorParams nominal_params = OscillatorParams::nominal();
    TrajectorySpec trajectory = TrajectorySpec::two_revolutions();
    ControllerMode mode = FeedforwardOnly{};
    double control_frequency = 1000.0;   ///< [Hz]
    int plant_substeps = 10;             ///< fine RK4 steps per control tick
    double duration = 15.0;              ///< [s]
    MeasurementModel measurement = IdealMeasurement{};
    FeedforwardSource feedforward_source = OnlineFeedforward{};
    std::uint64_t seed = 1;
    /// Symmetric actuator limit |u| <= input_limit; unlimited when empty.
    std::optional<double> input_limit;
    /// Store the fine-grid plant state every `record_every` substeps (0: off).
    int record_every = 0;
    /// Plant state at t = 0; defaults to both flywheels spinning at y_ref(0).
    std::optional<GeneralizedState> initial_state;

    double control_period() const { return 1.0 / control_frequency; }
    /// Number of control ticks N; the trace holds ticks 0..N.
    std::size_t tick_count() const;
    GeneralizedState resolved_initial_state() const;

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

struct TickSample {
    double t = 0.0;
    double y_measured = 0.0;
    double y_true = 0.0;
    double y_ref = 0.0;
    double e = 0.0;            ///< y_measured - y_ref
    double psi = 0.0;          ///< NaN without feedback
    double u_ffw = 0.0;        ///< tuned feedforward contribution
    double u_fb = 0.0;
    double u = 0.0;            ///< applied (held) input
    int newton_iterations = 0; ///< online feedforward only
};

struct PlantSample {
    double t = 0.0;
    GeneralizedState state;
    double u = 0.0;            ///< input applied over the step starting at t
};

struct Completed {};
struct FunnelViolated {
    double at = 0.0;
    double error = 0.0;
    double psi = 0.0;
};
struct FeedforwardDiverged {
    double at = 0.0;
    double residual = 0.0;
};
using RunStatus = std::variant<Completed, FunnelViolated, FeedforwardDiverged>;

std::string status_name(const RunStatus& status);

struct Trace {
    std::vector<TickSample> ticks;
    std::vector<PlantSample> plant;
    RunStatus status = Completed{};

    bool completed() const { return std::holds_alternative<Completed>(status); }
};

/// Wall-clock compute time spent in the controller at each tick. Kept apart
/// from Trace so traces stay reproducible.
struct RunTimings {
    std::vector<double> controller_seconds;
};

/// Throws std::invalid_argument on invalid configuration. Funnel violation
/// and Newton divergence end the run early and are reported in the status.
Trace run_simulation(const SimulationConfig& config, RunTimings* timings = nullptr);

}  // namespace servofunnel
