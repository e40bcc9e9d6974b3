#include "servofunnel/closedloop.hpp"

#include "servofunnel/integrator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace servofunnel {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

using PlantVector = Eigen::Vector4d;   // (q1, q2, v1, v2)

PlantVector to_vector(const GeneralizedState& s) { return {s.q[0], s.q[1], s.v[0], s.v[1]}; }

GeneralizedState to_state(const PlantVector& x) {
    GeneralizedState s;
    s.q << x[0], x[1];
    s.v << x[2], x[3];
    return s;
}

// Velocity sensor on flywheel 1. Owns its filter state and noise stream.
class Sensor {
public:
    Sensor(const MeasurementModel& model, std::uint64_t seed, double period)
        : model_(model), rng_(seed), period_(period) {}

    double measure(const GeneralizedState& s, bool first) {
        const double y = std::visit(
            overloaded{
                [&](const IdealMeasurement&) { return output(s); },
                [&](const EncoderMeasurement& enc) { return encoder(enc, s, first); },
            },
            model_);
        return y + noise();
    }

private:
    double encoder(const EncoderMeasurement& enc, const GeneralizedState& s, bool first) {
        const double angle = enc.angle_quantum > 0.0
                                 ? enc.angle_quantum * std::round(s.q[0] / enc.angle_quantum)
                                 : s.q[0];
        if (first) {
            // Filter starts settled on the true initial velocity.
            filtered_ = output(s);
        } else {
            const double raw = (angle - last_angle_) / period_;
            const double alpha = enc.filter_time_constant > 0.0
                                     ? -std::expm1(-period_ / enc.filter_time_constant)
                                     : 1.0;
            filtered_ += alpha * (raw - filtered_);
        }
        last_angle_ = angle;
        return filtered_;
    }

    double noise() {
        const auto* enc = std::get_if<EncoderMeasurement>(&model_);
        if (enc == nullptr || enc->noise_std == 0.0) return 0.0;
        return enc->noise_std * normal_(rng_);
    }

    MeasurementModel model_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double period_;
    double last_angle_ = 0.0;
    double filtered_ = 0.0;
};

// Produces the raw inverse-model torque for tick k.
class FeedforwardChannel {
public:
    FeedforwardChannel(const SimulationConfig& cfg) {
        std::visit(overloaded{
                       [&](const OnlineFeedforward& on) {
                           stepper_.emplace(cfg.nominal_params, cfg.trajectory, on.dt, on.newton, 0.0);
                       },
                       [&](const TableFeedforward& tab) { table_ = &tab.table; },
                   },
                   cfg.feedforward_source);
    }

    struct Sample {
        double u = 0.0;
        int iterations = 0;
        std::optional<NewtonDiverged> failure;
    };

    Sample at_tick(std::size_t k) {
        if (table_ != nullptr) return {table_->at_index(k), 0, std::nullopt};
        if (k == 0) return {stepper_->state().u, 0, std::nullopt};
        auto step = stepper_->advance();
        if (!step) return {0.0, 0, step.error()};
        return {step->state.u, step->iterations, std::nullopt};
    }

private:
    std::optional<InverseModelStepper> stepper_;
    const FeedforwardTable* table_ = nullptr;
};

}  // namespace

bool uses_feedforward(const ControllerMode& mode) { return !std::holds_alternative<FeedbackOnly>(mode); }
bool uses_feedback(const ControllerMode& mode) { return !std::holds_alternative<FeedforwardOnly>(mode); }

std::optional<FunnelSpec> funnel_of(const ControllerMode& mode) {
    return std::visit(overloaded{
                          [](const FeedforwardOnly&) -> std::optional<FunnelSpec> { return std::nullopt; },
                          [](const FeedbackOnly& m) -> std::optional<FunnelSpec> { return m.funnel; },
                          [](const Combined& m) -> std::optional<FunnelSpec> { return m.funnel; },
                      },
                      mode);
}

std::optional<TuningFactors> tuning_of(const ControllerMode& mode) {
    return std::visit(overloaded{
                          [](const FeedforwardOnly& m) -> std::optional<TuningFactors> { return m.tuning; },
                          [](const FeedbackOnly&) -> std::optional<TuningFactors> { return std::nullopt; },
                          [](const Combined& m) -> std::optional<TuningFactors> { return m.tuning; },
                      },
                      mode);
}

std::string mode_name(const ControllerMode& mode) {
    return std::visit(overloaded{
                          [](const FeedforwardOnly&) { return std::string("feedforward"); },
                          [](const FeedbackOnly&) { return std::string("feedback"); },
                          [](const Combined&) { return std::string("combined"); },
                      },
                      mode);
}

std::string status_name(const RunStatus& status) {
    return std::visit(overloaded{
                          [](const Completed&) { return std::string("completed"); },
                          [](const FunnelViolated&) { return std::string("funnel_violated"); },
                          [](const FeedforwardDiverged&) { return std::string("newton_diverged"); },
                      },
                      status);
}

std::size_t SimulationConfig::tick_count() const {
    return static_cast<std::size_t>(std::llround(duration * control_frequency));
}

GeneralizedState SimulationConfig::resolved_initial_state() const {
    if (initial_state) return *initial_state;
    GeneralizedState s;
    const double y = y_ref_at(trajectory, 0.0);
    s.v << y, y;
    return s;
}

void SimulationConfig::validate() const {
    auto require = [this](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument(fmt::format("SimulationConfig '{}': {}", id, what));
    };
    true_params.validate();
    nominal_params.validate();
    trajectory.validate();
    require(std::isfinite(control_frequency) && control_frequency > 0.0, "control_frequency must be > 0");
    require(plant_substeps >= 1, "plant_substeps must be >= 1");
    require(std::isfinite(duration) && duration > 0.0, "duration must be > 0");
    require(record_every >= 0, "record_every must be >= 0");
    require(!input_limit || (*input_limit > 0.0), "input_limit must be > 0");
    require(resolved_initial_state().is_finite(), "initial state must be finite");

    if (const auto* enc = std::get_if<EncoderMeasurement>(&measurement)) {
        require(enc->angle_quantum >= 0.0, "encoder angle_quantum must be >= 0");
        require(enc->filter_time_constant >= 0.0, "encoder filter_time_constant must be >= 0");
        require(enc->noise_std >= 0.0, "encoder noise_std must be >= 0");
    }

    if (const auto funnel = funnel_of(mode)) {
        funnel->validate();
        const double e0 = output(resolved_initial_state()) - y_ref_at(trajectory, 0.0);
        require(std::abs(e0) < psi(*funnel, 0.0), "initial error must lie inside the funnel");
    }

    if (uses_feedforward(mode)) {
        const double period = control_period();
        auto same_spacing = [period](double dt) {
            return std::abs(dt - period) <= 1e-9 * period;
        };
        std::visit(overloaded{
                       [&](const OnlineFeedforward& on) {
                           on.newton.validate();
                           require(same_spacing(on.dt), "online feedforward dt must equal 1/control_frequency");
                       },
                       [&](const TableFeedforward& tab) {
                           tab.table.validate();
                           require(same_spacing(tab.table.dt),
                                   "feedforward table spacing must equal 1/control_frequency");
                           require(tab.table.size() >= tick_count() + 1,
                                   "feedforward table does not cover the simulation duration");
                       },
                   },
                   feedforward_source);
    }
}

Trace run_simulation(const SimulationConfig& config, RunTimings* timings) {
    config.validate();

    const double period = config.control_period();
    const double h = period / config.plant_substeps;
    const std::size_t ticks = config.tick_count();
    const auto funnel = funnel_of(config.mode);
    const auto tuning = tuning_of(config.mode);
    const OscillatorParams& plant = config.true_params;

    Sensor sensor(config.measurement, config.seed, period);
    std::optional<FeedforwardChannel> feedforward;
    if (tuning) feedforward.emplace(config);

    Trace trace;
    trace.ticks.reserve(ticks + 1);
    if (timings) timings->controller_seconds.reserve(ticks + 1);

    PlantVector x = to_vector(config.resolved_initial_state());
    std::size_t fine_index = 0;
    for (std::size_t k = 0; k <= ticks; ++k) {
        const auto wall_start = std::chrono::steady_clock::now();
        const double t = static_cast<double>(k) / config.control_frequency;
        const GeneralizedState state = to_state(x);

        TickSample s;
        s.t = t;
        s.y_true = output(state);
        s.y_measured = sensor.measure(state, k == 0);
        s.y_ref = y_ref_at(config.trajectory, t);
        s.e = s.y_measured - s.y_ref;
        s.psi = std::numeric_limits<double>::quiet_NaN();

        if (feedforward) {
            const auto ff = feedforward->at_tick(k);
            if (ff.failure) {
                trace.status = FeedforwardDiverged{t, ff.failure->residual};
                break;
            }
            s.u_ffw = apply_tuning(ff.u, *tuning);
            s.newton_iterations = ff.iterations;
        }
        if (funnel) {
            s.psi = psi(*funnel, t);
            const auto fb = funnel_law(s.y_measured, s.y_ref, s.psi);
            if (!fb) {
                trace.status = FunnelViolated{t, fb.error().error, fb.error().psi};
                break;
            }
            s.u_fb = *fb;
        }
        s.u = s.u_ffw + s.u_fb;
        if (config.input_limit) s.u = std::clamp(s.u, -*config.input_limit, *config.input_limit);
        trace.ticks.push_back(s);
        if (timings) {
            timings->controller_seconds.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count());
        }

        if (k == ticks) break;

        const double u = s.u;
        auto rhs = [&plant, u](double, const PlantVector& xs) -> PlantVector {
            const GeneralizedState gs = to_state(xs);
            const Eigen::Vector2d acc = eval_dynamics(plant, gs, u);
            return {xs[2], xs[3], acc[0], acc[1]};
        };
        for (int j = 0; j < config.plant_substeps; ++j) {
            const double tj = t + j * h;
            if (config.record_every > 0 && fine_index % static_cast<std::size_t>(config.record_every) == 0) {
                trace.plant.push_back(PlantSample{tj, to_state(x), u});
            }
            x = rk4_step(rhs, tj, x, h);
            ++fine_index;
        }
    }
    return trace;
}

}  // namespace servofunnel
