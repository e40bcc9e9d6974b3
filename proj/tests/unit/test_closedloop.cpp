#include <servofunnel/closedloop.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace servofunnel;

namespace {

const FunnelSpec kP2{1.0, 0.1, 0.5};
const FunnelSpec kP5{8.0, 0.1, 0.5};
const FunnelSpec kP6{5.0, 0.3, 0.3};
const TuningFactors kFfwP5{0.08, 0.16};

SimulationConfig bench(ControllerMode mode, double frequency) {
    SimulationConfig cfg;
    cfg.true_params.friction = CoulombFriction{0.15};
    cfg.mode = mode;
    cfg.control_frequency = frequency;
    cfg.feedforward_source = OnlineFeedforward{1.0 / frequency, NewtonOptions{}};
    return cfg;
}

EncoderMeasurement noisy_encoder() { return EncoderMeasurement{0.0, 5e-3, 0.1}; }

double max_tracking_error(const Trace& trace) {
    double worst = 0.0;
    for (const auto& s : trace.ticks) worst = std::max(worst, std::abs(s.y_true - s.y_ref));
    return worst;
}

bool same_ticks(const Trace& a, const Trace& b) {
    if (a.ticks.size() != b.ticks.size()) return false;
    for (std::size_t k = 0; k < a.ticks.size(); ++k) {
        const TickSample& x = a.ticks[k];
        const TickSample& y = b.ticks[k];
        const bool psi_same = (std::isnan(x.psi) && std::isnan(y.psi)) || x.psi == y.psi;
        if (x.t != y.t || x.y_measured != y.y_measured || x.y_true != y.y_true || x.y_ref != y.y_ref ||
            x.e != y.e || !psi_same || x.u_ffw != y.u_ffw || x.u_fb != y.u_fb || x.u != y.u) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("feedforward alone tracks the nominal plant, converging with the step size") {
    auto make = [](double f) {
        SimulationConfig cfg;
        cfg.mode = FeedforwardOnly{};
        cfg.control_frequency = f;
        cfg.feedforward_source = OnlineFeedforward{1.0 / f, NewtonOptions{}};
        return cfg;
    };
    const Trace coarse = run_simulation(make(1000.0));
    const Trace fine = run_simulation(make(2000.0));
    REQUIRE(coarse.completed());
    REQUIRE(fine.completed());
    const double e1 = max_tracking_error(coarse);
    const double e2 = max_tracking_error(fine);
    CHECK(e1 < 0.05);
    CHECK(e2 <= 0.65 * e1);
}

TEST_CASE("trace layout") {
    const Trace trace = run_simulation(bench(FeedbackOnly{kP2}, 2000.0));
    REQUIRE(trace.completed());
    REQUIRE(trace.ticks.size() == 30001);
    for (std::size_t k = 0; k < trace.ticks.size(); ++k) {
        CHECK(trace.ticks[k].t == static_cast<double>(k) / 2000.0);
        CHECK(trace.ticks[k].u == trace.ticks[k].u_fb);
        CHECK(trace.ticks[k].y_measured == trace.ticks[k].y_true);
    }
    CHECK(trace.plant.empty());
}

TEST_CASE("funnel invariant holds on a completed feedback run") {
    const Trace trace = run_simulation(bench(FeedbackOnly{kP2}, 2000.0));
    REQUIRE(trace.completed());
    for (const auto& s : trace.ticks) {
        CHECK(std::abs(s.e) < s.psi);
        CHECK(s.psi == psi(kP2, s.t));
    }
}

TEST_CASE("aggressive funnel breaks at 1 kHz without feedforward and holds with it") {
    auto fb = bench(FeedbackOnly{kP6}, 1000.0);
    fb.measurement = noisy_encoder();
    auto comb = bench(Combined{kFfwP5, kP6}, 1000.0);
    comb.measurement = noisy_encoder();

    const Trace broken = run_simulation(fb);
    const auto* v = std::get_if<FunnelViolated>(&broken.status);
    REQUIRE(v != nullptr);
    CHECK(v->at < 15.0);
    CHECK(std::abs(v->error) >= v->psi);
    CHECK(v->psi == psi(kP6, v->at));
    CHECK(broken.ticks.back().t < v->at);
    CHECK(broken.ticks.size() == static_cast<std::size_t>(std::llround(v->at * 1000.0)));

    const Trace held = run_simulation(comb);
    REQUIRE(held.completed());
    for (const auto& s : held.ticks) CHECK(std::abs(s.e) < s.psi);
}

TEST_CASE("input is held between ticks") {
    auto cfg = bench(Combined{kFfwP5, kP5}, 1000.0);
    cfg.duration = 2.0;
    cfg.record_every = 1;
    const Trace trace = run_simulation(cfg);
    REQUIRE(trace.completed());
    REQUIRE(trace.plant.size() == 2000u * 10u);
    for (std::size_t i = 0; i < trace.plant.size(); ++i) {
        const std::size_t tick = i / 10;
        CHECK(trace.plant[i].u == trace.ticks[tick].u);
        if (i % 10 == 0) CHECK(trace.plant[i].t == trace.ticks[tick].t);
        if (i > 0) CHECK(trace.plant[i].t > trace.plant[i - 1].t);
    }
}

TEST_CASE("plant recording decimates the fine grid") {
    auto cfg = bench(FeedbackOnly{kP5}, 1000.0);
    cfg.duration = 1.0;
    cfg.record_every = 7;
    const Trace trace = run_simulation(cfg);
    REQUIRE(trace.plant.size() == (10000u + 6u) / 7u);
    CHECK(trace.plant[1].t == doctest::Approx(7e-4));
}

TEST_CASE("identical configurations give bit-identical traces") {
    auto cfg = bench(Combined{kFfwP5, kP5}, 2000.0);
    cfg.measurement = EncoderMeasurement{2.0 * M_PI / 4096.0, 5e-3, 0.1};
    cfg.seed = 42;
    const Trace a = run_simulation(cfg);
    const Trace b = run_simulation(cfg);
    CHECK(same_ticks(a, b));
    cfg.seed = 43;
    const Trace c = run_simulation(cfg);
    CHECK_FALSE(same_ticks(a, c));
}

TEST_CASE("combined with zero feedforward factors equals feedback only") {
    auto fb = bench(FeedbackOnly{kP5}, 2000.0);
    fb.measurement = noisy_encoder();
    auto comb = bench(Combined{TuningFactors{0.0, 0.0}, kP5}, 2000.0);
    comb.measurement = noisy_encoder();
    const Trace a = run_simulation(fb);
    const Trace b = run_simulation(comb);
    REQUIRE(a.ticks.size() == b.ticks.size());
    for (std::size_t k = 0; k < a.ticks.size(); ++k) {
        CHECK(a.ticks[k].y_true == b.ticks[k].y_true);
        CHECK(a.ticks[k].u == b.ticks[k].u);
    }
}

TEST_CASE("a huge funnel leaves unit-gain proportional feedback on top of feedforward") {
    // The gain psi^2/(psi^2 - e^2) tends to 1, not 0, as the funnel widens.
    auto cfg = bench(Combined{TuningFactors{}, FunnelSpec{5.0, 0.1, 1e6}}, 1000.0);
    cfg.true_params = OscillatorParams::nominal();
    const Trace trace = run_simulation(cfg);
    REQUIRE(trace.completed());
    for (const auto& s : trace.ticks) CHECK(std::abs(s.u_fb + s.e) <= 1e-9 * std::max(1.0, std::abs(s.e)));
}

TEST_CASE("table lookup reproduces online feedforward") {
    auto online = bench(Combined{kFfwP5, kP5}, 1000.0);
    auto table = online;
    auto solved = solve_feedforward(online.nominal_params, online.trajectory, 1e-3, online.duration, NewtonOptions{});
    REQUIRE(solved.has_value());
    table.feedforward_source = TableFeedforward{*solved};
    const Trace a = run_simulation(online);
    const Trace b = run_simulation(table);
    CHECK(same_ticks(a, b));
    CHECK(a.ticks[5000].newton_iterations >= 1);
    CHECK(std::all_of(b.ticks.begin(), b.ticks.end(), [](const TickSample& s) { return s.newton_iterations == 0; }));
}

TEST_CASE("input limit clamps the applied input") {
    auto cfg = bench(FeedbackOnly{kP2}, 1000.0);
    cfg.input_limit = 0.2;
    cfg.duration = 3.0;
    const Trace trace = run_simulation(cfg);
    double peak = 0.0;
    for (const auto& s : trace.ticks) peak = std::max(peak, std::abs(s.u));
    CHECK(peak <= 0.2);
    CHECK(peak == 0.2);
}

TEST_CASE("configuration errors") {
    auto cfg = bench(FeedbackOnly{kP2}, 1000.0);
    GeneralizedState off;
    off.v << 3.0, 0.0;
    cfg.initial_state = off;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = bench(FeedforwardOnly{}, 1000.0);
    cfg.feedforward_source = OnlineFeedforward{5e-4, NewtonOptions{}};
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = bench(FeedforwardOnly{}, 1000.0);
    auto shortened = solve_feedforward(cfg.nominal_params, cfg.trajectory, 1e-3, 10.0, NewtonOptions{});
    REQUIRE(shortened.has_value());
    cfg.feedforward_source = TableFeedforward{*shortened};
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = bench(FeedbackOnly{FunnelSpec{1.0, 0.1, 0.0}}, 1000.0);
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = bench(FeedbackOnly{kP2}, 0.0);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = bench(FeedbackOnly{kP2}, 1000.0);
    cfg.measurement = EncoderMeasurement{-1.0, 5e-3, 0.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("mode helpers and status names") {
    CHECK(mode_name(FeedforwardOnly{}) == "feedforward");
    CHECK(mode_name(FeedbackOnly{}) == "feedback");
    CHECK(mode_name(Combined{}) == "combined");
    CHECK(uses_feedforward(Combined{}));
    CHECK_FALSE(uses_feedforward(FeedbackOnly{}));
    CHECK_FALSE(uses_feedback(FeedforwardOnly{}));
    CHECK(status_name(Completed{}) == "completed");
    CHECK(status_name(FunnelViolated{}) == "funnel_violated");
    CHECK(status_name(FeedforwardDiverged{}) == "newton_diverged");
}
