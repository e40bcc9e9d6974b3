#include <stdexcept>
#include <servofunnel/sweep.hpp>

#include <doctest.h>

using namespace servofunnel;

namespace {

std::vector<SimulationConfig> funnel_sweep() {
    const FunnelSpec rows[] = {{5.0, 0.1, 0.3}, {1.0, 0.1, 0.5}, {3.0, 0.1, 0.5}, {5.0, 0.1, 0.5}, {8.0, 0.1, 0.5}};
    std::vector<SimulationConfig> configs;
    int i = 1;
    for (const auto& f : rows) {
        SimulationConfig cfg;
        cfg.id = "fb-" + std::to_string(i++);
        cfg.true_params.friction = CoulombFriction{0.15};
        cfg.mode = FeedbackOnly{f};
        cfg.control_frequency = 2000.0;
        cfg.measurement = EncoderMeasurement{0.0, 5e-3, 0.1};
        configs.push_back(cfg);
    }
    return configs;
}

}  // namespace

TEST_CASE("empty sweep") { CHECK(run_sweep({}).empty()); }

TEST_CASE("funnel sweep completes in input order with the invariant intact") {
    const auto configs = funnel_sweep();
    const auto results = run_sweep(configs, 3);
    REQUIRE(results.size() == 5);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].id == configs[i].id);
        REQUIRE(results[i].trace.has_value());
        CHECK(results[i].trace->completed());
        CHECK(results[i].metrics.has_value());
        CHECK(results[i].error.empty());
        for (const auto& s : results[i].trace->ticks) CHECK(std::abs(s.e) < s.psi);
    }
}

TEST_CASE("results do not depend on the number of threads") {
    const auto configs = funnel_sweep();
    const auto serial = run_sweep(configs, 1);
    const auto parallel = run_sweep(configs, 4);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& a = serial[i].trace->ticks;
        const auto& b = parallel[i].trace->ticks;
        REQUIRE(a.size() == b.size());
        bool same = true;
        for (std::size_t k = 0; k < a.size(); ++k) same = same && a[k].u == b[k].u && a[k].y_measured == b[k].y_measured;
        CHECK(same);
        CHECK(serial[i].metrics->var_u_s == parallel[i].metrics->var_u_s);
    }
}

TEST_CASE("per-config failures stay in their entry") {
    auto configs = funnel_sweep();
    configs[1].mode = FeedbackOnly{FunnelSpec{1.0, 0.1, 0.0}};
    configs[2].duration = 12.0;
    configs[3].mode = FeedbackOnly{FunnelSpec{0.0, 0.0, 1e-3}};
    const auto results = run_sweep(configs);
    CHECK(results[0].error.empty());
    CHECK_FALSE(results[1].trace.has_value());
    CHECK(results[1].error.find("c must be > 0") != std::string::npos);
    REQUIRE(results[2].trace.has_value());
    CHECK(results[2].trace->completed());
    CHECK_FALSE(results[2].metrics.has_value());
    REQUIRE(results[3].trace.has_value());
    CHECK_FALSE(results[3].trace->completed());
    CHECK(results[3].error == "run ended with status funnel_violated");
    CHECK(results[4].metrics.has_value());
}
