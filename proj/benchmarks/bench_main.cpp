#include <servofunnel/closedloop.hpp>
#include <servofunnel/feedforward.hpp>

#include <benchmark/benchmark.h>

using namespace servofunnel;

namespace {

// One implicit-Euler step of the inverse model, mid-transition.
void BM_InverseModelStep(benchmark::State& state) {
    const auto spec = TrajectorySpec::two_revolutions();
    InverseModelStepper stepper(OscillatorParams::nominal(), spec, 1e-3, NewtonOptions{});
    for (int k = 0; k < 5000; ++k) (void)stepper.advance();
    for (auto _ : state) {
        auto copy = stepper;
        benchmark::DoNotOptimize(copy.advance());
    }
}
BENCHMARK(BM_InverseModelStep);

void BM_SolveFeedforward(benchmark::State& state) {
    const double dt = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto table = solve_feedforward(OscillatorParams::nominal(), TrajectorySpec::two_revolutions(), dt, 15.0,
                                       NewtonOptions{});
        benchmark::DoNotOptimize(table);
    }
}
BENCHMARK(BM_SolveFeedforward)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Simulation(benchmark::State& state) {
    SimulationConfig cfg;
    cfg.mode = Combined{TuningFactors{0.08, 0.16}, FunnelSpec{5.0, 0.1, 0.5}};
    cfg.true_params.friction = CoulombFriction{0.15};
    for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg));
}
BENCHMARK(BM_Simulation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
