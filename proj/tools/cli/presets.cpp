#include "presets.hpp"

#include <fmt/format.h>

#include <functional>
#include <map>

namespace servofunnel::cli {

namespace {

std::string rate_tag(double frequency_hz) {
    return fmt::format("{}k", static_cast<int>(frequency_hz / 1000.0));
}

RunConfig feedforward_run(int row, double frequency_hz) {
    RunConfig run = preset_base(fmt::format("ffw-p{}-{}", row, rate_tag(frequency_hz)), frequency_hz);
    run.sim.mode = FeedforwardOnly{kTuningTable[row - 1]};
    return run;
}

RunConfig feedback_run(int row, double frequency_hz) {
    RunConfig run = preset_base(fmt::format("fb-p{}-{}", row, rate_tag(frequency_hz)), frequency_hz);
    run.sim.mode = FeedbackOnly{kFunnelTable[row - 1]};
    return run;
}

RunConfig combined_run(int funnel_row, double frequency_hz) {
    RunConfig run = preset_base(fmt::format("comb-p5-p{}-{}", funnel_row, rate_tag(frequency_hz)),
                                frequency_hz);
    run.sim.mode = Combined{kTuningTable[4], kFunnelTable[funnel_row - 1]};
    return run;
}

ExperimentPreset table2() {
    ExperimentPreset p{"table2-ffw-sweep", {}};
    for (int row = 1; row <= 5; ++row) p.configs.push_back(feedforward_run(row, 1000.0));
    return p;
}

ExperimentPreset table3() {
    ExperimentPreset p{"table3-fb-sweep-2khz", {}};
    for (int row = 1; row <= 5; ++row) p.configs.push_back(feedback_run(row, 2000.0));
    return p;
}

ExperimentPreset fig6() {
    return {"fig6-p6-feedback", {feedback_run(6, 1000.0), feedback_run(6, 2000.0)}};
}

ExperimentPreset combined_1k() {
    return {"combined-1khz", {feedforward_run(5, 1000.0), feedback_run(6, 1000.0), combined_run(6, 1000.0)}};
}

ExperimentPreset combined_2k() {
    return {"combined-2khz", {feedforward_run(5, 2000.0), feedback_run(5, 2000.0), combined_run(5, 2000.0)}};
}

ExperimentPreset comparison() {
    ExperimentPreset p{"performance-comparison", {}};
    for (auto& run : table2().configs) p.configs.push_back(std::move(run));
    for (auto& run : table3().configs) p.configs.push_back(std::move(run));
    for (auto& run : fig6().configs) p.configs.push_back(std::move(run));
    p.configs.push_back(feedforward_run(5, 2000.0));
    p.configs.push_back(combined_run(6, 1000.0));
    p.configs.push_back(combined_run(5, 2000.0));
    return p;
}

const std::map<std::string, std::function<ExperimentPreset()>>& registry() {
    static const std::map<std::string, std::function<ExperimentPreset()>> presets = {
        {"table2-ffw-sweep", table2},
        {"table3-fb-sweep-2khz", table3},
        {"fig6-p6-feedback", fig6},
        {"combined-1khz", combined_1k},
        {"combined-2khz", combined_2k},
        {"performance-comparison", comparison},
    };
    return presets;
}

}  // namespace

EncoderMeasurement preset_measurement() {
    EncoderMeasurement enc;
    enc.angle_quantum = 0.0;
    enc.filter_time_constant = 5e-3;
    enc.noise_std = 0.1;
    return enc;
}

RunConfig preset_base(const std::string& id, double frequency_hz) {
    RunConfig run;
    SimulationConfig& sim = run.sim;
    sim.id = id;
    sim.true_params = OscillatorParams::nominal();
    sim.true_params.friction = CoulombFriction{kBenchFriction};
    sim.nominal_params = OscillatorParams::nominal();
    sim.trajectory = TrajectorySpec::two_revolutions();
    sim.control_frequency = frequency_hz;
    sim.duration = 15.0;
    sim.measurement = preset_measurement();
    sim.seed = 1;
    sim.feedforward_source = OnlineFeedforward{sim.control_period(), NewtonOptions{}};
    if (frequency_hz != 1000.0) {
        TableFeedforward empty;
        empty.table.dt = sim.control_period();
        sim.feedforward_source = empty;
    }
    return run;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, make] : registry()) names.push_back(name);
    return names;
}

std::optional<ExperimentPreset> find_preset(const std::string& name) {
    const auto it = registry().find(name);
    if (it == registry().end()) return std::nullopt;
    ExperimentPreset preset = it->second();
    for (RunConfig& run : preset.configs) {
        if (std::holds_alternative<TableFeedforward>(run.sim.feedforward_source) &&
            uses_feedforward(run.sim.mode)) {
            resolve_feedforward_table(run);
        }
    }
    return preset;
}

}  // namespace servofunnel::cli
