// Built-in experiments: the feedforward tuning sweep, the funnel sweep at
// 2 kHz, the aggressive funnel at both rates, and the combined controller.
#pragma once

#include "config.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace servofunnel::cli {

/// Feedforward tuning rows P1..P5.
inline constexpr std::array<TuningFactors, 5> kTuningTable = {{
    {0.3, 0.0},
    {0.1, 0.12},
    {0.1, 0.15},
    {0.1, 0.16},
    {0.08, 0.16},
}};

/// Funnel rows P1..P6 as (s, q, c).
inline constexpr std::array<FunnelSpec, 6> kFunnelTable = {{
    {5.0, 0.1, 0.3},
    {1.0, 0.1, 0.5},
    {3.0, 0.1, 0.5},
    {5.0, 0.1, 0.5},
    {8.0, 0.1, 0.5},
    {5.0, 0.3, 0.3},
}};

/// Coulomb friction of the simulated bench [N·m].
inline constexpr double kBenchFriction = 0.15;

/// Measurement used by every preset: filtered velocity with white noise,
/// no angle quantization.
EncoderMeasurement preset_measurement();

/// Common base of all presets at the given control rate. The feedforward
/// source is online at 1 kHz and a precomputed table otherwise.
RunConfig preset_base(const std::string& id, double frequency_hz);

std::vector<std::string> preset_names();
std::optional<ExperimentPreset> find_preset(const std::string& name);

}  // namespace servofunnel::cli
