#pragma once

#include "servofunnel/closedloop.hpp"
#include "servofunnel/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace servofunnel {

struct SweepResult {
    std::string id;
    std::optional<Trace> trace;
    /// Absent when the run failed or its trace does not cover the windows.
    std::optional<MetricsReport> metrics;
    /// Configuration or metric error for this entry; empty on success.
    std::string error;
    RunTimings timings;
};

/// Runs every configuration on up to `jobs` threads (0: hardware
/// concurrency). Results keep the input order; per-entry failures are
/// captured in that entry.
std::vector<SweepResult> run_sweep(const std::vector<SimulationConfig>& configs,
                                   unsigned jobs = 0,
                                   ErrorSignal signal = ErrorSignal::Measured);

}  // namespace servofunnel
