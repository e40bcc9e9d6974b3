#include "servofunnel/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace servofunnel {

namespace {

SweepResult run_one(const SimulationConfig& config, ErrorSignal signal) {
    SweepResult result;
    result.id = config.id;
    try {
        result.trace = run_simulation(config, &result.timings);
    } catch (const std::exception& ex) {
        result.error = ex.what();
        return result;
    }
    if (!result.trace->completed()) {
        result.error = "run ended with status " + status_name(result.trace->status);
        return result;
    }
    try {
        result.metrics = report(*result.trace, config.trajectory, signal);
    } catch (const std::exception& ex) {
        result.error = ex.what();
    }
    return result;
}

}  // namespace

std::vector<SweepResult> run_sweep(const std::vector<SimulationConfig>& configs,
                                   unsigned jobs, ErrorSignal signal) {
    std::vector<SweepResult> results(configs.size());
    if (configs.empty()) return results;

    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(configs.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            results[i] = run_one(configs[i], signal);
        }
    };
    if (jobs == 1) {
        worker();
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    pool.clear();
    return results;
}

}  // namespace servofunnel
