// Subcommands of the servofunnel executable. Each returns the process exit
// status; configuration problems are thrown as ParseError/ValidationError.
#pragma once

#include "config.hpp"

#include <servofunnel/metrics.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace servofunnel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunOptions {
    std::filesystem::path output_dir = "out";
    unsigned jobs = 0;               ///< 0: hardware concurrency
    bool allow_failures = false;
    ErrorSignal signal = ErrorSignal::Measured;
};

/// Runs every config of the experiment and writes <id>.trace.csv (and
/// <id>.plant.csv when plant recording is on), metrics.csv and summary.txt.
int run_experiment(const Experiment& experiment, const RunOptions& options, std::ostream& out);

int simulate(const std::filesystem::path& config, const RunOptions& options, std::ostream& out);
int sweep(const std::string& preset_or_file, const RunOptions& options, std::ostream& out);

struct FeedforwardOptions {
    std::optional<std::filesystem::path> config;
    double dt = 1e-3;
    double horizon = 15.0;
    std::optional<double> y0, yf, t0, tf;
    std::optional<std::filesystem::path> out;   ///< stdout when empty
};
int feedforward(const FeedforwardOptions& options, std::ostream& out, std::ostream& err);

/// Recomputes the metrics row of a stored trace. The row matches the one
/// written by sweep for the same run.
int analyze(const std::filesystem::path& trace, ErrorSignal signal,
            const std::optional<std::filesystem::path>& out_file, std::ostream& out);

/// Prints the reduced realization and the internal-dynamics spectrum of the
/// nominal model. Exit status 1 when the model is not minimum phase.
int check_plant(const std::optional<std::filesystem::path>& config, std::ostream& out);

}  // namespace servofunnel::cli
