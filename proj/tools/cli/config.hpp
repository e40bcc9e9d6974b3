// INI configuration files for single runs and sweeps.
//
//   [run]          id, seed, duration, control_frequency, plant_substeps,
//                  record_every, input_limit
//   [plant]        true plant: I1, I2, k, d, friction (none|coulomb),
//                  friction_magnitude
//   [nominal]      controller model, same keys as [plant]
//   [trajectory]   y0, yf, t0, tf
//   [controller]   mode (feedforward|feedback|combined), f_act, f_fric, s, q, c
//   [feedforward]  source (online|table), table, max_iterations,
//                  residual_tolerance, jacobian (analytic|finite_difference),
//                  fd_step
//   [measurement]  model (ideal|encoder), angle_quantum,
//                  filter_time_constant, noise_std
//   [initial_state] q1, q2, v1, v2
//
// A file with a [sweep] section (name, configs) lists other config files
// instead. Unknown sections and keys are rejected.
#pragma once

#include <servofunnel/closedloop.hpp>

#include <boost/property_tree/ptree_fwd.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace servofunnel::cli {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    SimulationConfig sim;
    /// Feedforward table file for source = table; computed from the nominal
    /// model when empty.
    std::optional<std::string> table_file;
    /// Solver settings for a computed table.
    NewtonOptions table_newton;
};

struct ExperimentPreset {
    std::string name;
    std::vector<RunConfig> configs;
};

using Experiment = std::variant<RunConfig, ExperimentPreset>;

/// Parses and validates one run. With `resolve_table` false a table source is
/// left empty and validation of the table is skipped.
RunConfig parse_run_config(const boost::property_tree::ptree& tree,
                           const std::filesystem::path& base_dir, bool resolve_table = true);
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir,
                           bool resolve_table = true);

/// Built-in preset name, sweep file, or single config file.
Experiment load_experiment(const std::string& name_or_path);
RunConfig load_run_config(const std::filesystem::path& path);

/// Computes a table source that has no samples yet.
void resolve_feedforward_table(RunConfig& run);

/// INI lines that parse back to the same configuration.
std::vector<std::string> echo_config(const RunConfig& run);

}  // namespace servofunnel::cli
