#include "commands.hpp"
#include "presets.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <string_view>

using namespace servofunnel;
using namespace servofunnel::cli;

namespace {

// SERVOFUNNEL_OUTPUT_DIR and SERVOFUNNEL_JOBS provide defaults; explicit
// flags win.
void apply_environment(RunOptions& options) {
    if (const char* dir = std::getenv("SERVOFUNNEL_OUTPUT_DIR"); dir && *dir) options.output_dir = dir;
    if (const char* jobs = std::getenv("SERVOFUNNEL_JOBS"); jobs && *jobs) {
        const std::string_view text(jobs);
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw ValidationError(fmt::format("SERVOFUNNEL_JOBS: expected a count, got '{}'", text));
        }
        options.jobs = value;
    }
}

void add_run_flags(CLI::App* cmd, RunOptions& options, std::string& output_dir, bool& use_true) {
    cmd->add_option("-o,--output-dir", output_dir, "Directory for traces, metrics.csv and summary.txt");
    cmd->add_option("-j,--jobs", options.jobs, "Parallel runs (0: all cores)");
    cmd->add_flag("--allow-failures", options.allow_failures,
                  "Exit 0 even when a run ends with a funnel violation or Newton divergence");
    cmd->add_flag("--use-true-output", use_true, "Compute metrics from the true plant output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Servo-constraint feedforward and funnel feedback on a torsional oscillator"};
    app.require_subcommand(1);

    RunOptions run_options;
    std::string output_dir;
    bool use_true = false;

    std::string config_path;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run one configuration");
    simulate_cmd->add_option("config", config_path, "INI configuration file")->required();
    add_run_flags(simulate_cmd, run_options, output_dir, use_true);

    std::string sweep_target;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a preset or a sweep file");
    sweep_cmd->add_option("preset", sweep_target, "Preset name, sweep file or config file")->required();
    add_run_flags(sweep_cmd, run_options, output_dir, use_true);
    bool list_presets = false;
    auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");
    presets_cmd->add_flag("--verbose", list_presets, "Also list the runs of each preset");

    FeedforwardOptions ffw;
    std::string ffw_config, ffw_out;
    auto* ffw_cmd = app.add_subcommand("feedforward", "Solve the inverse model and write the table");
    ffw_cmd->add_option("--config", ffw_config, "Take nominal model, trajectory and Newton settings from a file");
    ffw_cmd->add_option("--dt", ffw.dt, "Step size [s]")->capture_default_str();
    ffw_cmd->add_option("--horizon", ffw.horizon, "End time [s]")->capture_default_str();
    ffw_cmd->add_option("--y0", ffw.y0, "Initial output [rad/s]");
    ffw_cmd->add_option("--yf", ffw.yf, "Final output [rad/s]");
    ffw_cmd->add_option("--t0", ffw.t0, "Transition start [s]");
    ffw_cmd->add_option("--tf", ffw.tf, "Transition end [s]");
    ffw_cmd->add_option("--out", ffw_out, "Output CSV (stdout when omitted)");

    std::string trace_path, analyze_out;
    bool analyze_true = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Recompute metrics from a stored trace");
    analyze_cmd->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--out", analyze_out, "Also write the metrics CSV here");
    analyze_cmd->add_flag("--use-true-output", analyze_true, "Use y_true - y_ref as the error");

    std::string plant_config;
    auto* plant_cmd = app.add_subcommand("check-plant", "Print the reduced realization and its zero dynamics");
    plant_cmd->add_option("--config", plant_config, "Take the nominal model from a file");

    CLI11_PARSE(app, argc, argv);

    try {
        RunOptions options;
        apply_environment(options);
        if (!output_dir.empty()) options.output_dir = output_dir;
        const bool jobs_from_flag = (simulate_cmd->count("--jobs") + sweep_cmd->count("--jobs")) > 0;
        if (jobs_from_flag) options.jobs = run_options.jobs;
        options.allow_failures = run_options.allow_failures;
        options.signal = use_true ? ErrorSignal::True : ErrorSignal::Measured;

        if (*simulate_cmd) return simulate(config_path, options, std::cout);
        if (*sweep_cmd) return sweep(sweep_target, options, std::cout);
        if (*presets_cmd) {
            for (const auto& name : preset_names()) {
                std::cout << name << '\n';
                if (!list_presets) continue;
                const auto preset = find_preset(name);
                for (const auto& run : preset->configs) std::cout << "  " << run.sim.id << '\n';
            }
            return kExitOk;
        }
        if (*ffw_cmd) {
            if (!ffw_config.empty()) ffw.config = ffw_config;
            if (!ffw_out.empty()) ffw.out = ffw_out;
            return feedforward(ffw, std::cout, std::cerr);
        }
        if (*analyze_cmd) {
            std::optional<std::filesystem::path> out;
            if (!analyze_out.empty()) out = analyze_out;
            return analyze(trace_path, analyze_true ? ErrorSignal::True : ErrorSignal::Measured, out,
                           std::cout);
        }
        if (*plant_cmd) {
            std::optional<std::filesystem::path> cfg;
            if (!plant_config.empty()) cfg = plant_config;
            return check_plant(cfg, std::cout);
        }
    } catch (const ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& ex) {
        std::cerr << "invalid configuration: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
