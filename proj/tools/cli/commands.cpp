#include "commands.hpp"

#include "presets.hpp"

#include <servofunnel/plant.hpp>
#include <servofunnel/sweep.hpp>
#include <servofunnel/trace_io.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace servofunnel::cli {

namespace fs = std::filesystem;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::ofstream open_output(const fs::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    return file;
}

const char* signal_name(ErrorSignal s) { return s == ErrorSignal::True ? "true" : "measured"; }

double percentile(std::vector<double> sorted, double p) {
    if (sorted.empty()) return std::nan("");
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

std::string status_detail(const RunStatus& status) {
    return std::visit(overloaded{
                          [](const Completed&) { return std::string("completed"); },
                          [](const FunnelViolated& v) {
                              return fmt::format("funnel_violated at {:.4f} s (|e| = {:.4g}, psi = {:.4g})",
                                                 v.at, std::abs(v.error), v.psi);
                          },
                          [](const FeedforwardDiverged& v) {
                              return fmt::format("newton_diverged at {:.4f} s (residual {:.3g})", v.at,
                                                 v.residual);
                          },
                      },
                      status);
}

std::string summary_line(const RunConfig& run, const SweepResult& result) {
    std::string line = fmt::format("{:<22} {:<11} {:>6g} Hz  ", run.sim.id, mode_name(run.sim.mode),
                                   run.sim.control_frequency);
    if (!result.trace) return line + "error: " + result.error;
    line += status_detail(result.trace->status);

    if (std::holds_alternative<OnlineFeedforward>(run.sim.feedforward_source) &&
        uses_feedforward(run.sim.mode)) {
        int max_it = 0;
        double sum = 0.0;
        std::size_t steps = 0;
        for (const TickSample& s : result.trace->ticks) {
            if (s.newton_iterations == 0) continue;
            max_it = std::max(max_it, s.newton_iterations);
            sum += s.newton_iterations;
            ++steps;
        }
        if (steps > 0) line += fmt::format("  newton mean {:.2f} max {}", sum / steps, max_it);
    }

    std::vector<double> us = result.timings.controller_seconds;
    std::sort(us.begin(), us.end());
    for (double& x : us) x *= 1e6;
    if (!us.empty()) {
        line += fmt::format("  tick us p50 {:.2f} p95 {:.2f} p99 {:.2f} max {:.2f}", percentile(us, 50),
                            percentile(us, 95), percentile(us, 99), us.back());
    }
    if (result.trace->completed() && !result.metrics) line += "  metrics: " + result.error;
    return line;
}

}  // namespace

int run_experiment(const Experiment& experiment, const RunOptions& options, std::ostream& out) {
    ExperimentPreset preset = std::visit(overloaded{
                                             [](const RunConfig& run) {
                                                 return ExperimentPreset{run.sim.id, {run}};
                                             },
                                             [](const ExperimentPreset& p) { return p; },
                                         },
                                         experiment);

    std::vector<SimulationConfig> configs;
    configs.reserve(preset.configs.size());
    for (const RunConfig& run : preset.configs) configs.push_back(run.sim);

    fs::create_directories(options.output_dir);
    const auto results = run_sweep(configs, options.jobs, options.signal);

    auto metrics_file = open_output(options.output_dir / "metrics.csv");
    metrics_file << "# experiment = " << preset.name << '\n';
    metrics_file << "# error_signal = " << signal_name(options.signal) << '\n';
    for (const RunConfig& run : preset.configs) {
        for (const auto& line : echo_config(run)) metrics_file << "# " << run.sim.id << ": " << line << '\n';
    }
    metrics_file << kMetricsColumns << '\n';

    std::ostringstream summary;
    summary << fmt::format("experiment {} ({} runs, output {})\n", preset.name, preset.configs.size(),
                           options.output_dir.string());
    std::size_t failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const RunConfig& run = preset.configs[i];
        const SweepResult& result = results[i];
        if (result.trace) {
            auto trace_file = open_output(options.output_dir / (run.sim.id + ".trace.csv"));
            write_trace_csv(trace_file, *result.trace, echo_config(run));
            if (run.sim.record_every > 0) {
                auto plant_file = open_output(options.output_dir / (run.sim.id + ".plant.csv"));
                write_plant_csv(plant_file, *result.trace, echo_config(run));
            }
        }
        if (!result.trace || !result.trace->completed()) ++failures;
        metrics_file << metrics_csv_row(run.sim.id, mode_name(run.sim.mode), run.sim.control_frequency,
                                        result.metrics)
                     << '\n';
        summary << summary_line(run, result) << '\n';
    }
    summary << fmt::format("{} of {} runs completed\n", results.size() - failures, results.size());

    auto summary_file = open_output(options.output_dir / "summary.txt");
    summary_file << summary.str();
    out << summary.str();

    if (failures > 0 && !options.allow_failures) return kExitRunFailed;
    return kExitOk;
}

int simulate(const fs::path& config, const RunOptions& options, std::ostream& out) {
    return run_experiment(load_run_config(config), options, out);
}

int sweep(const std::string& preset_or_file, const RunOptions& options, std::ostream& out) {
    return run_experiment(load_experiment(preset_or_file), options, out);
}

int feedforward(const FeedforwardOptions& options, std::ostream& out, std::ostream& err) {
    RunConfig base;
    if (options.config) {
        std::ifstream in(*options.config);
        if (!in) throw ParseError(fmt::format("cannot open '{}'", options.config->string()));
        base = parse_run_config(in, options.config->parent_path(), false);
    }
    OscillatorParams nominal = base.sim.nominal_params;
    TrajectorySpec spec = base.sim.trajectory;
    if (options.y0) spec.y0 = *options.y0;
    if (options.yf) spec.yf = *options.yf;
    if (options.t0) spec.t0 = *options.t0;
    if (options.tf) spec.tf = *options.tf;
    NewtonOptions newton = base.table_newton;
    if (const auto* on = std::get_if<OnlineFeedforward>(&base.sim.feedforward_source)) newton = on->newton;

    if (!(options.dt > 0.0) || !std::isfinite(options.dt)) throw ValidationError("--dt must be > 0");
    if (!(options.horizon >= 0.0) || !std::isfinite(options.horizon)) {
        throw ValidationError("--horizon must be >= 0");
    }
    try {
        spec.validate();
        nominal.validate();
        newton.validate();
    } catch (const std::invalid_argument& ex) {
        throw ValidationError(ex.what());
    }

    auto table = solve_feedforward(nominal, spec, options.dt, options.horizon, newton);
    if (!table) {
        err << fmt::format("feedforward: Newton diverged at step {} (t = {}), scaled residual {}\n",
                           table.error().step, table.error().t, table.error().residual);
        return kExitRunFailed;
    }

    const std::vector<std::string> header = {
        fmt::format("nominal I1={} I2={} k={} d={}", nominal.I1, nominal.I2, nominal.k, nominal.d),
        fmt::format("trajectory y0={} yf={} t0={} tf={}", spec.y0, spec.yf, spec.t0, spec.tf),
        fmt::format("horizon={}", options.horizon),
    };
    if (options.out) {
        if (options.out->has_parent_path()) fs::create_directories(options.out->parent_path());
        auto file = open_output(*options.out);
        write_feedforward_csv(file, *table, header);
    } else {
        write_feedforward_csv(out, *table, header);
    }
    return kExitOk;
}

int analyze(const fs::path& trace_path, ErrorSignal signal, const std::optional<fs::path>& out_file,
            std::ostream& out) {
    std::ifstream in(trace_path);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", trace_path.string()));
    TraceFile file;
    try {
        file = read_trace_csv(in);
    } catch (const std::runtime_error& ex) {
        throw ParseError(fmt::format("{}: {}", trace_path.string(), ex.what()));
    }

    std::ostringstream ini;
    for (const auto& line : file.header) ini << line << '\n';
    std::istringstream ini_in(ini.str());
    const RunConfig run = parse_run_config(ini_in, trace_path.parent_path(), false);

    std::optional<MetricsReport> metrics;
    if (file.trace.completed()) {
        try {
            metrics = report(file.trace, run.sim.trajectory, signal);
        } catch (const std::exception&) {
            metrics.reset();
        }
    }
    const std::string row =
        metrics_csv_row(run.sim.id, mode_name(run.sim.mode), run.sim.control_frequency, metrics);

    std::ostringstream text;
    text << "# source = " << trace_path.string() << '\n';
    text << "# error_signal = " << signal_name(signal) << '\n';
    text << kMetricsColumns << '\n' << row << '\n';
    if (out_file) {
        auto file_out = open_output(*out_file);
        file_out << text.str();
    }
    out << text.str();
    return kExitOk;
}

int check_plant(const std::optional<fs::path>& config, std::ostream& out) {
    OscillatorParams params = OscillatorParams::nominal();
    if (config) {
        std::ifstream in(*config);
        if (!in) throw ParseError(fmt::format("cannot open '{}'", config->string()));
        params = parse_run_config(in, config->parent_path(), false).sim.nominal_params;
    }
    const ReducedRealization rr = reduced_realization(params);
    const MinimumPhaseReport mp = check_minimum_phase(params);

    Eigen::IOFormat fmt_matrix(Eigen::FullPrecision, 0, ", ", "\n", "    [", "]");
    std::ostringstream text;
    text << fmt::format("I1 = {}  I2 = {}  k = {}  d = {}\n", params.I1, params.I2, params.k, params.d);
    text << "M =\n" << rr.M.format(fmt_matrix) << '\n';
    text << "A_tilde =\n" << rr.A_tilde.format(fmt_matrix) << '\n';
    text << "B_tilde =\n" << rr.B_tilde.transpose().format(fmt_matrix) << '\n';
    text << "C =\n" << rr.C.format(fmt_matrix) << '\n';
    text << fmt::format("Gamma = C B = {:.6f}\n", rr.Gamma);
    text << fmt::format("R = {:.6g}\n", rr.R);
    text << "S =\n" << rr.S.format(fmt_matrix) << '\n';
    text << "Q =\n" << rr.Q.format(fmt_matrix) << '\n';
    text << "P =\n" << rr.P.transpose().format(fmt_matrix) << '\n';
    for (const auto& ev : mp.eigenvalues) {
        text << fmt::format("eig(Q) = {:.6g} {} {:.6g}i\n", ev.real(), ev.imag() < 0 ? '-' : '+',
                            std::abs(ev.imag()));
    }
    text << "verdict: " << (mp.is_minimum_phase ? "minimum phase" : "not minimum phase") << '\n';
    out << text.str();
    return mp.is_minimum_phase ? kExitOk : kExitRunFailed;
}

}  // namespace servofunnel::cli
