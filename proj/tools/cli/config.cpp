#include "config.hpp"

#include "presets.hpp"

#include <servofunnel/trace_io.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace servofunnel::cli {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

namespace {

std::string shortest(double x) { return fmt::format("{}", x); }

// Reads keys of one section and remembers which were consumed so leftovers
// can be reported.
class Section {
public:
    Section(const ptree& root, std::string name) : name_(std::move(name)) {
        if (const auto child = root.get_child_optional(name_)) node_ = &*child;
    }

    bool present() const { return node_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) {
        if (!node_) return std::nullopt;
        const auto value = node_->get_optional<std::string>(ptree::path_type(key, '\0'));
        if (!value) return std::nullopt;
        used_.insert(key);
        return *value;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        return raw(key).value_or(fallback);
    }

    std::optional<double> maybe_number(const std::string& key) {
        const auto value = raw(key);
        if (!value) return std::nullopt;
        double x = 0.0;
        const char* end = value->data() + value->size();
        const auto [ptr, ec] = std::from_chars(value->data(), end, x);
        if (ec != std::errc{} || ptr != end) {
            throw ParseError(fmt::format("[{}] {}: expected a number, got '{}'", name_, key, *value));
        }
        if (!std::isfinite(x)) {
            throw ValidationError(fmt::format("[{}] {}: value must be finite", name_, key));
        }
        return x;
    }

    double number(const std::string& key, double fallback) {
        return maybe_number(key).value_or(fallback);
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback) {
        const auto value = raw(key);
        if (!value) return fallback;
        Int x{};
        const char* end = value->data() + value->size();
        const auto [ptr, ec] = std::from_chars(value->data(), end, x);
        if (ec != std::errc{} || ptr != end) {
            throw ParseError(fmt::format("[{}] {}: expected an integer, got '{}'", name_, key, *value));
        }
        return x;
    }

    void finish() const {
        if (!node_) return;
        for (const auto& [key, child] : *node_) {
            if (!used_.contains(key)) {
                throw ParseError(fmt::format("[{}] {}: unknown key", name_, key));
            }
        }
    }

private:
    std::string name_;
    const ptree* node_ = nullptr;
    std::set<std::string> used_;
};

OscillatorParams read_params(Section& sec, const std::string& name) {
    OscillatorParams p;
    p.I1 = sec.number("I1", p.I1);
    p.I2 = sec.number("I2", p.I2);
    p.k = sec.number("k", p.k);
    p.d = sec.number("d", p.d);
    const std::string friction = sec.text("friction", "none");
    if (friction == "none") {
        p.friction = NoFriction{};
    } else if (friction == "coulomb") {
        p.friction = CoulombFriction{sec.number("friction_magnitude", 0.0)};
    } else {
        throw ParseError(fmt::format("[{}] friction: expected none or coulomb, got '{}'", name, friction));
    }
    sec.finish();
    return p;
}

NewtonOptions read_newton(Section& sec) {
    NewtonOptions opts;
    opts.max_iterations = sec.integer("max_iterations", opts.max_iterations);
    opts.residual_tolerance = sec.number("residual_tolerance", opts.residual_tolerance);
    const std::string jac = sec.text("jacobian", "analytic");
    if (jac == "analytic") {
        opts.jacobian = AnalyticJacobian{};
    } else if (jac == "finite_difference") {
        opts.jacobian = FiniteDifferenceJacobian{sec.number("fd_step", FiniteDifferenceJacobian{}.step)};
    } else {
        throw ParseError(
            fmt::format("[feedforward] jacobian: expected analytic or finite_difference, got '{}'", jac));
    }
    return opts;
}

void echo_params(std::vector<std::string>& out, const std::string& name, const OscillatorParams& p) {
    out.push_back(fmt::format("[{}]", name));
    out.push_back("I1 = " + shortest(p.I1));
    out.push_back("I2 = " + shortest(p.I2));
    out.push_back("k = " + shortest(p.k));
    out.push_back("d = " + shortest(p.d));
    if (const auto* c = std::get_if<CoulombFriction>(&p.friction)) {
        out.push_back("friction = coulomb");
        out.push_back("friction_magnitude = " + shortest(c->magnitude));
    } else {
        out.push_back("friction = none");
    }
}

void echo_newton(std::vector<std::string>& out, const NewtonOptions& opts) {
    out.push_back(fmt::format("max_iterations = {}", opts.max_iterations));
    out.push_back("residual_tolerance = " + shortest(opts.residual_tolerance));
    if (const auto* fd = std::get_if<FiniteDifferenceJacobian>(&opts.jacobian)) {
        out.push_back("jacobian = finite_difference");
        out.push_back("fd_step = " + shortest(fd->step));
    } else {
        out.push_back("jacobian = analytic");
    }
}

ptree read_ini(std::istream& in, const std::string& origin) {
    ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& ex) {
        throw ParseError(fmt::format("{}:{}: {}", origin, ex.line(), ex.message()));
    }
    return tree;
}

ptree read_ini_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
    return read_ini(in, path.string());
}

}  // namespace

RunConfig parse_run_config(const ptree& tree, const fs::path& base_dir, bool resolve_table) {
    static const std::set<std::string> kSections = {"run",        "plant",       "nominal",
                                                    "trajectory", "controller",  "feedforward",
                                                    "measurement", "initial_state"};
    for (const auto& [name, child] : tree) {
        if (!kSections.contains(name)) {
            if (child.empty()) throw ParseError(fmt::format("{}: key outside any section", name));
            throw ParseError(fmt::format("[{}]: unknown section", name));
        }
    }

    RunConfig run;
    SimulationConfig& sim = run.sim;

    Section r(tree, "run");
    sim.id = r.text("id", sim.id);
    sim.seed = r.integer<std::uint64_t>("seed", sim.seed);
    sim.duration = r.number("duration", sim.duration);
    sim.control_frequency = r.number("control_frequency", sim.control_frequency);
    sim.plant_substeps = r.integer<int>("plant_substeps", sim.plant_substeps);
    sim.record_every = r.integer<int>("record_every", sim.record_every);
    sim.input_limit = r.maybe_number("input_limit");
    r.finish();
    if (sim.id.empty() || sim.id.find_first_of("/\\ ") != std::string::npos) {
        throw ValidationError(fmt::format("[run] id: '{}' is not a valid file stem", sim.id));
    }

    Section plant(tree, "plant");
    sim.true_params = read_params(plant, "plant");
    Section nominal(tree, "nominal");
    sim.nominal_params = read_params(nominal, "nominal");

    Section traj(tree, "trajectory");
    TrajectorySpec spec = TrajectorySpec::two_revolutions();
    spec.y0 = traj.number("y0", spec.y0);
    spec.yf = traj.number("yf", spec.yf);
    spec.t0 = traj.number("t0", spec.t0);
    spec.tf = traj.number("tf", spec.tf);
    traj.finish();
    sim.trajectory = spec;

    Section ctl(tree, "controller");
    const std::string mode = ctl.text("mode", "feedforward");
    auto tuning = [&ctl] {
        TuningFactors f;
        f.f_act = ctl.number("f_act", f.f_act);
        f.f_fric = ctl.number("f_fric", f.f_fric);
        return f;
    };
    auto funnel = [&ctl] {
        FunnelSpec f;
        f.s = ctl.number("s", f.s);
        f.q_decay = ctl.number("q", f.q_decay);
        f.c = ctl.number("c", f.c);
        return f;
    };
    if (mode == "feedforward") {
        sim.mode = FeedforwardOnly{tuning()};
    } else if (mode == "feedback") {
        sim.mode = FeedbackOnly{funnel()};
    } else if (mode == "combined") {
        sim.mode = Combined{tuning(), funnel()};
    } else {
        throw ParseError(fmt::format(
            "[controller] mode: expected feedforward, feedback or combined, got '{}'", mode));
    }
    ctl.finish();

    Section ffw(tree, "feedforward");
    const std::string source = ffw.text("source", "online");
    const NewtonOptions newton = read_newton(ffw);
    if (source == "online") {
        sim.feedforward_source = OnlineFeedforward{sim.control_period(), newton};
    } else if (source == "table") {
        run.table_newton = newton;
        if (const auto file = ffw.raw("table")) {
            fs::path p(*file);
            if (p.is_relative()) p = base_dir / p;
            run.table_file = p.lexically_normal().string();
        }
        if (resolve_table && uses_feedforward(sim.mode)) {
            resolve_feedforward_table(run);
        } else {
            TableFeedforward empty;
            empty.table.dt = sim.control_period();
            sim.feedforward_source = empty;
        }
    } else {
        throw ParseError(fmt::format("[feedforward] source: expected online or table, got '{}'", source));
    }
    ffw.finish();

    Section meas(tree, "measurement");
    const std::string model = meas.text("model", "ideal");
    if (model == "ideal") {
        sim.measurement = IdealMeasurement{};
    } else if (model == "encoder") {
        EncoderMeasurement enc;
        enc.angle_quantum = meas.number("angle_quantum", enc.angle_quantum);
        enc.filter_time_constant = meas.number("filter_time_constant", enc.filter_time_constant);
        enc.noise_std = meas.number("noise_std", enc.noise_std);
        sim.measurement = enc;
    } else {
        throw ParseError(fmt::format("[measurement] model: expected ideal or encoder, got '{}'", model));
    }
    meas.finish();

    Section init(tree, "initial_state");
    if (init.present()) {
        GeneralizedState s = sim.resolved_initial_state();
        s.q[0] = init.number("q1", s.q[0]);
        s.q[1] = init.number("q2", s.q[1]);
        s.v[0] = init.number("v1", s.v[0]);
        s.v[1] = init.number("v2", s.v[1]);
        sim.initial_state = s;
    }
    init.finish();

    try {
        if (std::holds_alternative<TableFeedforward>(sim.feedforward_source) &&
            std::get<TableFeedforward>(sim.feedforward_source).table.size() == 0) {
            SimulationConfig check = sim;
            check.feedforward_source = OnlineFeedforward{sim.control_period(), newton};
            check.validate();
        } else {
            sim.validate();
        }
    } catch (const std::invalid_argument& ex) {
        throw ValidationError(ex.what());
    }
    return run;
}

RunConfig parse_run_config(std::istream& in, const fs::path& base_dir, bool resolve_table) {
    return parse_run_config(read_ini(in, "<config>"), base_dir, resolve_table);
}

RunConfig load_run_config(const fs::path& path) {
    try {
        return parse_run_config(read_ini_file(path), path.parent_path(), true);
    } catch (const ParseError& ex) {
        const std::string what = ex.what();
        if (what.starts_with(path.string())) throw;
        throw ParseError(fmt::format("{}: {}", path.string(), what));
    }
}

Experiment load_experiment(const std::string& name_or_path) {
    if (auto preset = find_preset(name_or_path)) return std::move(*preset);
    const fs::path path(name_or_path);
    if (!fs::exists(path)) {
        throw ParseError(fmt::format("'{}' is neither a preset nor a file", name_or_path));
    }
    const ptree tree = read_ini_file(path);
    if (!tree.get_child_optional("sweep")) return load_run_config(path);

    Section sweep(tree, "sweep");
    ExperimentPreset preset;
    preset.name = sweep.text("name", path.stem().string());
    std::istringstream list(sweep.text("configs", ""));
    sweep.finish();
    if (tree.size() != 1) throw ParseError(fmt::format("{}: a sweep file holds only [sweep]", path.string()));
    std::set<std::string> ids;
    for (std::string item; list >> item;) {
        fs::path p(item);
        if (p.is_relative()) p = path.parent_path() / p;
        RunConfig run = load_run_config(p);
        if (!ids.insert(run.sim.id).second) {
            throw ValidationError(fmt::format("sweep '{}': duplicate run id '{}'", preset.name, run.sim.id));
        }
        preset.configs.push_back(std::move(run));
    }
    if (preset.configs.empty()) throw ValidationError(fmt::format("sweep '{}' lists no configs", preset.name));
    return preset;
}

void resolve_feedforward_table(RunConfig& run) {
    SimulationConfig& sim = run.sim;
    if (run.table_file) {
        std::ifstream in(*run.table_file);
        if (!in) throw ValidationError(fmt::format("cannot open feedforward table '{}'", *run.table_file));
        try {
            sim.feedforward_source = TableFeedforward{read_feedforward_csv(in)};
        } catch (const std::exception& ex) {
            throw ParseError(fmt::format("{}: {}", *run.table_file, ex.what()));
        }
        return;
    }
    auto table = solve_feedforward(sim.nominal_params, sim.trajectory, sim.control_period(),
                                   sim.duration, run.table_newton);
    if (!table) {
        throw ValidationError(fmt::format("feedforward table for '{}' failed: Newton diverged at t = {}",
                                          sim.id, table.error().t));
    }
    sim.feedforward_source = TableFeedforward{std::move(*table)};
}

std::vector<std::string> echo_config(const RunConfig& run) {
    const SimulationConfig& sim = run.sim;
    std::vector<std::string> out;
    out.push_back("[run]");
    out.push_back("id = " + sim.id);
    out.push_back(fmt::format("seed = {}", sim.seed));
    out.push_back("duration = " + shortest(sim.duration));
    out.push_back("control_frequency = " + shortest(sim.control_frequency));
    out.push_back(fmt::format("plant_substeps = {}", sim.plant_substeps));
    out.push_back(fmt::format("record_every = {}", sim.record_every));
    if (sim.input_limit) out.push_back("input_limit = " + shortest(*sim.input_limit));

    echo_params(out, "plant", sim.true_params);
    echo_params(out, "nominal", sim.nominal_params);

    out.push_back("[trajectory]");
    out.push_back("y0 = " + shortest(sim.trajectory.y0));
    out.push_back("yf = " + shortest(sim.trajectory.yf));
    out.push_back("t0 = " + shortest(sim.trajectory.t0));
    out.push_back("tf = " + shortest(sim.trajectory.tf));

    out.push_back("[controller]");
    out.push_back("mode = " + mode_name(sim.mode));
    if (const auto f = tuning_of(sim.mode)) {
        out.push_back("f_act = " + shortest(f->f_act));
        out.push_back("f_fric = " + shortest(f->f_fric));
    }
    if (const auto f = funnel_of(sim.mode)) {
        out.push_back("s = " + shortest(f->s));
        out.push_back("q = " + shortest(f->q_decay));
        out.push_back("c = " + shortest(f->c));
    }

    out.push_back("[feedforward]");
    if (const auto* on = std::get_if<OnlineFeedforward>(&sim.feedforward_source)) {
        out.push_back("source = online");
        echo_newton(out, on->newton);
    } else {
        out.push_back("source = table");
        if (run.table_file) {
            out.push_back("table = " + *run.table_file);
        } else {
            echo_newton(out, run.table_newton);
        }
    }

    out.push_back("[measurement]");
    if (const auto* enc = std::get_if<EncoderMeasurement>(&sim.measurement)) {
        out.push_back("model = encoder");
        out.push_back("angle_quantum = " + shortest(enc->angle_quantum));
        out.push_back("filter_time_constant = " + shortest(enc->filter_time_constant));
        out.push_back("noise_std = " + shortest(enc->noise_std));
    } else {
        out.push_back("model = ideal");
    }

    if (sim.initial_state) {
        out.push_back("[initial_state]");
        out.push_back("q1 = " + shortest(sim.initial_state->q[0]));
        out.push_back("q2 = " + shortest(sim.initial_state->q[1]));
        out.push_back("v1 = " + shortest(sim.initial_state->v[0]));
        out.push_back("v2 = " + shortest(sim.initial_state->v[1]));
    }
    return out;
}

}  // namespace servofunnel::cli
