#include "servofunnel/feedforward.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace servofunnel {

namespace {

GeneralizedState unpack(const DaeVector& z) {
    GeneralizedState s;
    s.q << z[0], z[1];
    s.v << z[2], z[3];
    return s;
}

DaeVector pack(const InverseModelState& s) {
    DaeVector z;
    z << s.q[0], s.q[1], s.v[0], s.v[1], s.u;
    return z;
}

}  // namespace

void NewtonOptions::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("NewtonOptions: max_iterations must be >= 1");
    if (!(residual_tolerance > 0.0)) {
        throw std::invalid_argument("NewtonOptions: residual_tolerance must be > 0");
    }
    if (const auto* fd = std::get_if<FiniteDifferenceJacobian>(&jacobian)) {
        if (!(fd->step > 0.0)) throw std::invalid_argument("NewtonOptions: finite-difference step must be > 0");
    }
}

DaeVector implicit_euler_residual(const OscillatorParams& params,
                                  const InverseModelState& prev, double dt,
                                  double y_ref_next, const DaeVector& z) {
    const GeneralizedState s = unpack(z);
    const Eigen::Vector2d acc = eval_dynamics(params, s, z[4]);
    DaeVector r;
    r[0] = s.q[0] - prev.q[0] - dt * s.v[0];
    r[1] = s.q[1] - prev.q[1] - dt * s.v[1];
    r[2] = s.v[0] - prev.v[0] - dt * acc[0];
    r[3] = s.v[1] - prev.v[1] - dt * acc[1];
    r[4] = output(s) - y_ref_next;
    return r;
}

DaeJacobian implicit_euler_jacobian(const OscillatorParams& params, double dt,
                                    const DaeVector& /*z*/) {
    // Coulomb friction is piecewise constant in v1, so it contributes nothing
    // to the Jacobian away from v1 = 0.
    const double k1 = dt * params.k / params.I1, d1 = dt * params.d / params.I1;
    const double k2 = dt * params.k / params.I2, d2 = dt * params.d / params.I2;
    DaeJacobian J;
    J << 1.0, 0.0, -dt, 0.0, 0.0,
         0.0, 1.0, 0.0, -dt, 0.0,
         k1, -k1, 1.0 + d1, -d1, -dt / params.I1,
         -k2, k2, -d2, 1.0 + d2, 0.0,
         0.0, 0.0, 1.0, 0.0, 0.0;
    return J;
}

DaeJacobian implicit_euler_jacobian_fd(const OscillatorParams& params,
                                       const InverseModelState& prev, double dt,
                                       double y_ref_next, const DaeVector& z,
                                       double step) {
    const DaeVector r0 = implicit_euler_residual(params, prev, dt, y_ref_next, z);
    DaeJacobian J;
    for (int j = 0; j < 5; ++j) {
        const double h = step * std::max(1.0, std::abs(z[j]));
        DaeVector zp = z;
        zp[j] += h;
        J.col(j) = (implicit_euler_residual(params, prev, dt, y_ref_next, zp) - r0) / (zp[j] - z[j]);
    }
    return J;
}

double scaled_residual_norm(const DaeVector& residual, const DaeVector& z) {
    const double scale[5] = {std::max(1.0, std::abs(z[0])), std::max(1.0, std::abs(z[1])),
                             std::max(1.0, std::abs(z[2])), std::max(1.0, std::abs(z[3])),
                             std::max(1.0, std::abs(z[2]))};
    double norm = 0.0;
    for (int i = 0; i < 5; ++i) {
        const double ri = std::abs(residual[i]) / scale[i];
        if (std::isnan(ri)) return ri;
        norm = std::max(norm, ri);
    }
    return norm;
}

Outcome<InverseModelState, InconsistentStart> consistent_initialization(
    const OscillatorParams& nominal, const TrajectorySpec& spec, double t_start) {
    const double y = y_ref_at(spec, t_start);
    const double a = y_ref_derivative(spec, t_start);
    if (!std::isfinite(y) || !std::isfinite(a)) {
        return InconsistentStart{"reference or its derivative is not finite at the start time"};
    }
    InverseModelState s;
    s.t = t_start;
    s.q.setZero();
    s.v << y, y;
    // Zero deflection and equal velocities leave no shaft torque, so flywheel 1
    // accelerates at a only under u = I1 a minus the friction it must overcome.
    s.u = nominal.I1 * a - friction_torque(nominal.friction, y);

    const GeneralizedState gs{s.q, s.v};
    const Eigen::Vector2d acc = eval_dynamics(nominal, gs, s.u);
    if (!std::isfinite(s.u) || std::abs(output(gs) - y) > 0.0 ||
        std::abs(acc[0] - a) > 1e-12 * std::max(1.0, std::abs(a))) {
        return InconsistentStart{"servo constraint cannot be met at the start time"};
    }
    return s;
}

Outcome<StepResult, NewtonDiverged> implicit_euler_step(
    const InverseModelState& prev, double t_next, double dt,
    const OscillatorParams& nominal, const TrajectorySpec& spec,
    const NewtonOptions& opts) {
    const double y_ref_next = y_ref_at(spec, t_next);
    DaeVector z = pack(prev);

    for (int it = 0;; ++it) {
        const DaeVector r = implicit_euler_residual(nominal, prev, dt, y_ref_next, z);
        const double norm = scaled_residual_norm(r, z);
        if (norm <= opts.residual_tolerance) {
            const GeneralizedState s = unpack(z);
            return StepResult{InverseModelState{s.q, s.v, z[4], t_next}, it, norm};
        }
        if (it == opts.max_iterations || !std::isfinite(norm)) {
            return NewtonDiverged{0, t_next, norm};
        }
        const DaeJacobian J = std::visit(
            [&](const auto& method) -> DaeJacobian {
                using M = std::decay_t<decltype(method)>;
                if constexpr (std::is_same_v<M, FiniteDifferenceJacobian>) {
                    return implicit_euler_jacobian_fd(nominal, prev, dt, y_ref_next, z, method.step);
                } else {
                    return implicit_euler_jacobian(nominal, dt, z);
                }
            },
            opts.jacobian);
        z -= J.partialPivLu().solve(r);
    }
}

InverseModelStepper::InverseModelStepper(OscillatorParams nominal, TrajectorySpec spec,
                                         double dt, NewtonOptions opts, double t_start)
    : nominal_(std::move(nominal)), spec_(spec), dt_(dt), opts_(std::move(opts)), t_start_(t_start) {
    if (!(dt_ > 0.0)) throw std::invalid_argument("InverseModelStepper: dt must be > 0");
    nominal_.validate();
    spec_.validate();
    opts_.validate();
    auto init = consistent_initialization(nominal_, spec_, t_start_);
    if (!init) throw std::runtime_error("inconsistent start: " + init.error().reason);
    state_ = *init;
}

Outcome<StepResult, NewtonDiverged> InverseModelStepper::advance() {
    const std::size_t next = step_ + 1;
    const double t_next = t_start_ + static_cast<double>(next) * dt_;
    auto result = implicit_euler_step(state_, t_next, dt_, nominal_, spec_, opts_);
    if (!result) {
        NewtonDiverged err = result.error();
        err.step = next;
        return err;
    }
    state_ = result->state;
    step_ = next;
    return result;
}

double FeedforwardTable::at_index(std::size_t k) const {
    if (k >= u_ffw.size()) {
        throw std::out_of_range(fmt::format("feedforward table has {} samples, index {} requested",
                                            u_ffw.size(), k));
    }
    return u_ffw[k];
}

void FeedforwardTable::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("FeedforwardTable: dt must be > 0");
    if (t.size() != u_ffw.size()) throw std::invalid_argument("FeedforwardTable: column lengths differ");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!std::isfinite(t[k]) || !std::isfinite(u_ffw[k])) {
            throw std::invalid_argument(fmt::format("FeedforwardTable: non-finite sample at index {}", k));
        }
        const double expected = t.front() + static_cast<double>(k) * dt;
        if (std::abs(t[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
            throw std::invalid_argument(
                fmt::format("FeedforwardTable: grid not uniform with spacing {} at index {}", dt, k));
        }
    }
}

Outcome<FeedforwardTable, NewtonDiverged> solve_feedforward(
    const OscillatorParams& nominal, const TrajectorySpec& spec, double dt,
    double horizon, const NewtonOptions& opts) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("solve_feedforward: horizon must be >= 0");
    InverseModelStepper stepper(nominal, spec, dt, opts, 0.0);
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));

    FeedforwardTable table;
    table.dt = dt;
    table.provenance = TableProvenance::Precomputed;
    table.t.reserve(steps + 1);
    table.u_ffw.reserve(steps + 1);
    table.newton_iterations.reserve(steps + 1);
    table.t.push_back(0.0);
    table.u_ffw.push_back(stepper.state().u);
    table.newton_iterations.push_back(0);

    for (std::size_t k = 1; k <= steps; ++k) {
        auto step = stepper.advance();
        if (!step) return step.error();
        table.t.push_back(static_cast<double>(k) * dt);
        table.u_ffw.push_back(step->state.u);
        table.newton_iterations.push_back(step->iterations);
    }
    return table;
}

void write_feedforward_csv(std::ostream& out, const FeedforwardTable& table,
                           const std::vector<std::string>& header) {
    for (const auto& line : header) out << "# " << line << '\n';
    out << fmt::format("# dt={:.17g}\n", table.dt);
    out << "t,u_ffw\n";
    for (std::size_t k = 0; k < table.size(); ++k) {
        out << fmt::format("{:.17g},{:.17g}\n", table.t[k], table.u_ffw[k]);
    }
}

FeedforwardTable read_feedforward_csv(std::istream& in) {
    FeedforwardTable table;
    bool have_dt = false, have_columns = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("dt=");
            if (pos != std::string::npos && line.find_first_not_of("# ") == pos) {
                table.dt = std::stod(line.substr(pos + 3));
                have_dt = true;
            }
            continue;
        }
        if (!have_columns) {
            if (line != "t,u_ffw") {
                throw std::runtime_error(fmt::format("feedforward CSV line {}: expected header 't,u_ffw'", line_no));
            }
            have_columns = true;
            continue;
        }
        std::istringstream row(line);
        std::string t_str, u_str;
        if (!std::getline(row, t_str, ',') || !std::getline(row, u_str)) {
            throw std::runtime_error(fmt::format("feedforward CSV line {}: expected two columns", line_no));
        }
        try {
            table.t.push_back(std::stod(t_str));
            table.u_ffw.push_back(std::stod(u_str));
        } catch (const std::exception&) {
            throw std::runtime_error(fmt::format("feedforward CSV line {}: malformed number", line_no));
        }
    }
    if (!have_columns) throw std::runtime_error("feedforward CSV: missing 't,u_ffw' header");
    if (!have_dt && table.t.size() >= 2) table.dt = table.t[1] - table.t[0];
    table.newton_iterations.assign(table.u_ffw.size(), 0);
    table.provenance = TableProvenance::Precomputed;
    table.validate();
    return table;
}

}  // namespace servofunnel
