#include "servofunnel/trace_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace servofunnel {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double parse_double(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::runtime_error(fmt::format("trace CSV line {}: malformed number '{}'", line_no, field));
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string status_line(const RunStatus& status) {
    return std::visit(
        overloaded{
            [](const Completed&) { return std::string("status=completed"); },
            [](const FunnelViolated& v) {
                return fmt::format("status=funnel_violated at={:.17g} error={:.17g} psi={:.17g}", v.at,
                                   v.error, v.psi);
            },
            [](const FeedforwardDiverged& v) {
                return fmt::format("status=newton_diverged at={:.17g} residual={:.17g}", v.at, v.residual);
            },
        },
        status);
}

// Value of "key=" inside a status line, or NaN.
double status_field(std::string_view line, std::string_view key) {
    const std::string needle = std::string(key) + "=";
    const auto pos = line.find(needle);
    if (pos == std::string_view::npos) return std::nan("");
    auto rest = line.substr(pos + needle.size());
    rest = rest.substr(0, rest.find(' '));
    return parse_double(rest, 0);
}

RunStatus parse_status(std::string_view line) {
    if (line.starts_with("status=completed")) return Completed{};
    if (line.starts_with("status=funnel_violated")) {
        return FunnelViolated{status_field(line, "at"), status_field(line, "error"), status_field(line, "psi")};
    }
    if (line.starts_with("status=newton_diverged")) {
        return FeedforwardDiverged{status_field(line, "at"), status_field(line, "residual")};
    }
    throw std::runtime_error(fmt::format("trace CSV: unknown status line '{}'", line));
}

}  // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void write_trace_csv(std::ostream& out, const Trace& trace, const std::vector<std::string>& header) {
    for (const auto& line : header) out << "# " << line << '\n';
    out << "# " << status_line(trace.status) << '\n';
    out << kTraceColumns << '\n';
    fmt::memory_buffer buf;
    for (const TickSample& s : trace.ticks) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                       s.t, s.y_measured, s.y_true, s.y_ref, s.e, s.psi, s.u_ffw, s.u_fb, s.u,
                       s.newton_iterations);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

TraceFile read_trace_csv(std::istream& in) {
    TraceFile file;
    bool have_columns = false, have_status = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string_view body(line);
            body.remove_prefix(body.starts_with("# ") ? 2 : 1);
            if (body.starts_with("status=")) {
                file.trace.status = parse_status(body);
                have_status = true;
            } else {
                file.header.emplace_back(body);
            }
            continue;
        }
        if (!have_columns) {
            if (line != kTraceColumns) {
                throw std::runtime_error(fmt::format("trace CSV line {}: unexpected column header", line_no));
            }
            have_columns = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 10) {
            throw std::runtime_error(fmt::format("trace CSV line {}: expected 10 columns, got {}", line_no,
                                                 fields.size()));
        }
        TickSample s;
        s.t = parse_double(fields[0], line_no);
        s.y_measured = parse_double(fields[1], line_no);
        s.y_true = parse_double(fields[2], line_no);
        s.y_ref = parse_double(fields[3], line_no);
        s.e = parse_double(fields[4], line_no);
        s.psi = parse_double(fields[5], line_no);
        s.u_ffw = parse_double(fields[6], line_no);
        s.u_fb = parse_double(fields[7], line_no);
        s.u = parse_double(fields[8], line_no);
        s.newton_iterations = static_cast<int>(parse_double(fields[9], line_no));
        file.trace.ticks.push_back(s);
    }
    if (!have_columns) throw std::runtime_error("trace CSV: missing column header");
    if (!have_status) throw std::runtime_error("trace CSV: missing status line");
    return file;
}

void write_plant_csv(std::ostream& out, const Trace& trace, const std::vector<std::string>& header) {
    for (const auto& line : header) out << "# " << line << '\n';
    out << "t,q1,q2,v1,v2,u\n";
    for (const PlantSample& p : trace.plant) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.t, p.state.q[0],
                           p.state.q[1], p.state.v[0], p.state.v[1], p.u);
    }
}

std::string metrics_csv_row(const std::string& run_id, const std::string& mode,
                            double frequency_hz, const std::optional<MetricsReport>& report) {
    if (!report) return fmt::format("{},{},{:.17g},nan,nan,nan,nan", run_id, mode, frequency_hz);
    return fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", run_id, mode, frequency_hz,
                       report->u_sum_t, report->e_sum_t, report->var_u_s, report->e_sum_s);
}

}  // namespace servofunnel
