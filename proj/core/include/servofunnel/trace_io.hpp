// CSV serialization of traces and metric rows. Numbers are written with 17
// significant digits so a file read back reproduces the doubles exactly.
#pragma once

#include "servofunnel/closedloop.hpp"
#include "servofunnel/metrics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace servofunnel {

inline constexpr const char* kTraceColumns =
    "t,y_measured,y_true,y_ref,e,psi,u_ffw,u_fb,u,newton_iterations";

/// One row per control tick. `header` lines are emitted as '# ' comments,
/// followed by a '# status=...' line.
void write_trace_csv(std::ostream& out, const Trace& trace, const std::vector<std::string>& header);

struct TraceFile {
    std::vector<std::string> header;   ///< comment lines without the '# ' prefix
    Trace trace;
};

/// Throws std::runtime_error with a line number on malformed input.
TraceFile read_trace_csv(std::istream& in);

/// Fine-grid plant samples: t,q1,q2,v1,v2,u.
void write_plant_csv(std::ostream& out, const Trace& trace, const std::vector<std::string>& header);

inline constexpr const char* kMetricsColumns =
    "run_id,mode,frequency_hz,u_sum_t,e_sum_t,var_u_s,e_sum_s";

/// Metric values print as "nan" when the report is absent.
std::string metrics_csv_row(const std::string& run_id, const std::string& mode,
                            double frequency_hz, const std::optional<MetricsReport>& report);

/// Formats a double with round-trip precision.
std::string format_double(double value);

}  // namespace servofunnel
