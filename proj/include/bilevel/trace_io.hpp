#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bilevel/flows.hpp"
#include "bilevel/trace.hpp"

namespace bilevel {

inline constexpr std::string_view kTraceHeader = "k,F_res,H_gap,dist,eps,step_norm,E_lambda";
inline constexpr std::string_view kFlowHeader = "t,F_res,H_gap,dist,eps,step_norm,E_lambda";

/// Shortest decimal that parses back to the same double; NaN becomes "".
std::string format_double(double v);
/// Inverse of format_double ("" is NaN). Returns false on malformed input.
bool parse_double_field(std::string_view s, double& out);

std::string trace_csv(const RunTrace& trace);
std::string flow_csv(const FlowTrace& trace);

/// Writes `content` to `path` (parent directories created). Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);
void write_flow_csv(const FlowTrace& trace, const std::filesystem::path& path);

/// Rows of a trace CSV (records only). ParseError messages carry the file name.
RunTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace bilevel
