#include "bilevel/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bilevel {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double_field(std::string_view s, double& out) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  if (s.empty()) {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

namespace {

void append_row(std::string& out, const std::string& first, double f_res, double h_gap, double dist,
                double eps, double step_norm, const std::optional<double>& energy) {
  out += first;
  for (double v : {f_res, h_gap, dist, eps, step_norm}) {
    out += ',';
    out += format_double(v);
  }
  out += ',';
  if (energy) out += format_double(*energy);
  out += '\n';
}

}  // namespace

std::string trace_csv(const RunTrace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : trace.records) {
    append_row(out, std::to_string(r.k), r.F_res, r.H_gap, r.dist, r.eps, r.step_norm, r.E_lambda);
  }
  return out;
}

std::string flow_csv(const FlowTrace& trace) {
  std::string out(kFlowHeader);
  out += '\n';
  for (const auto& r : trace.records) {
    append_row(out, format_double(r.t), r.F_res, r.H_gap, r.dist, r.eps, r.step_norm, r.E_lambda);
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  write_text_file(path, trace_csv(trace));
}

void write_flow_csv(const FlowTrace& trace, const std::filesystem::path& path) {
  write_text_file(path, flow_csv(trace));
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  const std::string name = path.filename().string();
  if (!std::getline(in, line)) throw ParseError(1, name + ": empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError(1, name + ": unexpected header '" + line + "'");
  RunTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 7) throw ParseError(line_no, name + ": expected 7 fields");
    TraceRecord r;
    long long k = 0;
    const auto kres = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), k);
    if (kres.ec != std::errc() || kres.ptr != cells[0].data() + cells[0].size() || k < 0) {
      throw ParseError(line_no, name + ": bad iteration index");
    }
    r.k = k;
    double* targets[] = {&r.F_res, &r.H_gap, &r.dist, &r.eps, &r.step_norm};
    for (std::size_t j = 0; j < 5; ++j) {
      if (!parse_double_field(cells[j + 1], *targets[j])) {
        throw ParseError(line_no, name + ": bad number '" + std::string(cells[j + 1]) + "'");
      }
    }
    double e = 0.0;
    if (!parse_double_field(cells[6], e)) throw ParseError(line_no, name + ": bad energy value");
    if (!std::isnan(e)) r.E_lambda = e;
    if (!trace.records.empty() && r.k <= trace.records.back().k) {
      throw ParseError(line_no, name + ": iteration index not increasing");
    }
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace bilevel
