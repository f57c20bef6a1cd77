#include "mrftid/signal_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "mrftid/error.hpp"

namespace mrftid {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::FormatError,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

SignalLog ingest_log(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    for (auto field : split(view)) header.emplace_back(field);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::FormatError, "missing header line");

  auto column = [&](std::string_view name) -> long {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<long>(it - header.begin());
  };
  const long ct = column("t");
  const long ce = column("e");
  const long cu = column("u");
  const long cy = column("y");
  if (ct < 0 || ce < 0 || cu < 0) {
    throw Error(ErrorCode::FormatError, "header must contain columns t, e and u");
  }

  SignalLog log;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " fields");
    }
    log.t.push_back(parse_number(fields[static_cast<std::size_t>(ct)], line_no));
    log.e.push_back(parse_number(fields[static_cast<std::size_t>(ce)], line_no));
    log.u.push_back(parse_number(fields[static_cast<std::size_t>(cu)], line_no));
    if (cy >= 0) log.y.push_back(parse_number(fields[static_cast<std::size_t>(cy)], line_no));
  }
  if (log.t.size() >= 2) log.dt = log.t[1] - log.t[0];
  validate_log(log);
  return log;
}

void validate_log(const SignalLog& log) {
  const std::size_t n = log.t.size();
  if (n < 2) throw Error(ErrorCode::FormatError, "log needs at least two samples");
  if (log.e.size() != n || log.u.size() != n || (!log.y.empty() && log.y.size() != n)) {
    throw Error(ErrorCode::FormatError, "column lengths differ");
  }
  if (!(log.dt > 0.0)) throw Error(ErrorCode::SamplingError, "time must be strictly increasing");
  for (std::size_t i = 1; i < n; ++i) {
    const double step = log.t[i] - log.t[i - 1];
    if (!(step > 0.0)) {
      throw Error(ErrorCode::SamplingError,
                  "time decreases or repeats at sample " + std::to_string(i));
    }
    // Tolerance covers the rounding of printed time stamps.
    const double expected = log.t[0] + static_cast<double>(i) * log.dt;
    if (std::abs(log.t[i] - expected) > 1e-6 * log.dt * std::max(1.0, std::sqrt(double(i))) &&
        std::abs(step - log.dt) > 1e-6 * log.dt) {
      throw Error(ErrorCode::SamplingError,
                  "non-uniform sampling at sample " + std::to_string(i));
    }
  }
  double level_a = log.u[0];
  bool have_b = false;
  double level_b = 0.0;
  for (double u : log.u) {
    if (u == level_a || (have_b && u == level_b)) continue;
    if (have_b) throw Error(ErrorCode::FormatError, "relay column u has more than two levels");
    level_b = u;
    have_b = true;
  }
  if (have_b && std::abs(level_a + level_b) > 1e-9 * std::max(std::abs(level_a), std::abs(level_b))) {
    throw Error(ErrorCode::FormatError, "relay levels are not symmetric +/-h");
  }
}

void write_log(std::ostream& out, const SignalLog& log) {
  std::ostringstream buf;
  buf.precision(17);
  buf << (log.has_output() ? "t,e,u,y\n" : "t,e,u\n");
  for (std::size_t i = 0; i < log.size(); ++i) {
    buf << log.t[i] << ',' << log.e[i] << ',' << log.u[i];
    if (log.has_output()) buf << ',' << log.y[i];
    buf << '\n';
  }
  out << buf.str();
}

}  // namespace mrftid
