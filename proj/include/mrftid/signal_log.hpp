#pragma once

#include <iosfwd>
#include <vector>

namespace mrftid {

/// Uniformly sampled record of an MRFT experiment. CSV columns: t,e,u[,y].
struct SignalLog {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> e;
  std::vector<double> u;
  std::vector<double> y;  ///< empty when the source had no plant-output column

  [[nodiscard]] std::size_t size() const { return t.size(); }
  [[nodiscard]] bool has_output() const { return !y.empty(); }
};

/// Parses and validates a signal-log CSV. Lines starting with '#' are comments.
/// Throws FormatError on missing columns or a non two-valued relay column and
/// SamplingError on non-monotone or non-uniform time stamps.
SignalLog ingest_log(std::istream& in);

/// Checks the SignalLog invariants with the same rules as ingest_log.
void validate_log(const SignalLog& log);

void write_log(std::ostream& out, const SignalLog& log);

}  // namespace mrftid
