#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <openssl/evp.h>

#include "json.hpp"
#include "mrftid/manifold.hpp"

namespace mrftid {

using nlohmann::json;

namespace {

const char* method_name(SeriesMethod m) {
  return m == SeriesMethod::ClosedForm ? "closed_form" : "fourier";
}

json tolerances_json(const ManifoldTolerances& t) {
  return {
      {"tau_tol", t.tau_tol},
      {"verify_rel", t.verify_rel},
      {"verify", t.verify},
      {"lprs",
       {{"method", method_name(t.lprs.method)},
        {"scan_points", t.lprs.scan_points},
        {"scan_lo", t.lprs.scan_lo},
        {"scan_hi", t.lprs.scan_hi},
        {"rel_tol", t.lprs.rel_tol},
        {"series",
         {{"rel_tol", t.lprs.series.rel_tol},
          {"max_harmonics", t.lprs.series.max_harmonics},
          {"samples_per_period", t.lprs.series.samples_per_period}}}}},
  };
}

ManifoldTolerances tolerances_from(const json& j) {
  ManifoldTolerances t;
  t.tau_tol = j.at("tau_tol").get<double>();
  t.verify_rel = j.at("verify_rel").get<double>();
  t.verify = j.at("verify").get<bool>();
  const json& l = j.at("lprs");
  const auto method = l.at("method").get<std::string>();
  if (method != "closed_form" && method != "fourier") throw std::runtime_error("unknown method");
  t.lprs.method = method == "closed_form" ? SeriesMethod::ClosedForm : SeriesMethod::Fourier;
  t.lprs.scan_points = l.at("scan_points").get<int>();
  t.lprs.scan_lo = l.at("scan_lo").get<double>();
  t.lprs.scan_hi = l.at("scan_hi").get<double>();
  t.lprs.rel_tol = l.at("rel_tol").get<double>();
  const json& s = l.at("series");
  t.lprs.series.rel_tol = s.at("rel_tol").get<double>();
  t.lprs.series.max_harmonics = s.at("max_harmonics").get<int>();
  t.lprs.series.samples_per_period = s.at("samples_per_period").get<int>();
  return t;
}

json table_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::isfinite(m(i, j))) {
        row.push_back(m(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd table_from(const json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) throw std::runtime_error("table row count mismatch");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || row.size() != cols) throw std::runtime_error("table column count mismatch");
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          row[k].is_null() ? std::numeric_limits<double>::quiet_NaN() : row[k].get<double>();
    }
  }
  return m;
}

json payload(const Manifold& man) {
  json failed = json::array();
  for (const auto& f : man.generator.failed_cells) {
    failed.push_back({{"tp_index", f.tp_index}, {"td_index", f.td_index}, {"message", f.message}});
  }
  json timestamp = nullptr;
  if (man.generator.timestamp) timestamp = *man.generator.timestamp;
  return {
      {"format_version", kManifoldFormatVersion},
      {"model", man.model},
      {"beta", man.beta},
      {"freq_hz", man.freq_hz},
      {"gain", man.gain},
      {"integrators", man.integrators},
      {"tp_axis", man.tp_axis},
      {"td_axis", man.td_axis},
      {"tau", table_json(man.tau)},
      {"amp", table_json(man.amp)},
      {"generator",
       {{"tolerances", tolerances_json(man.generator.tolerances)},
        {"timestamp", timestamp},
        {"solver_version", man.generator.solver_version},
        {"failed_cells", failed}}},
  };
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string checksum_of(json doc) {
  doc.erase("checksum");
  doc["generator"].erase("timestamp");
  return sha256_hex(doc.dump());
}

bool strictly_increasing(const std::vector<double>& axis) {
  if (axis.size() < 2) return false;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i]) || !(axis[i] > 0.0)) return false;
    if (i > 0 && !(axis[i] > axis[i - 1])) return false;
  }
  return true;
}

void spot_check(const Manifold& man, const LoadOptions& options) {
  if (options.spot_checks <= 0) return;
  std::vector<Eigen::Index> cells;
  for (Eigen::Index c = 0; c < man.tau.size(); ++c) {
    if (std::isfinite(man.tau.data()[c])) cells.push_back(c);
  }
  std::mt19937_64 rng(options.seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(std::min<std::size_t>(cells.size(), static_cast<std::size_t>(options.spot_checks)));
  for (Eigen::Index c : cells) {
    // Column-major storage.
    const Eigen::Index i = c % man.tau.rows();
    const Eigen::Index j = c / man.tau.rows();
    const double tp = man.tp_axis[static_cast<std::size_t>(i)];
    const double td = man.td_axis[static_cast<std::size_t>(j)];
    const std::string where = "cell (" + std::to_string(i) + ", " + std::to_string(j) + ")";
    double f = 0.0;
    try {
      f = solve_limit_cycle(soiptd<double>({man.gain, tp, td, man.tau(i, j)}), {man.beta, 1.0},
                            man.generator.tolerances.lprs)
              .frequency_hz;
    } catch (const Error& e) {
      throw Error(ErrorCode::StaleManifold, where + " no longer solves: " + e.what());
    }
    if (std::abs(f / man.freq_hz - 1.0) > options.stale_rel) {
      throw Error(ErrorCode::StaleManifold,
                  where + " re-solves to " + std::to_string(f) + " Hz");
    }
  }
}

}  // namespace

std::string manifold_checksum(const Manifold& man) { return checksum_of(payload(man)); }

void save_manifold(const Manifold& man, std::ostream& out) {
  json doc = payload(man);
  doc["checksum"] = checksum_of(doc);
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed to write manifold");
}

void save_manifold(const Manifold& man, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  save_manifold(man, out);
}

Manifold load_manifold(std::istream& in, const LoadOptions& options) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptManifold, std::string("parse error: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") ||
      !doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != kManifoldFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "expected format_version " + std::to_string(kManifoldFormatVersion));
  }

  Manifold man;
  try {
    const auto stored = doc.at("checksum").get<std::string>();
    if (stored != checksum_of(doc)) throw Error(ErrorCode::CorruptManifold, "checksum mismatch");
    man.model = doc.at("model").get<std::string>();
    if (man.model != "SOIPTD") throw Error(ErrorCode::CorruptManifold, "unknown model " + man.model);
    man.beta = doc.at("beta").get<double>();
    man.freq_hz = doc.at("freq_hz").get<double>();
    man.gain = doc.at("gain").get<double>();
    man.integrators = doc.at("integrators").get<int>();
    man.tp_axis = doc.at("tp_axis").get<std::vector<double>>();
    man.td_axis = doc.at("td_axis").get<std::vector<double>>();
    man.tau = table_from(doc.at("tau"), man.tp_axis.size(), man.td_axis.size());
    man.amp = table_from(doc.at("amp"), man.tp_axis.size(), man.td_axis.size());
    const json& gen = doc.at("generator");
    man.generator.tolerances = tolerances_from(gen.at("tolerances"));
    if (!gen.at("timestamp").is_null()) man.generator.timestamp = gen["timestamp"].get<std::string>();
    man.generator.solver_version = gen.at("solver_version").get<std::string>();
    for (const json& f : gen.at("failed_cells")) {
      man.generator.failed_cells.push_back({f.at("tp_index").get<int>(), f.at("td_index").get<int>(),
                                            f.at("message").get<std::string>()});
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CorruptManifold, std::string("malformed field: ") + e.what());
  }

  if (!strictly_increasing(man.tp_axis) || !strictly_increasing(man.td_axis)) {
    throw Error(ErrorCode::CorruptManifold, "axes must be positive and strictly increasing");
  }
  for (Eigen::Index c = 0; c < man.tau.size(); ++c) {
    const double t = man.tau.data()[c];
    const double a = man.amp.data()[c];
    if (std::isfinite(t) != std::isfinite(a) || (std::isfinite(t) && (t < 0.0 || !(a > 0.0)))) {
      throw Error(ErrorCode::CorruptManifold, "tau/amp tables inconsistent");
    }
  }
  if (std::abs(man.beta) >= 1.0) throw Error(ErrorCode::CorruptManifold, "beta outside (-1, 1)");
  spot_check(man, options);
  return man;
}

Manifold load_manifold(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return load_manifold(in, options);
}

}  // namespace mrftid
