// mrftid: relay-test simulation, limit-cycle prediction, manifold generation and
// identification from the command line.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrftid/identify.hpp"
#include "mrftid/lprs.hpp"
#include "mrftid/manifold.hpp"
#include "mrftid/mrft.hpp"
#include "mrftid/step_fit.hpp"

using nlohmann::json;
using namespace mrftid;
namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 2;

// ---------------------------------------------------------------- plant specification

struct PlantSpec {
  std::optional<double> K, Tp, Td, tau;
  std::string file;
  bool attitude = false;
  bool altitude = false;
  double inertia = 0, rot_drag = 0, moment_gain = 0, tau_p = 0, tau_imu = 0;
  double mass = 0, thrust_gain = 0, z_drag = 0, tau_pos = 0;
  int rotors = 0;

  void add(CLI::App* app) {
    app->add_option("--K", K, "static gain K of the SOIPTD model");
    app->add_option("--Tp", Tp, "propulsion time constant [s]");
    app->add_option("--Td", Td, "aerodynamic time constant [s]");
    app->add_option("--tau", tau, "total delay [s]");
    app->add_option("--plant", file, "plant JSON file")->check(CLI::ExistingFile);
    app->add_flag("--attitude", attitude, "build the plant from attitude parameters");
    app->add_option("--inertia", inertia, "J_x [kg m^2]");
    app->add_option("--rot-drag", rot_drag, "B_x");
    app->add_option("--moment-gain", moment_gain, "k_M");
    app->add_option("--tau-p", tau_p, "propulsion delay [s]");
    app->add_option("--tau-imu", tau_imu, "IMU delay [s]");
    app->add_flag("--altitude", altitude, "build the plant from altitude parameters");
    app->add_option("--mass", mass, "m [kg]");
    app->add_option("--thrust-gain", thrust_gain, "k_F");
    app->add_option("--rotors", rotors, "number of rotors");
    app->add_option("--z-drag", z_drag, "D_z");
    app->add_option("--tau-pos", tau_pos, "position sensor delay [s]");
  }

  static Plant from_json(const json& j) {
    if (j.contains("K")) {
      return soiptd<double>({j.at("K").get<double>(), j.at("Tp").get<double>(),
                             j.at("Td").get<double>(), j.value("tau", 0.0)});
    }
    return Plant(j.at("gain").get<double>(), j.value("integrators", 0),
                 j.value("num_tc", std::vector<double>{}), j.value("den_tc", std::vector<double>{}),
                 j.value("delay", 0.0));
  }

  [[nodiscard]] std::pair<Plant, json> resolve() const {
    json cfg;
    if (!file.empty()) {
      std::ifstream in(file);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, file + ": " + e.what());
      }
      return {from_json(j), {{"source", file}, {"plant", j}}};
    }
    if (attitude) {
      if (!Tp) throw CLI::ValidationError("--Tp", "required for --attitude");
      cfg = {{"source", "attitude"}, {"inertia", inertia}, {"rot_drag", rot_drag},
             {"moment_gain", moment_gain}, {"Tp", *Tp}, {"tau_p", tau_p}, {"tau_imu", tau_imu}};
      return {attitude_plant<double>({inertia, rot_drag, moment_gain, *Tp, tau_p, tau_imu}), cfg};
    }
    if (altitude) {
      if (!Tp) throw CLI::ValidationError("--Tp", "required for --altitude");
      cfg = {{"source", "altitude"}, {"mass", mass}, {"thrust_gain", thrust_gain},
             {"rotors", rotors}, {"z_drag", z_drag}, {"Tp", *Tp}, {"tau_p", tau_p},
             {"tau_pos", tau_pos}};
      return {altitude_plant<double>({mass, thrust_gain, static_cast<double>(rotors), z_drag, *Tp,
                                      tau_p, tau_pos}),
              cfg};
    }
    if (!K || !Tp || !Td || !tau) {
      throw CLI::ValidationError("plant", "give --K --Tp --Td --tau, --plant, --attitude or --altitude");
    }
    cfg = {{"source", "soiptd"}, {"K", *K}, {"Tp", *Tp}, {"Td", *Td}, {"tau", *tau}};
    return {soiptd<double>({*K, *Tp, *Td, *tau}), cfg};
  }
};

json plant_json(const Plant& p) {
  return {{"gain", p.gain()},
          {"integrators", p.integrators()},
          {"num_tc", p.numerator_time_constants()},
          {"den_tc", p.denominator_time_constants()},
          {"delay", p.delay()}};
}

// ---------------------------------------------------------------- output helpers

struct Output {
  std::string dir = ".";
  std::string name;

  void add(CLI::App* app, const std::string& default_name) {
    name = default_name;
    app->add_option("--out-dir", dir, "output directory (env MRFT_OUT_DIR)")
        ->envname("MRFT_OUT_DIR")
        ->check(CLI::ExistingDirectory);
    app->add_option("--name", name, "base name of the output files");
  }

  [[nodiscard]] std::string path(const std::string& suffix) const {
    return (fs::path(dir) / (name + suffix)).string();
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Wall-clock data stays out of the primary outputs so they are byte-reproducible.
void write_sidecar(const Output& out, const std::string& command,
                   std::chrono::steady_clock::time_point started) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_file(out.path(".run.json"),
             dump({{"command", command}, {"timestamp", stamp}, {"elapsed_s", elapsed}}));
}

std::string comment_block(const json& config) {
  return "# config " + config.dump() + "\n";
}

json cycle_json(const LimitCycle& lc) {
  return {{"omega_hz", lc.frequency_hz}, {"amplitude", lc.amplitude}};
}

json options_json(const IdentOptions& o) {
  return {{"refine", o.refine},
          {"refine_rel_tol", o.refine_rel_tol},
          {"max_residual_rel", o.max_residual_rel},
          {"lprs_rel_tol", o.lprs.rel_tol},
          {"scan_points", o.lprs.scan_points}};
}

json stats_json(const MonteCarloStats& s) {
  json reasons = json::object();
  for (const auto& [k, v] : s.failure_reasons) reasons[k] = v;
  return {{"draws", s.draws},
          {"failures", s.failures},
          {"failure_rate", s.failure_rate},
          {"failure_reasons", reasons},
          {"td", {{"mean", s.td.mean}, {"std", s.td.std}}},
          {"tau", {{"mean", s.tau.mean}, {"std", s.tau.std}}}};
}

json result_json(const IdentResult& r) {
  json candidates = json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back({{"td", c.td},
                          {"tau", c.tau},
                          {"residual_hz", c.residual_hz},
                          {"combined_residual", c.combined_residual},
                          {"within_bounds", c.within_bounds}});
  }
  json j = {{"method", r.method},
            {"td", r.td},
            {"tau", r.tau},
            {"residual_hz", r.residual_hz},
            {"candidates", candidates}};
  if (r.stats) j["statistics"] = stats_json(*r.stats);
  return j;
}

// ---------------------------------------------------------------- identification inputs

struct IdentInputs {
  double tp = 0.0;
  double beta1 = 0.0, freq1 = 0.0, h1 = 1.0;
  std::optional<double> amp1;
  double beta2 = 0.0, freq2 = 0.0, h2 = 1.0;
  std::string manifold1, manifold2;
  double td_lo = 0.0, td_hi = INFINITY, tau_lo = 0.0, tau_hi = INFINITY;
  double gain = 1.0;
  bool single = false;
  bool no_refine = false;
  int spot_checks = 8;

  void add(CLI::App* app) {
    app->add_option("--tp", tp, "known propulsion time constant [s]")->required();
    app->add_option("--beta1", beta1, "beta of test 1")->required();
    app->add_option("--freq1", freq1, "measured frequency of test 1 [Hz]")->required();
    app->add_option("--h1", h1, "relay amplitude of test 1");
    app->add_option("--amp1", amp1, "measured amplitude of test 1 (single-test mode)");
    app->add_option("--manifold1", manifold1, "manifold file for beta1")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--beta2", beta2, "beta of test 2");
    app->add_option("--freq2", freq2, "measured frequency of test 2 [Hz]");
    app->add_option("--h2", h2, "relay amplitude of test 2");
    app->add_option("--manifold2", manifold2, "manifold file for beta2")->check(CLI::ExistingFile);
    app->add_option("--td-min", td_lo, "lower bound on T_d");
    app->add_option("--td-max", td_hi, "upper bound on T_d");
    app->add_option("--tau-min", tau_lo, "lower bound on tau");
    app->add_option("--tau-max", tau_hi, "upper bound on tau");
    app->add_option("--gain", gain, "known static gain K (single-test mode)");
    app->add_flag("--single", single, "identify from test 1 frequency and amplitude only");
    app->add_flag("--no-refine", no_refine, "keep the interpolated intersection");
    app->add_option("--spot-checks", spot_checks, "cells re-solved when loading a manifold");
  }

  void check() const {
    if (!single && (manifold2.empty() || !(freq2 > 0.0))) {
      throw CLI::ValidationError("two-frequency mode", "needs --beta2 --freq2 --manifold2");
    }
    if (single && !amp1) throw CLI::ValidationError("--single", "needs --amp1");
  }

  [[nodiscard]] PriorKnowledge prior() const {
    PriorKnowledge p;
    p.tp = tp;
    p.td_lo = td_lo;
    p.td_hi = td_hi;
    p.tau_lo = tau_lo;
    p.tau_hi = tau_hi;
    p.gain = gain;
    return p;
  }

  [[nodiscard]] json config() const {
    json j = {{"tp", tp},
              {"test1", {{"beta", beta1}, {"freq_hz", freq1}, {"h", h1}}},
              {"bounds", {{"td", {td_lo, std::isfinite(td_hi) ? json(td_hi) : json(nullptr)}},
                          {"tau", {tau_lo, std::isfinite(tau_hi) ? json(tau_hi) : json(nullptr)}}}},
              {"mode", single ? "single_test" : "two_frequency"},
              {"refine", !no_refine}};
    if (amp1) j["test1"]["amplitude"] = *amp1;
    if (single) {
      j["gain"] = gain;
    } else {
      j["test2"] = {{"beta", beta2}, {"freq_hz", freq2}, {"h", h2}};
    }
    return j;
  }
};

struct LoadedManifolds {
  Manifold m1, m2;
  json provenance = json::array();
};

LoadedManifolds load_inputs(const IdentInputs& in) {
  LoadOptions lo;
  lo.spot_checks = in.spot_checks;
  LoadedManifolds out;
  out.m1 = load_manifold(in.manifold1, lo);
  out.provenance.push_back({{"path", in.manifold1},
                            {"beta", out.m1.beta},
                            {"checksum", manifold_checksum(out.m1)},
                            {"solver_version", out.m1.generator.solver_version}});
  if (!in.single) {
    out.m2 = load_manifold(in.manifold2, lo);
    out.provenance.push_back({{"path", in.manifold2},
                              {"beta", out.m2.beta},
                              {"checksum", manifold_checksum(out.m2)},
                              {"solver_version", out.m2.generator.solver_version}});
  }
  return out;
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream s;
  s.precision(15);
  s << v;
  return s.str();
}

CLI::Validator open_unit_interval() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        const double v = std::stod(s);
        return (v > -1.0 && v < 1.0) ? std::string() : "beta must lie in (-1, 1)";
      },
      "(-1,1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrftid: MRFT simulation, LPRS limit cycles and manifold-based identification"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  const auto started = std::chrono::steady_clock::now();

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate the relay loop and detect the limit cycle");
  PlantSpec sim_plant;
  sim_plant.add(sim);
  double sim_beta = 0.0, sim_h = 1.0;
  std::optional<double> sim_dt, sim_duration;
  Output sim_out;
  sim->add_option("--beta", sim_beta, "MRFT beta")->required()->check(open_unit_interval());
  sim->add_option("--h", sim_h, "relay amplitude")->check(CLI::PositiveNumber);
  sim->add_option("--dt", sim_dt, "integration step [s]");
  sim->add_option("--duration", sim_duration, "simulated time [s]");
  sim_out.add(sim, "simulate");

  // solve
  auto* solve = app.add_subcommand("solve", "exact LPRS limit cycle and the describing-function estimate");
  PlantSpec solve_plant;
  solve_plant.add(solve);
  double solve_beta = 0.0, solve_h = 1.0;
  Output solve_out;
  solve->add_option("--beta", solve_beta, "MRFT beta")->required()->check(open_unit_interval());
  solve->add_option("--h", solve_h, "relay amplitude")->check(CLI::PositiveNumber);
  solve_out.add(solve, "solve");

  // gen-manifold
  auto* gen = app.add_subcommand("gen-manifold", "generate a unit frequency / unit gain manifold");
  double gen_beta = 0.0;
  GridSpec grid;
  unsigned gen_threads = 0;
  bool gen_stamp = false;
  Output gen_out;
  gen->add_option("--beta", gen_beta, "MRFT beta")->required()->check(open_unit_interval());
  gen->add_option("--tp-min", grid.tp_min, "smallest normalized T_p [s]")->capture_default_str();
  gen->add_option("--tp-max", grid.tp_max, "largest normalized T_p [s]")->capture_default_str();
  gen->add_option("--tp-count", grid.tp_count, "T_p grid points (log-spaced)")->capture_default_str();
  gen->add_option("--td-min", grid.td_min, "smallest normalized T_d [s]")->capture_default_str();
  gen->add_option("--td-max", grid.td_max, "largest normalized T_d [s]")->capture_default_str();
  gen->add_option("--td-count", grid.td_count, "T_d grid points (log-spaced)")->capture_default_str();
  gen->add_option("--threads", gen_threads, "worker threads (0 = all cores)");
  gen->add_flag("--stamp", gen_stamp, "embed the generation time in the manifold file");
  gen_out.add(gen, "");

  // identify
  auto* ident = app.add_subcommand("identify", "identify T_d and tau from MRFT observations");
  IdentInputs ident_in;
  Output ident_out;
  ident_in.add(ident);
  ident_out.add(ident, "identify");

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "Monte-Carlo noise sensitivity of the identification");
  IdentInputs sens_in;
  Output sens_out;
  MonteCarloOptions mc;
  sens_in.add(sens);
  sens->add_option("--sigma", mc.sigma_rel, "relative noise standard deviation")->check(CLI::NonNegativeNumber);
  sens->add_option("--draws", mc.draws, "number of draws")->check(CLI::Range(2, 10000000));
  sens->add_option("--seed", mc.seed, "random seed");
  sens->add_option("--threads", mc.threads, "worker threads (0 = all cores)");
  sens_out.add(sens, "sensitivity");

  // fit-step
  auto* fit = app.add_subcommand("fit-step", "fit a first-order-plus-delay model to a step log");
  std::string fit_log;
  Output fit_out;
  fit->add_option("--log", fit_log, "step log CSV (t,f)")->required()->check(CLI::ExistingFile);
  fit_out.add(fit, "fit_step");

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "emit manifold surfaces or slices as CSV");
  std::string plot_m1, plot_m2;
  std::optional<double> plot_f1, plot_f2, plot_tp;
  Output plot_out;
  plot->add_option("--manifold", plot_m1, "manifold file")->required()->check(CLI::ExistingFile);
  plot->add_option("--freq", plot_f1, "scale the manifold to this frequency [Hz]");
  plot->add_option("--manifold2", plot_m2, "second manifold for slice intersections")
      ->check(CLI::ExistingFile);
  plot->add_option("--freq2", plot_f2, "frequency for the second manifold [Hz]");
  plot->add_option("--tp", plot_tp, "emit the slice at this T_p instead of the surface");
  plot_out.add(plot, "plotdata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) {
      const auto [plant, pcfg] = sim_plant.resolve();
      const MrftConfig cfg{sim_beta, sim_h};
      const double dt = sim_dt.value_or(default_dt(plant));
      const double duration = sim_duration.value_or(suggested_duration(plant, cfg));
      const json config = {{"command", "simulate"}, {"plant_spec", pcfg}, {"plant", plant_json(plant)},
                           {"beta", sim_beta}, {"h", sim_h}, {"dt", dt}, {"duration", duration}};
      const SignalLog log = simulate_mrft(plant, cfg, dt, duration);
      std::ostringstream csv;
      csv << comment_block(config);
      write_log(csv, log);
      write_file(sim_out.path(".csv"), csv.str());
      json summary = {{"config", config}};
      int code = 0;
      try {
        const LimitCycle lc = detect_limit_cycle(log, cfg);
        summary["omega_hz"] = lc.frequency_hz;
        summary["amplitude"] = lc.amplitude;
        summary["quality"] = {{"period_spread", lc.period_spread}, {"steady_cycles", lc.steady_cycles}};
      } catch (const Error& e) {
        summary["error"] = {{"class", std::string(error_name(e.code()))}, {"message", e.what()}};
        std::cerr << e.what() << '\n';
        code = exit_code(e.code());
      }
      write_file(sim_out.path(".json"), dump(summary));
      write_sidecar(sim_out, "simulate", started);
      std::cout << dump(summary);
      return code;
    }

    if (*solve) {
      const auto [plant, pcfg] = solve_plant.resolve();
      const MrftConfig cfg{solve_beta, solve_h};
      const auto cycles = solve_limit_cycles(plant, cfg);
      const LimitCycle df = df_predict(plant, cfg);
      json all = json::array();
      for (const auto& c : cycles) all.push_back(cycle_json(c));
      const json result = {
          {"config", {{"command", "solve"}, {"plant_spec", pcfg}, {"plant", plant_json(plant)},
                      {"beta", solve_beta}, {"h", solve_h}}},
          {"omega_hz", cycles.front().frequency_hz},
          {"amplitude", cycles.front().amplitude},
          {"residual", cycles.front().residual},
          {"df_omega_hz", df.frequency_hz},
          {"df_amplitude", df.amplitude},
          {"all_cycles", all}};
      write_file(solve_out.path(".json"), dump(result));
      write_sidecar(solve_out, "solve", started);
      std::cout << dump(result);
      return 0;
    }

    if (*gen) {
      Manifold man = generate_ufm(gen_beta, grid, {}, gen_threads);
      if (gen_stamp) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        man.generator.timestamp = stamp;
      }
      if (gen_out.name.empty()) {
        std::ostringstream n;
        n << "manifold_beta" << gen_beta;
        gen_out.name = n.str();
      }
      save_manifold(man, gen_out.path(".json"));
      write_sidecar(gen_out, "gen-manifold", started);
      const json summary = {{"path", gen_out.path(".json")},
                            {"beta", gen_beta},
                            {"cells", man.tau.size()},
                            {"feasible", man.feasible_count()},
                            {"failed", man.generator.failed_cells.size()},
                            {"checksum", manifold_checksum(man)}};
      std::cout << dump(summary);
      return 0;
    }

    if (*ident || *sens) {
      const bool is_sens = static_cast<bool>(*sens);
      const IdentInputs& in = is_sens ? sens_in : ident_in;
      const Output& out = is_sens ? sens_out : ident_out;
      in.check();
      const LoadedManifolds m = load_inputs(in);
      IdentOptions opts;
      opts.refine = !in.no_refine;
      const TestObservation t1{in.beta1, in.h1, in.freq1, in.amp1};
      const TestObservation t2{in.beta2, in.h2, in.freq2, std::nullopt};
      IdentResult r;
      json config = in.config();
      config["command"] = is_sens ? "sensitivity" : "identify";
      config["options"] = options_json(opts);
      if (is_sens) {
        config["monte_carlo"] = {{"sigma_rel", mc.sigma_rel}, {"draws", mc.draws}, {"seed", mc.seed}};
        r = in.single ? monte_carlo_single_test(t1, in.prior(), m.m1, mc, opts)
                      : monte_carlo_two_freq({t1, t2}, in.prior(), {&m.m1, &m.m2}, mc, opts);
      } else {
        r = in.single ? identify_single_test(t1, in.prior(), m.m1, opts)
                      : identify_two_freq({t1, t2}, in.prior(), {&m.m1, &m.m2}, opts);
      }
      const json result = {{"config", config}, {"provenance", m.provenance}, {"result", result_json(r)}};
      write_file(out.path(".json"), dump(result));
      write_sidecar(out, config["command"].get<std::string>(), started);
      std::cout << dump(result);
      return 0;
    }

    if (*fit) {
      std::ifstream in(fit_log);
      const StepLog log = ingest_step_log(in);
      const StepFit f = fit_step_response(log);
      const json result = {{"config", {{"command", "fit-step"}, {"log", fit_log}, {"samples", log.t.size()}}},
                           {"k", f.k},
                           {"tp", f.tp},
                           {"tau_p", f.tau_p},
                           {"baseline", f.baseline},
                           {"rms", f.rms}};
      write_file(fit_out.path(".json"), dump(result));
      write_sidecar(fit_out, "fit-step", started);
      std::cout << dump(result);
      return 0;
    }

    if (*plot) {
      LoadOptions lo;
      lo.spot_checks = 0;
      const Manifold m1 = load_manifold(plot_m1, lo);
      json config = {{"command", "plotdata"}, {"manifold", plot_m1}, {"checksum", manifold_checksum(m1)}};
      std::ostringstream csv;
      std::size_t rows = 0;
      if (!plot_tp) {
        // Surface: one row per feasible cell, optionally scaled to a measured frequency.
        const ScaledManifold s = scale_manifold(m1, plot_f1.value_or(m1.freq_hz));
        config["freq_hz"] = plot_f1.value_or(m1.freq_hz);
        csv << comment_block(config) << "tp,td,tau,amp\n";
        for (std::size_t i = 0; i < s.tp_axis.size(); ++i) {
          for (std::size_t j = 0; j < s.td_axis.size(); ++j) {
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(j);
            if (!std::isfinite(s.tau(r, c))) continue;
            csv << csv_number(s.tp_axis[i]) << ',' << csv_number(s.td_axis[j]) << ','
                << csv_number(s.tau(r, c)) << ',' << csv_number(s.amp(r, c)) << '\n';
            ++rows;
          }
        }
      } else {
        const double f1 = plot_f1.value_or(m1.freq_hz);
        const SliceCurve c1 = slice_at_tp(scale_manifold(m1, f1), *plot_tp);
        config["freq_hz"] = f1;
        config["tp"] = *plot_tp;
        std::optional<SliceCurve> c2;
        if (!plot_m2.empty()) {
          const Manifold m2 = load_manifold(plot_m2, lo);
          const double f2 = plot_f2.value_or(m2.freq_hz);
          c2 = slice_at_tp(scale_manifold(m2, f2), *plot_tp);
          config["manifold2"] = plot_m2;
          config["checksum2"] = manifold_checksum(m2);
          config["freq2_hz"] = f2;
        }
        csv << comment_block(config) << (c2 ? "td,tau1,amp1,tau2,amp2\n" : "td,tau,amp\n");
        for (std::size_t j = 0; j < c1.td.size(); ++j) {
          csv << csv_number(c1.td[j]) << ',' << csv_number(c1.tau[j]) << ',' << csv_number(c1.amp[j]);
          if (c2) csv << ',' << csv_number(c2->tau_at(c1.td[j])) << ',' << csv_number(c2->amp_at(c1.td[j]));
          csv << '\n';
          ++rows;
        }
      }
      write_file(plot_out.path(".csv"), csv.str());
      write_sidecar(plot_out, "plotdata", started);
      std::cout << dump({{"path", plot_out.path(".csv")}, {"rows", rows}});
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsage;
}
