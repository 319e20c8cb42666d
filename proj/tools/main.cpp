#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "subharmonic/calibration.hpp"
#include "subharmonic/circuit.hpp"
#include "subharmonic/dynamics.hpp"
#include "subharmonic/errors.hpp"
#include "subharmonic/io.hpp"
#include "subharmonic/steady_state.hpp"

using namespace subharmonic;
using cli::RunConfig;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

json config_json(const std::string& cmd, const RunConfig& cfg) {
  json c = json::object();
  std::istringstream in(cfg.dump());
  for (std::string line; std::getline(in, line);) {
    auto eq = line.find(" = ");
    if (eq != std::string::npos) c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return {{"command", cmd}, {"seed", cfg.seed()}, {"config", c}};
}

std::string header(const std::string& cmd, const RunConfig& cfg) {
  return comment_block("subharmonic " + cmd + "\n" + cfg.dump());
}

bool want_json(const RunConfig& cfg) {
  const auto& f = cfg.raw("format");
  if (f != "csv" && f != "json") throw UsageError("--format must be csv or json, got '" + f + "'");
  return f == "json";
}

struct Output {
  fs::path dir;
  std::vector<std::string> written;

  explicit Output(const RunConfig& cfg) : dir(cfg.out_dir()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  }
  void put(const std::string& name, const std::string& bytes) {
    auto p = (dir / name).string();
    write_atomic(p, bytes);
    written.push_back(p);
  }
};

// table: csv with header comment, or a json array of row objects
void emit_table(Output& out, const std::string& stem, const std::string& cmd, const RunConfig& cfg,
                const std::vector<std::string>& cols, const std::vector<std::vector<std::string>>& rows) {
  if (want_json(cfg)) {
    json j = config_json(cmd, cfg);
    j["rows"] = json::array();
    for (const auto& r : rows) {
      json o;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        char* end = nullptr;
        double x = std::strtod(r[k].c_str(), &end);
        o[cols[k]] = (end && *end == 0 && !r[k].empty()) ? json(x) : json(r[k]);
      }
      j["rows"].push_back(o);
    }
    out.put(stem + ".json", j.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << header(cmd, cfg);
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << "\n";
  }
  out.put(stem + ".csv", os.str());
}

double mhz_to_rad(double mhz) { return kTwoPi * mhz * 1e6; }

// |B2|^2 at the resonator: from pd_w when given (through X if calibrated, else Att), else b2_sq
double resolve_b2_sq(const RunConfig& cfg, const std::string& section, const ModePair& m, double delta1) {
  auto pd = cfg.optional_number(section + ".pd_w");
  if (!pd) {
    double b2 = cfg.number(section + ".b2_sq");
    if (!(b2 >= 0)) throw ConfigError(section + ".b2_sq must be non-negative");
    return b2;
  }
  if (!(*pd >= 0)) throw ConfigError(section + ".pd_w must be non-negative");
  auto ch = cfg.chain();
  if (ch.X) return b2_sq_from_X(m, delta1, *pd, *ch.X);
  return drive_b2_sq_from_power(*pd, ch.att_db, m.m1.omega + delta1);
}

std::complex<double> complex_value(const RunConfig& cfg, const std::string& key) {
  auto v = cfg.number_list(key);
  if (v.size() != 2) throw ConfigError(key + " takes 're, im'");
  return {v[0], v[1]};
}

json cplx_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

void cmd_spectrum(const RunConfig& cfg, Output& out) {
  auto p = cfg.device();
  auto conv = cfg.convention();
  auto grid = cli::linspace("spectrum flux", cfg.number("spectrum.flux_min"), cfg.number("spectrum.flux_max"),
                            cfg.integer("spectrum.flux_points"));
  std::vector<std::vector<std::string>> rows;
  for (double phi : grid) {
    auto m = modes_at(p, phi, conv);
    double f1 = m.m1.omega / kTwoPi, f2 = m.m2.omega / kTwoPi;
    rows.push_back({num(phi), num(f1), num(f2), num(3 * f1 - f2), num(m.m1.alpha / kTwoPi),
                    num(m.m2.alpha / kTwoPi), num(m.m1.gamma / kTwoPi), num(m.m2.gamma / kTwoPi)});
  }
  emit_table(out, "spectrum", "spectrum", cfg,
             {"phi[Phi0]", "f1[Hz]", "f2[Hz]", "3f1_minus_f2[Hz]", "alpha1_over_2pi[Hz]", "alpha2_over_2pi[Hz]",
              "gamma1_over_2pi[Hz]", "gamma2_over_2pi[Hz]"},
             rows);
}

void cmd_steady(const RunConfig& cfg, Output& out) {
  auto m = modes_at(cfg.device(), cfg.number("flux"), cfg.convention());
  double d1 = mhz_to_rad(cfg.number("steady.delta1_mhz"));
  double b2 = resolve_b2_sq(cfg, "steady", m, d1);
  auto pt = reduce_detuning(m, d1, std::polar(std::sqrt(b2), cfg.number("steady.phiB")));
  SolveOptions so;
  so.include_unstable = cfg.flag("steady.include_unstable");
  auto states = solve_selfconsistent(pt, so);

  json j = config_json("steady", cfg);
  j["point"] = {{"delta", pt.delta},         {"Delta", pt.Delta}, {"gamma1", pt.gamma1},
                {"gamma2", pt.gamma2},       {"gamma2_ext", pt.gamma2_ext}, {"beta", pt.beta},
                {"alpha1_rad_s", pt.alpha1}, {"b2_sq_per_s", b2}, {"F", pt.drive_F()}};
  if (auto w = existence_window(pt.delta, pt.gamma1))
    j["point"]["window_r2_sq"] = json::array({w->r2_minus_sq, w->r2_plus_sq});
  j["states"] = json::array();
  for (const auto& s : states) {
    json e = {{"kind", to_string(s.kind)}, {"index", s.index},   {"r1_sq", s.r1_sq},
              {"r2_sq", s.r2_sq},          {"theta", s.theta},   {"phi1", s.phi1},
              {"phi2", s.phi2},            {"sector", s.sector}, {"A1", cplx_json(s.A1)},
              {"A2", cplx_json(s.A2)},     {"a1", cplx_json(s.A1)}, {"a2", cplx_json(s.A2 / pt.beta)},
              {"stable", s.stable},        {"residual", s.residual}};
    e["eigenvalues_alpha1"] = json::array();
    for (auto z : s.eigenvalues) e["eigenvalues_alpha1"].push_back(cplx_json(z));
    if (s.lambda0) e["lambda0"] = cplx_json(*s.lambda0);
    if (s.closed_form_lambda_sq) e["closed_form_lambda_sq"] = *s.closed_form_lambda_sq;
    if (s.closed_form_agrees) e["closed_form_agrees"] = *s.closed_form_agrees;
    j["states"].push_back(e);
  }
  out.put("steady.json", j.dump(2) + "\n");
}

void cmd_sweep(const RunConfig& cfg, Output& out) {
  auto ch = cfg.chain();
  if (!ch.X) throw ConfigError("sweep needs chain.X (run fit first)");
  auto m = modes_at(cfg.device(), cfg.number("flux"), cfg.convention());
  auto dbm = cli::linspace("sweep drive power", cfg.number("sweep.pd_dbm_min"), cfg.number("sweep.pd_dbm_max"),
                           cfg.integer("sweep.pd_points"));
  auto mhz = cli::linspace("sweep detuning", cfg.number("sweep.delta1_mhz_min"), cfg.number("sweep.delta1_mhz_max"),
                           cfg.integer("sweep.delta1_points"));
  std::vector<double> pd, d1;
  for (double x : dbm) pd.push_back(dbm_to_w(x));
  for (double x : mhz) d1.push_back(mhz_to_rad(x));
  auto r = region_map(m, ch, pd, d1, cfg.threads());

  std::vector<std::vector<std::string>> rows;
  for (std::size_t id = 0; id < d1.size(); ++id)
    for (std::size_t ip = 0; ip < pd.size(); ++ip)
      rows.push_back({num(mhz[id] * 1e6), num(dbm[ip]), num(pd[ip]), r.at(id, ip) == Region::I ? "I" : "II+III"});
  emit_table(out, "sweep_regions", "sweep", cfg, {"delta1_over_2pi[Hz]", "pd[dBm]", "pd[W]", "region"}, rows);

  json b = config_json("sweep", cfg);
  b["boundary"] = json::array();
  for (auto [x, p] : r.boundary)
    b["boundary"].push_back({{"delta1_over_2pi_hz", x / kTwoPi}, {"pd_max_w", p}, {"pd_max_dbm", w_to_dbm(p)}});
  out.put("sweep_boundary.json", b.dump(2) + "\n");
}

void cmd_simulate(const RunConfig& cfg, Output& out) {
  auto m = modes_at(cfg.device(), cfg.number("flux"), cfg.convention());
  double d1 = mhz_to_rad(cfg.number("simulate.delta1_mhz"));
  double b2 = resolve_b2_sq(cfg, "simulate", m, d1);
  auto pt = reduce_detuning(m, d1, std::polar(std::sqrt(b2), cfg.number("simulate.phiB")));
  auto sys = TwoModeSystem::from_point(pt);

  // default: half the explicit-step bound with the photon estimate 8|delta1|/7
  double rate = std::max({std::abs(d1) * 15.0 / 7.0, sys.gamma1, sys.gamma2});
  double dt = cfg.optional_number("simulate.dt_s").value_or(0.05 / rate);
  double duration = cfg.number("simulate.duration_s");
  if (!(dt > 0) || !(duration > dt)) throw ConfigError("simulate needs 0 < dt_s < duration_s");
  auto every = cfg.integer("simulate.record_every");
  if (every < 1) throw ConfigError("simulate.record_every must be at least 1");
  IntegrateOptions opt;
  opt.record_every = static_cast<std::size_t>(every);
  std::optional<NoiseConfig> noise;
  if (cfg.flag("simulate.noise")) {
    noise = NoiseConfig::thermal(sys, cfg.number("simulate.n_th"), cfg.seed());
    try {
      noise->scheme = noise_scheme_from_string(cfg.raw("simulate.scheme"));
    } catch (const Error& e) {
      throw ConfigError(std::string("simulate.scheme: ") + e.what());
    }
  }
  auto traj = integrate(sys, complex_value(cfg, "simulate.a1"), complex_value(cfg, "simulate.a2"), duration, dt,
                        noise, opt);
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << "\n";

  json meta = config_json("simulate", cfg);
  out.put("trajectory.trpl", trajectory_to_binary(traj, meta.dump()));

  double range = 0;
  if (auto r = cfg.optional_number("simulate.hist_range")) {
    range = *r;
  } else if (existence_window(pt.delta, pt.gamma1)) {
    range = 1.5 * std::sqrt(max_intensity(pt.delta, pt.gamma1).r1_max_sq);
  } else {
    for (auto z : traj.a1) range = std::max(range, 1.5 * std::abs(z));
  }
  range = std::max(range, 1e-3);
  auto bins = cfg.integer("simulate.bins");
  if (bins < 1) throw ConfigError("simulate.bins must be at least 1");
  auto edges = uniform_edges(-range, range, static_cast<std::size_t>(bins));
  auto fs_list = cfg.number_list("simulate.fs_hz");
  if (fs_list.empty()) throw UsageError("simulate.fs_hz lists no sampling rates");
  for (double f : fs_list) {
    auto h = demodulate_histogram({traj}, f, edges, edges);
    std::string stem = "histogram_fs" + num(f);
    if (want_json(cfg)) {
      json j = config_json("simulate", cfg);
      j["fs_hz"] = h.fs;
      j["units"] = h.units;
      j["i_edges"] = h.i_edges;
      j["q_edges"] = h.q_edges;
      j["counts"] = h.counts;
      out.put(stem + ".json", j.dump(2) + "\n");
    } else {
      out.put(stem + ".csv", histogram_to_csv(h, "subharmonic simulate\n" + cfg.dump()));
    }
  }
}

void cmd_fit(const RunConfig& cfg, Output& out, const std::vector<std::string>& files_arg) {
  auto files = files_arg.empty() ? cfg.path_list("fit.files") : files_arg;
  if (files.empty()) throw UsageError("fit needs linecut files (arguments or fit.files)");
  auto p = cfg.device();
  auto conv = cfg.convention();
  auto ch = cfg.chain();
  std::vector<Linecut> cuts;
  std::vector<ModePair> modes;
  for (const auto& f : files) {
    cuts.push_back(load_linecut(f));
    modes.push_back(modes_at(p, cuts.back().flux, conv));
  }
  auto r = fit_X(cuts, modes, ch);
  json extra = config_json("fit", cfg);
  extra["files"] = files;
  out.put("fit.json", fit_report_json(r, extra.dump()));
  std::cout << "X = " << num(r.x) << " +- " << num(r.x_sigma) << "\n";
}

void cmd_thresholds(const RunConfig& cfg, Output& out) {
  auto p = cfg.device();
  auto conv = cfg.convention();
  auto ch = cfg.chain();
  auto grid = cli::linspace("thresholds flux", cfg.number("thresholds.flux_min"), cfg.number("thresholds.flux_max"),
                            cfg.integer("thresholds.flux_points"));
  std::vector<std::vector<std::string>> rows;
  for (double phi : grid) {
    auto m = modes_at(p, phi, conv);
    double t = true_threshold(m), v = visible_threshold(m, ch);
    rows.push_back({num(phi), num(t / kTwoPi), num(v / kTwoPi), v < t ? "1" : "0"});
  }
  emit_table(out, "thresholds", "thresholds", cfg,
             {"phi[Phi0]", "true_threshold_over_2pi[Hz]", "visible_threshold_over_2pi[Hz]", "noise_limited"}, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-mode period-tripling resonator toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> sets, fit_files;
  app.add_option("--config", config_path, "run configuration file (default: $SUBHARMONIC_CONFIG)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", sets, "override one setting, key=value (repeatable)");

  auto* spectrum = app.add_subcommand("spectrum", "mode frequencies, Kerr and damping versus flux");
  auto* steady = app.add_subcommand("steady", "stationary states with stability at one operating point");
  auto* sweep = app.add_subcommand("sweep", "existence map over drive power and detuning");
  auto* simulate = app.add_subcommand("simulate", "stochastic trajectory and IQ histograms");
  auto* fit = app.add_subcommand("fit", "fit the calibration constant X to linecuts");
  fit->add_option("files", fit_files, "linecut CSV files");
  auto* thresholds = app.add_subcommand("thresholds", "true and noise-limited thresholds versus flux");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCode::usage);
  }

  try {
    RunConfig cfg;
    if (config_path.empty())
      if (const char* env = std::getenv("SUBHARMONIC_CONFIG")) config_path = env;
    if (!config_path.empty()) cfg.merge_file(config_path);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!out_dir.empty()) cfg.set("out", out_dir, "--out");
    if (seed) cfg.set("seed", std::to_string(*seed), "--seed");
    if (threads) cfg.set("threads", std::to_string(*threads), "--threads");
    if (!format.empty()) cfg.set("format", format, "--format");
    want_json(cfg);

    std::vector<std::string> files;
    for (const auto& f : fit_files) files.push_back(fs::absolute(f).lexically_normal().string());

    Output out(cfg);
    if (spectrum->parsed()) cmd_spectrum(cfg, out);
    else if (steady->parsed()) cmd_steady(cfg, out);
    else if (sweep->parsed()) cmd_sweep(cfg, out);
    else if (simulate->parsed()) cmd_simulate(cfg, out);
    else if (fit->parsed()) cmd_fit(cfg, out, files);
    else if (thresholds->parsed()) cmd_thresholds(cfg, out);
    for (const auto& w : out.written) std::cout << w << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::internal);
  }
}
