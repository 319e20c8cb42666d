#include "subharmonic/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "subharmonic/errors.hpp"
#include "subharmonic/io.hpp"
#include "subharmonic/steady_state.hpp"

namespace subharmonic {

void CalibrationChain::validate() const {
  if (!(noise_floor_w > 0)) throw ConfigError("noise floor must be positive");
  if (!(scale07 > 0 && scale07 <= 1)) throw ConfigError("scale07 must lie in (0, 1]");
  if (X && !(*X > 0)) throw ConfigError("X must be positive");
}

void Linecut::validate() const {
  if (pd_w.size() != pout_w.size()) throw DomainError("linecut columns differ in length");
  for (std::size_t k = 0; k < pd_w.size(); ++k) {
    if (k > 0 && !(pd_w[k] > pd_w[k - 1])) throw DomainError("linecut drive powers must increase strictly");
    if (!(pout_w[k] >= 0)) throw DomainError("linecut output powers must be non-negative");
  }
}

double dbm_to_w(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10); }
double w_to_dbm(double w) { return 10 * std::log10(w / 1e-3); }

double drive_power(double b2_sq, double att_db, double omega) {
  return 3 * kHbar * omega * b2_sq * std::pow(10.0, att_db / 10);
}
double drive_b2_sq_from_power(double pd, double att_db, double omega) {
  return pd / (3 * kHbar * omega * std::pow(10.0, att_db / 10));
}
double output_power(double a1_sq, double g1ext, double gain_db, double omega) {
  return kHbar * omega * a1_sq * 2 * g1ext * std::pow(10.0, gain_db / 10);
}
double output_photons(double pout, double g1ext, double gain_db, double omega) {
  return pout / (kHbar * omega * 2 * g1ext * std::pow(10.0, gain_db / 10));
}

namespace {

double q2ext(const ModePair& m) { return m.m2.omega / (2 * m.m2.gamma_ext); }

// r2^2 per watt times X
double kappa(const ModePair& m, double delta1) {
  double w = m.m1.omega + delta1;
  double a1 = m.m1.alpha, b2 = m.c.beta * m.c.beta;
  double Delta = (3 * m.m1.omega - m.m2.omega) / a1;
  return b2 * m.m2.omega / (3 * kHbar * w * a1 * a1 * Delta * Delta);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

double pump_intensity(const ModePair& m, double delta1, double pd, double X) { return kappa(m, delta1) * pd / X; }

double model_output(const ModePair& m, double delta1, double pd, double X, double gain_db) {
  double delta = delta1 / m.m1.alpha, g1 = m.m1.gamma / m.m1.alpha;
  auto w = existence_window(delta, g1);
  double x = pump_intensity(m, delta1, pd, X);
  if (!w || x < w->r2_minus_sq || x > w->r2_plus_sq) return 0;
  auto r1 = stable_branch(delta, g1, x);
  if (!r1) return 0;
  return output_power(*r1, m.m1.gamma_ext, gain_db, m.m1.omega + delta1);
}

double b2_sq_from_X(const ModePair& m, double delta1, double pd, double X) {
  return pd * q2ext(m) / (3 * kHbar * (m.m1.omega + delta1) * X);
}
double pd_from_b2_sq_X(const ModePair& m, double delta1, double b2_sq, double X) {
  return b2_sq * 3 * kHbar * (m.m1.omega + delta1) * X / q2ext(m);
}

double fit_objective(const std::vector<Linecut>& cuts, const std::vector<ModePair>& modes,
                     const CalibrationChain& chain, double X) {
  double s = 0;
  for (std::size_t c = 0; c < cuts.size(); ++c)
    for (std::size_t k = 0; k < cuts[c].pd_w.size(); ++k) {
      if (!(cuts[c].pout_w[k] > chain.noise_floor_w)) continue;
      double r = model_output(modes[c], cuts[c].delta1, cuts[c].pd_w[k], X, chain.gain_db) - cuts[c].pout_w[k];
      s += r * r;
    }
  return s;
}

FitResult fit_X(const std::vector<Linecut>& cuts, const std::vector<ModePair>& modes,
                const CalibrationChain& chain, const FitOptions& opt) {
  chain.validate();
  if (cuts.empty() || modes.size() != cuts.size()) throw DomainError("need one mode set per linecut");
  std::size_t n = 0;
  double xlo = 1e300, xhi = 0, zero_obj = 0;
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    cuts[c].validate();
    std::size_t above = 0;
    double delta = cuts[c].delta1 / modes[c].m1.alpha, g1 = modes[c].m1.gamma / modes[c].m1.alpha;
    auto w = existence_window(delta, g1);
    for (std::size_t k = 0; k < cuts[c].pd_w.size(); ++k) {
      if (!(cuts[c].pout_w[k] > chain.noise_floor_w)) continue;
      ++above;
      zero_obj += cuts[c].pout_w[k] * cuts[c].pout_w[k];
      if (w) {
        double kp = kappa(modes[c], cuts[c].delta1) * cuts[c].pd_w[k];
        xlo = std::min(xlo, kp / w->r2_plus_sq);
        xhi = std::max(xhi, kp / w->r2_minus_sq);
      }
    }
    if (above < 5)
      throw NoSignalError("linecut " + std::to_string(c) + " has " + std::to_string(above) +
                          " points above the noise floor (need 5)");
    n += above;
  }
  if (opt.x_min > 0) xlo = opt.x_min;
  else xlo /= 3;
  if (opt.x_max > 0) xhi = opt.x_max;
  else xhi *= 3;
  if (!(xhi > xlo)) throw NoConvergenceError("no detuning of the linecuts lies beyond threshold; X is unconstrained");

  auto S = [&](double lx) { return fit_objective(cuts, modes, chain, std::pow(10.0, lx)); };
  const int G = std::max(opt.grid, 11);
  double l0 = std::log10(xlo), l1 = std::log10(xhi);
  int best = 0;
  double sbest = 1e300;
  for (int i = 0; i < G; ++i) {
    double s = S(l0 + (l1 - l0) * i / (G - 1));
    if (s < sbest) sbest = s, best = i;
  }
  if (!(sbest < zero_obj * (1 - 1e-12)))
    throw NoConvergenceError("the model never overlaps the data over X in [" + fmt(xlo) + ", " + fmt(xhi) + "]");
  double a = l0 + (l1 - l0) * std::max(0, best - 1) / (G - 1), b = l0 + (l1 - l0) * std::min(G - 1, best + 1) / (G - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a), s1 = S(c1), s2 = S(c2);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (s1 < s2) {
      b = c2, c2 = c1, s2 = s1, c1 = b - gr * (b - a), s1 = S(c1);
    } else {
      a = c1, c1 = c2, s1 = s2, c2 = a + gr * (b - a), s2 = S(c2);
    }
  }
  double lx = 0.5 * (a + b);
  double sfin = S(lx);
  if (sbest < sfin) lx = l0 + (l1 - l0) * best / (G - 1), sfin = sbest;

  FitResult r;
  r.x = std::pow(10.0, lx);
  r.n_points = n;
  r.residual = std::sqrt(sfin / double(n));
  double jtj = 0;
  const double h = 1e-4 * r.x;
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    std::vector<double> curve;
    for (std::size_t k = 0; k < cuts[c].pd_w.size(); ++k) {
      curve.push_back(model_output(modes[c], cuts[c].delta1, cuts[c].pd_w[k], r.x, chain.gain_db));
      if (!(cuts[c].pout_w[k] > chain.noise_floor_w)) continue;
      double jp = model_output(modes[c], cuts[c].delta1, cuts[c].pd_w[k], r.x + h, chain.gain_db);
      double jm = model_output(modes[c], cuts[c].delta1, cuts[c].pd_w[k], r.x - h, chain.gain_db);
      if (jp > 0 && jm > 0) jtj += std::pow((jp - jm) / (2 * h), 2);
    }
    r.model.push_back(std::move(curve));
  }
  double var = n > 1 ? sfin / double(n - 1) : sfin;
  r.x_sigma = jtj > 0 ? std::sqrt(var / jtj) : INFINITY;
  return r;
}

double true_threshold(const ModePair& m) { return -std::sqrt(7.0) * m.m1.gamma; }

double predict_max_output(const ModePair& m, double delta1, const CalibrationChain& chain) {
  double mi = max_intensity(delta1 / m.m1.alpha, m.m1.gamma / m.m1.alpha).r1_max_sq;
  return output_power(chain.scale07 * mi, m.m1.gamma_ext, chain.gain_db, m.m1.omega + delta1);
}

double visible_threshold(const ModePair& m, const CalibrationChain& chain) {
  if (!(chain.noise_floor_w > 0)) throw ConfigError("noise floor must be positive");
  const double t = true_threshold(m);
  auto excess = [&](double d1) { return predict_max_output(m, d1, chain) - chain.noise_floor_w; };
  if (excess(t) >= 0) return t;
  double lo = t, hi = 2 * t;
  for (int k = 0; excess(hi) < 0; ++k) {
    if (k > 200 || !(std::abs(hi) < 0.5 * m.m1.omega))
      throw NoConvergenceError("output never reaches the noise floor");
    lo = hi;
    hi *= 2;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (excess(mid) < 0) lo = mid; else hi = mid;
  }
  return hi;
}

RegionMap region_map(const ModePair& m, const CalibrationChain& chain, const std::vector<double>& pd,
                     const std::vector<double>& d1, unsigned threads) {
  if (!chain.X) throw ConfigError("region map needs a calibrated X");
  auto increasing = [](const std::vector<double>& v, bool positive) {
    if (v.empty()) return false;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (positive && !(v[k] > 0)) return false;
      if (k && !(v[k] > v[k - 1])) return false;
    }
    return true;
  };
  if (!increasing(pd, true) || !increasing(d1, false)) throw DomainError("region grid must be ordered, powers positive");
  RegionMap r;
  r.pd_w = pd;
  r.delta1 = d1;
  r.cells.assign(pd.size() * d1.size(), Region::I);
  const double X = *chain.X;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < r.cells.size();) {
      std::size_t id = c / pd.size(), ip = c % pd.size();
      double b2 = b2_sq_from_X(m, d1[id], pd[ip], X);
      auto pt = reduce_detuning(m, d1[id], std::sqrt(b2));
      if (!existence_window(pt.delta, pt.gamma1)) continue;
      for (const auto& s : solve_selfconsistent(pt))
        if (s.kind == StateKind::triad && s.stable) {
          r.cells[c] = Region::exists;
          break;
        }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (double x : d1) {
    auto pt = reduce_detuning(m, x, 0.0);
    if (!existence_window(pt.delta, pt.gamma1)) continue;
    r.boundary.push_back({x, pd_from_b2_sq_X(m, x, max_drive(pt).b2_max_sq, X)});
  }
  return r;
}

Linecut load_linecut(const std::string& path) {
  Linecut c;
  std::string meta_text = read_file(path + ".json");
  try {
    auto j = nlohmann::json::parse(meta_text);
    c.delta1 = kTwoPi * j.at("delta1_hz").get<double>();
    c.flux = j.at("flux_phi0").get<double>();
    c.fs = j.value("fs_hz", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ".json: " + e.what());
  }
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      std::string h;
      for (char ch : line)
        if (ch != ' ') h += ch;
      if (h != "pd_dbm,pout_w") throw IoError(path + ":" + std::to_string(lineno) + ": expected header 'pd_dbm,pout_w'");
      header = true;
      continue;
    }
    auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      c.pd_w.push_back(dbm_to_w(std::stod(line.substr(0, comma))));
      c.pout_w.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": cannot parse '" + line + "'");
    }
  }
  if (!header) throw IoError(path + ": header 'pd_dbm,pout_w' missing");
  c.validate();
  return c;
}

void save_linecut(const Linecut& c, const std::string& path) {
  std::ostringstream os;
  os.precision(17);
  os << "pd_dbm,pout_w\n";
  for (std::size_t k = 0; k < c.pd_w.size(); ++k) os << w_to_dbm(c.pd_w[k]) << "," << c.pout_w[k] << "\n";
  write_atomic(path, os.str());
  nlohmann::json j;
  j["delta1_hz"] = c.delta1 / kTwoPi;
  j["flux_phi0"] = c.flux;
  j["fs_hz"] = c.fs;
  write_atomic(path + ".json", j.dump(2) + "\n");
}

std::string fit_report_json(const FitResult& r, const std::string& extra) {
  nlohmann::json j;
  j["x"] = r.x;
  j["x_sigma"] = r.x_sigma;
  j["residual"] = r.residual;
  j["n_points"] = r.n_points;
  j["model_pout_w"] = r.model;
  auto e = nlohmann::json::parse(extra);
  for (auto it = e.begin(); it != e.end(); ++it) j[it.key()] = it.value();
  return j.dump(2) + "\n";
}

}  // namespace subharmonic
