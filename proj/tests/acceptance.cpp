// Acceptance run: one line per criterion, exit status 0 only if every selected one passes.
//   acceptance            all criteria
//   acceptance 4 11       just those

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "subharmonic/calibration.hpp"
#include "subharmonic/circuit.hpp"
#include "subharmonic/dynamics.hpp"
#include "subharmonic/errors.hpp"
#include "subharmonic/steady_state.hpp"

using namespace subharmonic;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "FAILED ") << what;
  }
};

std::string f(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

double rel(double a, double b) { return std::abs(a / b - 1); }

const ModePair& modes0() {
  static const ModePair m = modes_at(reference_device(), 0.0);
  return m;
}

// ---- 1 ----
void c01(Verdict& v) {
  auto m = modes_at(reference_device(), 0.0);
  double f1 = m.m1.omega / kTwoPi, an = (3 * m.m1.omega - m.m2.omega) / kTwoPi;
  v.require(rel(f1, 5.504e9) <= 0.005, "f1 = " + f(f1 / 1e9) + " GHz vs 5.504 (" + f(100 * (f1 / 5.504e9 - 1), 3) +
                                           "%, tol 0.5%)");
  v.require(rel(an, 136e6) <= 0.15, "3f1 - f2 = " + f(an / 1e6) + " MHz vs 136 (tol 15%)");
}

// ---- 2 ----
void c02(Verdict& v) {
  double w = 2 * modes0().m1.gamma / kTwoPi;
  v.require(rel(w, 0.38e6) <= 0.05, "2 Gamma1/2pi = " + f(w / 1e6) + " MHz vs 0.38 (tol 5%)");
}

// ---- 3 ----
void c03(Verdict& v) {
  auto conv = EJConvention::per_junction;
  double a = modes_at(reference_device(), 0.0, conv).m1.alpha / kTwoPi;
  double other = modes_at(reference_device(), 0.0, EJConvention::total).m1.alpha / kTwoPi;
  v.require(rel(a, 85e3) <= 0.25, "alpha1/2pi = " + f(a / 1e3) + " kHz vs 85 (tol 25%) under E_J convention '" +
                                      to_string(conv) + "' (the '" + to_string(EJConvention::total) +
                                      "' convention gives " + f(other / 1e3) + " kHz)");
}

// ---- 4 ----
void c04(Verdict& v) {
  const double g1 = 1.93;
  int cells = 0, roots = 0, mismatches = 0;
  double worst = 0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      double delta = -40 + 34.0 * i / 49, x = 12.0 * j / 49;
      ++cells;
      // residual of the closed equation (d + u + 2x)^2 + g^2 - x u in u = r1^2
      auto q = [&](double u) { return std::pow(delta + u + 2 * x, 2) + g1 * g1 - x * u; };
      std::vector<double> scan;
      const int n = 40000;
      const double umax = 4 * std::abs(delta) + 6 * x + 10;
      for (int k = 0; k < n; ++k) {
        double a = umax * k / n, b = umax * (k + 1) / n;
        if (q(a) == 0) scan.push_back(a);
        if (q(a) * q(b) >= 0) continue;
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (a + b);
          if ((q(mid) < 0) == (q(a) < 0)) a = mid; else b = mid;
        }
        scan.push_back(0.5 * (a + b));
      }
      auto br = subharmonic_branches(delta, g1, x);
      std::vector<double> got;
      for (auto& b : br) got.push_back(b.r1_sq);
      std::sort(got.begin(), got.end());
      if (got.size() != scan.size()) {
        ++mismatches;
        continue;
      }
      for (std::size_t k = 0; k < got.size(); ++k) {
        worst = std::max(worst, std::abs(got[k] - scan[k]));
        ++roots;
      }
    }
  v.require(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(cells) + " cells with a root-count mismatch");
  v.require(worst <= 1e-6, std::to_string(roots) + " roots, max |difference| = " + f(worst, 3) + " (tol 1e-6)");
  auto w = existence_window(-20, g1);
  v.require(w && std::abs(w->r2_minus_sq - 0.189) <= 1e-3 && std::abs(w->r2_plus_sq - 11.24) <= 1e-3,
            "window(-20, 1.93) = (" + f(w ? w->r2_minus_sq : NAN, 5) + ", " + f(w ? w->r2_plus_sq : NAN, 6) +
                ") vs (0.189, 11.24) +- 1e-3");
}

// ---- 5 ----
void c05(Verdict& v) {
  const double delta = -20, g1 = 1.93;
  auto mi = max_intensity(delta, g1);
  v.require(std::abs(mi.r1_max_sq - 22.48) <= 0.05, "r1max^2 = " + f(mi.r1_max_sq, 6) + " vs 22.48 +- 0.05");
  // argmax of the stable branch by golden section, independent of the closed form
  auto w = *existence_window(delta, g1);
  auto r1 = [&](double x) { return stable_branch(delta, g1, x).value_or(-1.0); };
  double a = w.r2_minus_sq, b = w.r2_plus_sq;
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  for (int it = 0; it < 200; ++it) {
    double c = b - gr * (b - a), d = a + gr * (b - a);
    if (r1(c) > r1(d)) b = d; else a = c;
  }
  double argmax = 0.5 * (a + b), target = std::abs(delta) / 14;
  v.require(rel(argmax, target) <= 0.05, "argmax r2^2 = " + f(argmax, 5) + " vs |delta|/14 = " + f(target, 5) + " (" +
                                             f(100 * (argmax / target - 1), 3) + "%, tol 5%)");
  // quadratic least squares over |delta| in [20, 200]
  std::vector<double> xs, ys;
  for (int k = 0; k <= 180; ++k) {
    xs.push_back(20 + k);
    ys.push_back(max_intensity(-(20.0 + k), g1).r1_max_sq);
  }
  double S[5] = {0}, T[3] = {0};
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double t = (xs[k] - 110) / 90;  // centred and scaled for conditioning
    double p = 1;
    for (int e = 0; e < 5; ++e, p *= t) {
      S[e] += p;
      if (e < 3) T[e] += p * ys[k];
    }
  }
  // normal equations, Cramer's rule
  double M[3][3] = {{S[0], S[1], S[2]}, {S[1], S[2], S[3]}, {S[2], S[3], S[4]}};
  auto det3 = [](double A[3][3]) {
    return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
           A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
  };
  double D = det3(M), coef[3];
  for (int c = 0; c < 3; ++c) {
    double A[3][3];
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) A[r][k] = k == c ? T[r] : M[r][k];
    coef[c] = det3(A) / D;
  }
  double curvature = std::abs(coef[2]) / std::abs(coef[1]);  // quadratic vs linear term over the half range
  v.require(curvature < 0.02, "relative curvature of r1max^2(|delta|) = " + f(curvature, 3) + " (tol 2%), slope " +
                                  f(coef[1] / 90, 5) + " per unit |delta|");
}

// ---- 6 ----
void c06(Verdict& v) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> U(0, 1);
  int ground_ok = 0, ground_n = 0, unique_n = 0, unique_stable = 0;
  for (int k = 0; k < 100; ++k) {
    DimensionlessPoint p;
    p.delta = -(5 + 195 * U(rng));
    p.gamma1 = 0.2 + 5 * U(rng);
    p.Delta = 200 + 2000 * U(rng);
    p.gamma2 = 1 + 20 * U(rng);
    p.gamma2_ext = p.gamma2 * (0.5 + 0.5 * U(rng));
    p.beta = std::sqrt(3.0);
    p.alpha1 = kTwoPi * 1e5;
    p.B2 = std::sqrt(drive_b2_sq(p, std::pow(10.0, 6 * U(rng))));
    auto st = solve_selfconsistent(p);
    int grounds = 0;
    for (const auto& s : st) grounds += s.kind == StateKind::ground;
    for (const auto& s : st)
      if (s.kind == StateKind::ground) {
        ++ground_n;
        auto J = pump_fixed_jacobian(p.delta, p.gamma1, s.A1, s.A2);
        double tr = J[0][0] + J[1][1], det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (std::abs(s.lambda0->real() + p.gamma1) < 1e-12 * p.gamma1 && std::abs(tr + 2 * p.gamma1) < 1e-9 * p.gamma1 &&
            det > 0)
          ++ground_ok;
        // with a single mode-2 response the full four-dimensional verdict must agree
        if (grounds == 1) {
          ++unique_n;
          unique_stable += s.stable;
        }
      }
  }
  v.require(ground_ok == ground_n, std::to_string(ground_ok) + "/" + std::to_string(ground_n) +
                                       " ground states with Re lambda0 = -gamma1 and a stable mode-1 block");
  v.require(unique_stable == unique_n, std::to_string(unique_stable) + "/" + std::to_string(unique_n) +
                                           " single-valued ground states stable in the full Jacobian");

  // triads at |delta| > 10 gamma1: numeric Jacobian of the mode-1 field with the pump held
  int points = 0, agree = 0, checked = 0;
  int seen[2][2] = {{0, 0}, {0, 0}}, stable_seen[2][2] = {{0, 0}, {0, 0}};
  while (points < 100) {
    double g1 = 0.1 + 2 * U(rng);
    double delta = -(10 * g1 * (1 + 0.01) + (200 - 10 * g1) * U(rng));
    auto w = existence_window(delta, g1);
    if (!w) continue;
    double x = w->r2_minus_sq + (w->r2_plus_sq - w->r2_minus_sq) * U(rng);
    ++points;
    for (const auto& b : subharmonic_branches(delta, g1, x)) {
      double r1 = std::sqrt(b.r1_sq), r2 = std::sqrt(x);
      double c = -(delta + 2 * x + b.r1_sq) / (r1 * r2);
      double theta = std::atan2(g1 / (r1 * r2), c);
      cplx A1 = std::polar(r1, theta / 3), A2 = r2;
      auto fld = [&](cplx a) {
        return cplx(0, 1) * ((delta + cplx(0, g1) + std::norm(a) + 2 * x) * a + std::conj(a) * std::conj(a) * A2);
      };
      double h = 1e-6 * std::max(1.0, r1);
      cplx fx = (fld(A1 + h) - fld(A1 - h)) / (2 * h), fy = (fld(A1 + cplx(0, h)) - fld(A1 - cplx(0, h))) / (2 * h);
      double tr = fx.real() + fy.imag(), det = fx.real() * fy.imag() - fy.real() * fx.imag();
      bool numeric_stable = tr < 0 && det > 0;
      int side = c < 0 ? 1 : 0;  // 1: theta on the pi side
      int sign = b.sign > 0 ? 1 : 0;
      ++seen[side][sign];
      stable_seen[side][sign] += numeric_stable;
      bool expected = side == 1 && sign == 1;
      double l2 = closed_form_lambda_sq(r1, r2, side ? -1 : +1);
      ++checked;
      if (numeric_stable == expected && (l2 < 0) == expected) ++agree;
    }
  }
  v.require(agree == checked, std::to_string(agree) + "/" + std::to_string(checked) +
                                  " branch states agree (numeric Jacobian, closed-form sign, expected verdict) at " +
                                  std::to_string(points) + " points");
  std::ostringstream tally;
  tally << "by (theta side, branch sign): (pi,+) " << stable_seen[1][1] << "/" << seen[1][1] << " stable, (pi,-) "
        << stable_seen[1][0] << "/" << seen[1][0] << ", (0,-) " << stable_seen[0][0] << "/" << seen[0][0]
        << ", (0,+) " << stable_seen[0][1] << "/" << seen[0][1] << " (inadmissible for r1 >= 0)";
  v.require(seen[1][1] > 0 && seen[0][1] == 0, tally.str());
}

// ---- 7 ----
void c07(Verdict& v) {
  const auto& m = modes0();
  auto pt = reduce_detuning(m, -kTwoPi * 12e6, std::sqrt(6.25e10));
  auto st = solve_selfconsistent(pt);
  std::vector<const SteadyState*> att, triads;
  for (const auto& s : st) {
    if (s.stable) att.push_back(&s);
    if (s.stable && s.kind == StateKind::triad) triads.push_back(&s);
  }
  bool ground = std::any_of(att.begin(), att.end(), [](auto* s) { return s->kind == StateKind::ground; });
  v.require(st.size() == 4 && att.size() == 4 && ground && triads.size() == 3,
            std::to_string(att.size()) + " stable attractors of " + std::to_string(st.size()) + " states (ground + " +
                std::to_string(triads.size()) + " triad)");
  double worst = 0;
  for (std::size_t i = 0; i < triads.size(); ++i)
    for (std::size_t j = i + 1; j < triads.size(); ++j) {
      double d = std::remainder(std::arg(triads[j]->A1) - std::arg(triads[i]->A1), kTwoPi);
      worst = std::max(worst, std::abs(std::abs(d) - kTwoPi / 3));
    }
  v.require(triads.size() == 3 && worst <= 1e-9, "triad phase spacing error " + f(worst, 3) + " rad (tol 1e-9)");
  if (att.size() != 4) return;

  auto sys = TwoModeSystem::from_point(pt);
  double r1 = std::sqrt(triads[0]->r1_sq);
  std::vector<std::pair<cplx, cplx>> ics;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5 * r1, 1.5 * r1);
  while (ics.size() < 100) {
    cplx a1(U(rng), U(rng));
    if (std::abs(a1) <= 1.5 * r1) ics.push_back({a1, st[0].A2 / pt.beta});
  }
  IntegrateOptions opt;
  opt.record_every = 1000;
  auto ens = integrate_ensemble(sys, ics, 30 / pt.alpha1, 2e-4 / pt.alpha1, std::nullopt, opt, 0);
  std::vector<int> hits(att.size(), 0);
  int stray = 0;
  for (const auto& tr : ens) {
    int which = -1;
    for (std::size_t a = 0; a < att.size(); ++a) {
      bool at1 = std::abs(tr.a1.back() - att[a]->A1) < 1e-3 * r1;
      bool at2 = std::abs(tr.a2.back() - att[a]->A2 / pt.beta) < 1e-3 * std::abs(att[a]->A2 / pt.beta) + 1e-6;
      if (at1 && at2) which = int(a);
    }
    if (which < 0) ++stray; else ++hits[which];
  }
  std::ostringstream os;
  os << "basin sampling: 100 runs, " << stray << " not on an attractor; hits";
  for (int h : hits) os << " " << h;
  v.require(stray == 0, os.str());
}

// ---- 8 ----
void c08(Verdict& v) {
  double w = kTwoPi * 5.504e9;
  double p = output_power(100, w / (2 * 19e3), 66, w);
  v.require(p >= 2.1e-9 && p <= 3.1e-9, "P_out(100 photons) = " + f(p * 1e9, 4) + " nW in [2.1, 3.1]");
}

// ---- 9 ----
void c09(Verdict& v) {
  const auto& m = modes0();
  CalibrationChain ch;
  const double X0 = 1e12;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0, 0.01);
  std::vector<Linecut> cuts;
  for (double mhz : {4.0, 8.0, 12.0}) {
    Linecut c;
    c.delta1 = -kTwoPi * mhz * 1e6;
    for (double dbm = -60; dbm <= -10; dbm += 0.25) {
      c.pd_w.push_back(dbm_to_w(dbm));
      c.pout_w.push_back(model_output(m, c.delta1, c.pd_w.back(), X0, ch.gain_db) * (1 + n(rng)));
    }
    cuts.push_back(c);
  }
  auto r = fit_X(cuts, std::vector<ModePair>(3, m), ch);
  v.require(rel(r.x, X0) <= 0.02, "recovered X = " + f(r.x, 5) + " (" + f(100 * (r.x / X0 - 1), 3) +
                                      "%, tol 2%), sigma " + f(r.x_sigma, 3));

  // shape at the published calibration: dB(P_out) per dB(P_d) on a 0.1 dB drive grid
  const double X = 9.97e11;
  for (double mhz : {4.0, 8.0, 12.0}) {
    double d1 = -kTwoPi * mhz * 1e6;
    std::vector<double> dbm, out;
    for (int k = 0; k <= 1000; ++k) {
      dbm.push_back(-70 + 0.1 * k);
      out.push_back(model_output(m, d1, dbm_to_w(dbm.back()), X, ch.gain_db));
    }
    int first = -1, last = -1, peak = -1;
    for (int k = 0; k <= 1000; ++k)
      if (out[k] > ch.noise_floor_w) {
        if (first < 0) first = k;
        last = k;
        if (peak < 0 || out[k] > out[peak]) peak = k;
      }
    if (first <= 0 || last <= peak) {
      v.require(false, f(mhz, 3) + " MHz cut has no visible onset/decay in the drive window");
      continue;
    }
    double onset = (10 * std::log10(out[first] / ch.noise_floor_w)) / 0.1;
    double decay = std::abs(10 * std::log10(out[last] / out[peak])) / (dbm[last] - dbm[peak]);
    v.require(onset > 5 * decay, "-" + f(mhz, 3) + " MHz: onset " + f(onset, 4) + " dB/dB, decay " + f(decay, 3) +
                                     " dB/dB");
  }
}

// ---- 10 ----
void c10(Verdict& v) {
  CalibrationChain ch;
  ch.noise_floor_w = 0.44e-9;
  double worst = 0, worst_phi = 0;
  for (int k = 0; k <= 60; ++k) {
    double phi = -0.3 + 0.01 * k;
    auto m = modes_at(reference_device(), phi);
    double e = rel(visible_threshold(m, ch), true_threshold(m));
    if (e > worst) worst = e, worst_phi = phi;
  }
  auto m0 = modes0();
  v.require(worst <= 1e-9, "visible vs true threshold for |phi| <= 0.3: worst ratio - 1 = " + f(worst, 4) +
                               " at phi = " + f(worst_phi, 3) + " (phi = 0: visible " +
                               f(visible_threshold(m0, ch) / kTwoPi / 1e6, 5) + " MHz, true " +
                               f(true_threshold(m0) / kTwoPi / 1e6, 5) + " MHz)");
  double prev = 0;
  bool mono = true;
  for (int k = 0; k <= 9; ++k) {
    double phi = 0.35 + 0.01 * k;
    double t = std::abs(visible_threshold(modes_at(reference_device(), phi), ch));
    if (k && !(t > prev)) mono = false;
    prev = t;
  }
  v.require(mono, "|threshold| increasing over phi in [0.35, 0.44]");
}

// ---- 11 ----
struct NoiseRun {
  std::vector<cplx> centres;  // ground first
  double r1 = 0;
  std::vector<Trajectory> ens;
  double alpha1 = 0;
};

NoiseRun noise_run(double r2_sq, double n_th, std::uint64_t seed) {
  auto m = modes_at(reference_device(), 0.3);
  auto pt = reduce_detuning(m, -10 * m.m1.alpha, 0.0);
  auto F2 = triad_drive_sq(pt, r2_sq);
  if (!F2) throw DomainError("operating point outside the window");
  pt.B2 = std::sqrt(drive_b2_sq(pt, *F2));
  NoiseRun r;
  r.alpha1 = pt.alpha1;
  cplx a2_start;
  for (const auto& s : solve_selfconsistent(pt))
    if (s.stable && s.kind == StateKind::ground) r.centres.insert(r.centres.begin(), s.A1);
    else if (s.stable && s.kind == StateKind::triad) {
      r.centres.push_back(s.A1);
      r.r1 = std::sqrt(s.r1_sq);
      a2_start = s.A2 / pt.beta;
    }
  if (r.centres.size() != 4) throw DomainError("expected ground plus three triad attractors");
  auto sys = TwoModeSystem::from_point(pt);
  auto noise = NoiseConfig::thermal(sys, n_th, seed);
  IntegrateOptions opt;
  opt.record_every = 20;
  std::vector<std::pair<cplx, cplx>> ics(8, {cplx(0), a2_start});
  r.ens = integrate_ensemble(sys, ics, 2500 / pt.alpha1, 5e-4 / pt.alpha1, noise, opt, 0);
  return r;
}

struct Look {
  ClusterSummary cs;
  std::vector<std::vector<std::uint64_t>> transitions;
  double ee_line = 0, ge_line = 0;
};

Look look(const NoiseRun& r, double window_units) {
  Look l;
  std::vector<cplx> all;
  l.transitions.assign(4, std::vector<std::uint64_t>(4, 0));
  double fs = r.alpha1 / window_units;
  for (const auto& t : r.ens) {
    auto s = demodulate(t, fs);
    auto sw = switching_rate(s, 1 / fs, r.centres, 0.35 * r.r1);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) l.transitions[i][j] += sw.transitions[i][j];
    all.insert(all.end(), s.begin(), s.end());
  }
  l.cs = summarize_clusters(all, r.centres, 0.35 * r.r1, 0.15 * r.r1);
  for (int i = 1; i < 4; ++i) {
    l.ge_line += l.cs.line_fraction[0][i];
    for (int j = i + 1; j < 4; ++j) l.ee_line += l.cs.line_fraction[i][j];
  }
  return l;
}

void c11(Verdict& v) {
  {
    auto r = noise_run(4.0, 0.07, 11);
    auto hi = look(r, 2), lo = look(r, 20);
    int clusters = 0;
    std::vector<double> phases;
    for (int k = 0; k < 4; ++k)
      if (hi.cs.occupancy[k] >= 0.10) {
        ++clusters;
        if (k) phases.push_back(std::arg(hi.cs.centroid[k]));
      }
    double spacing_err = 0;
    for (std::size_t i = 0; i < phases.size(); ++i)
      for (std::size_t j = i + 1; j < phases.size(); ++j)
        spacing_err = std::max(spacing_err, std::abs(std::abs(std::remainder(phases[j] - phases[i], kTwoPi)) - kTwoPi / 3));
    std::ostringstream occ;
    for (double o : hi.cs.occupancy) occ << " " << f(o, 3);
    v.require(clusters == 3 && hi.cs.occupancy[0] < 0.10,
              "region II (r2^2 = 4): " + std::to_string(clusters) + " clusters, occupancy" + occ.str());
    v.require(phases.size() == 3 && spacing_err < 0.05, "centroid spacing error " + f(spacing_err, 3) + " rad (tol 0.05)");
    v.require(lo.ee_line >= 3 * hi.ee_line && lo.ee_line >= 0.02,
              "connecting-line fraction " + f(hi.ee_line, 3) + " at fs = alpha1/2, " + f(lo.ee_line, 3) +
                  " at fs/10");
  }
  {
    auto r = noise_run(4.7, 0.06, 12);
    auto hi = look(r, 2);
    int clusters = 0;
    for (double o : hi.cs.occupancy) clusters += o >= 0.10;
    std::uint64_t ge = 0, ee = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) ((i == 0 || j == 0) ? ge : ee) += hi.transitions[i][j];
    std::ostringstream occ;
    for (double o : hi.cs.occupancy) occ << " " << f(o, 3);
    v.require(clusters == 4, "II/III border (r2^2 = 4.7): " + std::to_string(clusters) + " clusters, occupancy" + occ.str());
    v.require(ge > ee, "transitions ground<->excited " + std::to_string(ge) + ", excited<->excited " + std::to_string(ee));
  }
}

// ---- 12 ----
void c12(Verdict& v) {
  auto point = [](double Delta, double g1, double g2, double g2e) {
    DimensionlessPoint p;
    p.delta = -20;
    p.Delta = Delta;
    p.gamma1 = g1;
    p.gamma2 = g2;
    p.gamma2_ext = g2e;
    p.beta = std::sqrt(3.0);
    p.alpha1 = kTwoPi * 94e3;
    return p;
  };
  double lo = multivalued_fraction(triad_response_curve(point(50, 0.10, 0.71, 0.69), 20001));
  double hi = multivalued_fraction(triad_response_curve(point(1500, 1.93, 13.6, 13.1), 20001));
  v.require(lo > 0.1, "Delta = 50: multi-valued over " + f(100 * lo, 3) + "% of the drive range (need > 10%)");
  v.require(hi < 0.01, "Delta = 1500: multi-valued over " + f(100 * hi, 3) + "% (need < 1%)");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "dispersion", 1, c01},          {2, "damping", 0.5, c02},
      {3, "kerr", 0.5, c03},              {4, "branches vs scan", 10, c04},
      {5, "maximum intensity", 5, c05},   {6, "stability", 10, c06},
      {7, "phase portrait", 60, c07},     {8, "photon power", 0.5, c08},
      {9, "fit recovery", 10, c09},       {10, "threshold vs flux", 5, c10},
      {11, "histograms", 300, c11},       {12, "response branches", 10, c12},
  };
  std::vector<int> pick;
  for (int k = 1; k < argc; ++k) pick.push_back(std::atoi(argv[k]));
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    Verdict v;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs <= c.budget_s, "runtime " + f(secs, 3) + " s (budget " + f(c.budget_s, 3) + " s)");
    std::printf("[%s] C%02d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.str().c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
