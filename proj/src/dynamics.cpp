#include "subharmonic/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "subharmonic/errors.hpp"

namespace subharmonic {

namespace {
constexpr cplx I{0.0, 1.0};
}

TwoModeSystem TwoModeSystem::from_point(const DimensionlessPoint& pt) {
  TwoModeSystem s;
  const double a1 = pt.alpha1, b2 = pt.beta * pt.beta;
  s.alpha1 = a1;
  s.alpha2 = b2 * b2 * a1;
  s.alpha_cross = b2 * a1;
  s.alpha_tilde = pt.beta * a1;
  s.delta1 = pt.delta * a1;
  s.delta2 = (3 * pt.delta + pt.Delta) * a1;
  s.gamma1 = pt.gamma1 * a1;
  s.gamma2 = pt.gamma2 * a1;
  s.gamma2_ext = pt.gamma2_ext * a1;
  s.B2 = std::polar(pt.B2, pt.phiB);
  return s;
}

std::array<cplx, 2> TwoModeSystem::rhs(cplx a1, cplx a2) const {
  const double n1 = std::norm(a1), n2 = std::norm(a2);
  const cplx c1 = std::conj(a1);
  cplx f1 = I * ((delta1 + I * gamma1 + alpha1 * n1 + 2 * alpha_cross * n2) * a1 + alpha_tilde * c1 * c1 * a2);
  cplx f2 = I * ((delta2 + I * gamma2 + alpha2 * n2 + 2 * alpha_cross * n1) * a2 +
                 alpha_tilde / 3 * a1 * a1 * a1 - std::sqrt(2 * gamma2_ext) * B2);
  return {f1, f2};
}

double metapotential(const TwoModeSystem& s, cplx a1, cplx a2) {
  const double n1 = std::norm(a1), n2 = std::norm(a2);
  const cplx c1 = std::conj(a1);
  double h = -(s.delta1 * n1 + 0.5 * s.alpha1 * n1 * n1) - (s.delta2 * n2 + 0.5 * s.alpha2 * n2 * n2);
  h -= 2 * s.alpha_cross * n1 * n2;
  h -= s.alpha_tilde / 3 * 2 * std::real(c1 * c1 * c1 * a2);
  h += std::sqrt(2 * s.gamma2_ext) * 2 * std::real(s.B2 * std::conj(a2));
  return h;
}

std::string to_string(NoiseScheme s) {
  return s == NoiseScheme::rk4_additive ? "rk4_additive" : "euler_maruyama";
}

NoiseScheme noise_scheme_from_string(const std::string& s) {
  if (s == "rk4_additive") return NoiseScheme::rk4_additive;
  if (s == "euler_maruyama") return NoiseScheme::euler_maruyama;
  throw ConfigError("unknown noise scheme '" + s + "' (expected rk4_additive or euler_maruyama)");
}

NoiseConfig NoiseConfig::thermal(const TwoModeSystem& s, double n_th, std::uint64_t seed) {
  NoiseConfig n;
  n.D1 = s.gamma1 * n_th;
  n.D2 = s.gamma2 * n_th;
  n.seed = seed;
  return n;
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over the pair
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trajectory integrate(const TwoModeSystem& sys, cplx a1, cplx a2, double duration, double dt,
                     const std::optional<NoiseConfig>& noise, const IntegrateOptions& opt) {
  if (!(dt > 0) || !(duration > 0)) throw DomainError("duration and dt must be positive");
  if (opt.record_every == 0) throw DomainError("record_every must be at least 1");
  Trajectory tr;
  tr.dt = dt;
  tr.record_every = opt.record_every;
  tr.B2_abs = std::abs(sys.B2);
  tr.phiB = std::arg(sys.B2);
  if (noise) tr.seed = noise->seed;

  double nmax = opt.expected_max_photons;
  if (nmax <= 0) nmax = std::max({std::norm(a1), std::norm(a2), 8.0 / 7.0 * std::abs(sys.delta1) / sys.alpha1});
  double rate = std::max({std::abs(sys.delta1) + sys.alpha1 * nmax, sys.gamma1, sys.gamma2});
  if (dt >= 0.1 / rate) {
    std::ostringstream os;
    os << "step " << dt << " s exceeds the explicit-scheme bound 0.1/" << rate << " s";
    tr.warnings.push_back(os.str());
  }

  const std::size_t steps = static_cast<std::size_t>(std::llround(duration / dt));
  tr.a1.reserve(steps / opt.record_every);
  tr.a2.reserve(steps / opt.record_every);

  std::mt19937_64 rng(noise ? noise->seed : 0);
  std::normal_distribution<double> N(0.0, 1.0);
  const double s1 = noise ? std::sqrt(noise->D1 * dt) : 0, s2 = noise ? std::sqrt(noise->D2 * dt) : 0;
  const bool em = noise && noise->scheme == NoiseScheme::euler_maruyama;

  for (std::size_t k = 1; k <= steps; ++k) {
    if (em) {
      auto f = sys.rhs(a1, a2);
      a1 += f[0] * dt;
      a2 += f[1] * dt;
    } else {
      auto k1 = sys.rhs(a1, a2);
      auto k2 = sys.rhs(a1 + 0.5 * dt * k1[0], a2 + 0.5 * dt * k1[1]);
      auto k3 = sys.rhs(a1 + 0.5 * dt * k2[0], a2 + 0.5 * dt * k2[1]);
      auto k4 = sys.rhs(a1 + dt * k3[0], a2 + dt * k3[1]);
      a1 += dt / 6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
      a2 += dt / 6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    if (noise) {
      double x1 = N(rng), y1 = N(rng), x2 = N(rng), y2 = N(rng);
      a1 += s1 * cplx(x1, y1);
      a2 += s2 * cplx(x2, y2);
    }
    if (!(std::abs(a1) <= opt.ceiling) || !(std::abs(a2) <= opt.ceiling)) {
      std::ostringstream os;
      os << "trajectory diverged at step " << k << " (t = " << k * dt << " s): |a1| = " << std::abs(a1)
         << ", |a2| = " << std::abs(a2);
      throw DivergenceError(os.str());
    }
    if (k % opt.record_every == 0) {
      tr.a1.push_back(a1);
      tr.a2.push_back(a2);
    }
  }
  return tr;
}

std::vector<Trajectory> integrate_ensemble(const TwoModeSystem& sys,
                                           const std::vector<std::pair<cplx, cplx>>& initial,
                                           double duration, double dt,
                                           const std::optional<NoiseConfig>& noise,
                                           const IntegrateOptions& opt, unsigned threads) {
  std::vector<Trajectory> out(initial.size());
  std::vector<std::exception_ptr> errs(initial.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, initial.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < initial.size();) {
      try {
        std::optional<NoiseConfig> nz = noise;
        if (nz) nz->seed = stream_seed(noise->seed, i);
        out[i] = integrate(sys, initial[i].first, initial[i].second, duration, dt, nz, opt);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---- histograms ----

std::uint64_t Histogram2D::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

void Histogram2D::merge(const Histogram2D& o) {
  if (o.i_edges != i_edges || o.q_edges != q_edges || o.fs != fs || o.units != units)
    throw DomainError("cannot merge histograms with different binning");
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += o.counts[k];
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (!(hi > lo) || bins == 0) throw DomainError("histogram range must be non-empty");
  std::vector<double> e(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) e[k] = lo + (hi - lo) * double(k) / double(bins);
  e.back() = hi;
  return e;
}

std::vector<cplx> demodulate(const Trajectory& t, double fs) {
  if (t.size() == 0) throw DomainError("empty trajectory");
  const double ds = t.sample_interval();
  if (!(fs > 0) || fs > 1.0 / ds * (1 + 1e-12))
    throw DomainError("sampling rate must lie in (0, 1/sample_interval]");
  std::size_t w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / (fs * ds))));
  std::vector<cplx> out;
  out.reserve(t.size() / w);
  for (std::size_t s = 0; s + w <= t.size(); s += w) {
    cplx acc = 0;
    for (std::size_t k = s; k < s + w; ++k) acc += t.a1[k];
    out.push_back(acc / double(w));
  }
  return out;
}

Histogram2D bin_samples(const std::vector<cplx>& samples, const std::vector<double>& ie,
                        const std::vector<double>& qe, double fs, const std::optional<GainModel>& gain) {
  auto increasing = [](const std::vector<double>& e) {
    if (e.size() < 2) return false;
    for (std::size_t k = 1; k < e.size(); ++k)
      if (!(e[k] > e[k - 1])) return false;
    return true;
  };
  if (!increasing(ie) || !increasing(qe)) throw DomainError("bin edges must be strictly increasing");
  Histogram2D h;
  h.i_edges = ie;
  h.q_edges = qe;
  h.fs = fs;
  h.units = gain ? "V" : "sqrt_photons";
  h.counts.assign(h.ni() * h.nq(), 0);
  const double g = gain ? gain->volts_per_sqrt_photon : 1.0;
  auto bin = [](const std::vector<double>& e, double v) {
    auto it = std::upper_bound(e.begin(), e.end(), v);
    std::ptrdiff_t k = (it - e.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, std::ptrdiff_t(e.size()) - 2));
  };
  for (auto z : samples) h.counts[bin(ie, g * z.real()) * h.nq() + bin(qe, g * z.imag())]++;
  return h;
}

Histogram2D demodulate_histogram(const std::vector<Trajectory>& ens, double fs, const std::vector<double>& ie,
                                 const std::vector<double>& qe, const std::optional<GainModel>& gain) {
  if (ens.empty()) throw DomainError("empty trajectory ensemble");
  Histogram2D h = bin_samples(demodulate(ens[0], fs), ie, qe, fs, gain);
  for (std::size_t k = 1; k < ens.size(); ++k) h.merge(bin_samples(demodulate(ens[k], fs), ie, qe, fs, gain));
  return h;
}

// ---- classification ----

namespace {
void check_centres(const std::vector<cplx>& c, double radius) {
  if (c.size() < 2) throw DomainError("at least two reference states are required");
  double dmin = 1e300;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) dmin = std::min(dmin, std::abs(c[i] - c[j]));
  if (!(radius > 0) || radius >= 0.5 * dmin) {
    std::ostringstream os;
    os << "classify radius " << radius << " overlaps: must be below half the minimum state distance " << 0.5 * dmin;
    throw DomainError(os.str());
  }
}
}  // namespace

std::vector<int> classify(const std::vector<cplx>& samples, const std::vector<cplx>& centres, double radius) {
  std::vector<int> lab(samples.size(), -1);
  for (std::size_t k = 0; k < samples.size(); ++k)
    for (std::size_t c = 0; c < centres.size(); ++c)
      if (std::abs(samples[k] - centres[c]) < radius) {
        lab[k] = int(c);
        break;
      }
  return lab;
}

SwitchingStats switching_rate(const std::vector<cplx>& samples, double sample_interval,
                              const std::vector<cplx>& centres, double radius) {
  check_centres(centres, radius);
  if (samples.empty()) throw DomainError("empty sample sequence");
  SwitchingStats s;
  const std::size_t n = centres.size();
  s.transitions.assign(n, std::vector<std::uint64_t>(n, 0));
  s.occupancy.assign(n, 0);
  auto lab = classify(samples, centres, radius);
  int dwell = -1;
  std::size_t transit = 0;
  for (int l : lab) {
    if (l < 0) {
      ++transit;
      continue;
    }
    s.occupancy[l] += 1;
    if (dwell >= 0 && l != dwell) {
      s.transitions[dwell][l]++;
      s.changes++;
    }
    dwell = l;
  }
  for (auto& o : s.occupancy) o /= double(samples.size());
  s.transit_fraction = double(transit) / double(samples.size());
  s.rate_hz = double(s.changes) / (sample_interval * double(samples.size()));
  return s;
}

ClusterSummary summarize_clusters(const std::vector<cplx>& samples, const std::vector<cplx>& centres,
                                  double radius, double halfwidth) {
  const std::size_t n = centres.size();
  ClusterSummary cs;
  cs.occupancy.assign(n, 0);
  cs.centroid.assign(n, 0);
  cs.line_fraction.assign(n, std::vector<double>(n, 0));
  if (samples.empty()) return cs;
  auto lab = classify(samples, centres, radius);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (lab[k] >= 0) {
      cs.occupancy[lab[k]] += 1;
      cs.centroid[lab[k]] += samples[k];
      continue;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        cplx d = centres[j] - centres[i];
        double t = std::clamp(std::real((samples[k] - centres[i]) * std::conj(d)) / std::norm(d), 0.0, 1.0);
        if (std::abs(samples[k] - (centres[i] + t * d)) < halfwidth) cs.line_fraction[i][j] += 1;
      }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cs.occupancy[i] > 0) cs.centroid[i] /= cs.occupancy[i];
    cs.occupancy[i] /= double(samples.size());
    for (std::size_t j = i + 1; j < n; ++j) {
      cs.line_fraction[i][j] /= double(samples.size());
      cs.line_fraction[j][i] = cs.line_fraction[i][j];
    }
  }
  return cs;
}

// ---- metapotential ----

MetapotentialGrid metapotential_grid(const TwoModeSystem& sys, std::pair<double, double> pr,
                                     std::pair<double, double> qr, std::size_t n, cplx a2) {
  if (!(std::isfinite(pr.first) && std::isfinite(pr.second) && std::isfinite(qr.first) &&
        std::isfinite(qr.second)) || !(pr.second > pr.first) || !(qr.second > qr.first) || n < 3)
    throw DomainError("metapotential ranges must be finite and non-empty");
  MetapotentialGrid g;
  g.a2 = a2;
  for (std::size_t k = 0; k < n; ++k) {
    g.p1.push_back(pr.first + (pr.second - pr.first) * double(k) / double(n - 1));
    g.q1.push_back(qr.first + (qr.second - qr.first) * double(k) / double(n - 1));
  }
  g.H.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.H[i * n + j] = metapotential(sys, cplx(g.p1[i], g.q1[j]), a2);
  return g;
}

std::vector<GridPoint> grid_extrema(const MetapotentialGrid& g) {
  std::vector<GridPoint> out;
  const std::size_t np = g.p1.size(), nq = g.q1.size();
  for (std::size_t i = 1; i + 1 < np; ++i)
    for (std::size_t j = 1; j + 1 < nq; ++j) {
      double h = g.at(i, j);
      bool mx = true, mn = true;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          double o = g.at(i + di, j + dj);
          mx = mx && h > o;
          mn = mn && h < o;
        }
      if (mx || mn) out.push_back({i, j, mx});
    }
  return out;
}

}  // namespace subharmonic
