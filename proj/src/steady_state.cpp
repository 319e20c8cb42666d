#include "subharmonic/steady_state.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "subharmonic/errors.hpp"

namespace subharmonic {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kResidualTol = 1e-9;
constexpr double kStableTol = 1e-9;

double wrap(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

// real non-negative roots of a polynomial (ascending coefficients), Newton-polished
std::vector<double> nonneg_real_roots(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  std::vector<double> out;
  if (c.size() < 2) return out;
  double scale = 0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  auto eval = [&](double x, double& dp) {
    double p = 0;
    dp = 0;
    for (size_t k = c.size(); k-- > 0;) {
      dp = dp * x + p;
      p = p * x + c[k];
    }
    return p;
  };
  Eigen::VectorXd coeffs(c.size());
  for (size_t k = 0; k < c.size(); ++k) coeffs[k] = c[k];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(coeffs);
  for (const auto& z : solver.roots()) {
    double mag = std::max(1.0, std::abs(z));
    if (std::abs(z.imag()) > 1e-6 * mag) continue;
    double x = z.real();
    for (int it = 0; it < 50; ++it) {
      double dp, p = eval(x, dp);
      if (dp == 0) break;
      double nx = x - p / dp;
      if (!std::isfinite(nx)) break;
      bool done = std::abs(nx - x) <= 1e-15 * std::max(1.0, std::abs(x));
      x = nx;
      if (done) break;
    }
    if (x < -1e-12 * mag) continue;
    double dp;
    if (std::abs(eval(x, dp)) > 1e-6 * scale * std::pow(mag, c.size() - 1)) continue;
    out.push_back(std::max(x, 0.0));
  }
  std::sort(out.begin(), out.end());
  // a double root only resolves to ~sqrt(eps); merge such pairs
  std::vector<double> uniq;
  for (double x : out) {
    if (!uniq.empty() && std::abs(x - uniq.back()) <= 1e-7 * std::max(1.0, x))
      uniq.back() = 0.5 * (uniq.back() + x);
    else
      uniq.push_back(x);
  }
  return uniq;
}

struct TriadGeometry {
  double r1_sq, theta;
  cplx Z;  // K r2 + (b/3) r1^3 e^{i theta}
};

std::optional<TriadGeometry> triad_geometry(const DimensionlessPoint& pt, double x, int sign) {
  double disc = -x * pt.delta - 1.75 * x * x - pt.gamma1 * pt.gamma1;
  if (disc < 0) {
    if (disc > -1e-12 * std::max(1.0, std::abs(pt.delta) * x)) disc = 0;
    else return std::nullopt;
  }
  double r1_sq = -(pt.delta + 1.5 * x) + sign * std::sqrt(disc);
  if (!(r1_sq > 0)) return std::nullopt;
  double r1 = std::sqrt(r1_sq), r2 = std::sqrt(x);
  double theta = std::atan2(pt.gamma1, -(pt.delta + 2 * x + r1_sq));
  double b = pt.beta * pt.beta;
  cplx K{3 * pt.delta + pt.Delta + b * (x + 2 * r1_sq), pt.gamma2};
  cplx Z = K * r2 + b / 3.0 * r1_sq * r1 * std::polar(1.0, theta);
  return TriadGeometry{r1_sq, theta, Z};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

std::optional<Window> existence_window(double delta, double gamma1) {
  if (!(delta <= -std::sqrt(7.0) * gamma1) || delta == 0) return std::nullopt;
  double ad = std::abs(delta);
  double s = std::sqrt(std::max(0.0, 1.0 - 7.0 * gamma1 * gamma1 / (delta * delta)));
  return Window{2 * ad / 7 * (1 - s), 2 * ad / 7 * (1 + s)};
}

std::vector<Branch> subharmonic_branches(double delta, double gamma1, double r2_sq) {
  std::vector<Branch> out;
  if (r2_sq <= 0) return out;
  double disc = -r2_sq * delta - 1.75 * r2_sq * r2_sq - gamma1 * gamma1;
  // rounding at the window edges
  double scale = std::abs(r2_sq * delta) + 1.75 * r2_sq * r2_sq + gamma1 * gamma1;
  if (disc < 0 && disc > -1e-12 * scale) disc = 0;
  if (disc < 0) return out;
  double base = -(delta + 1.5 * r2_sq), s = std::sqrt(disc);
  if (base + s > 0) out.push_back({base + s, +1});
  if (s > 0 && base - s > 0) out.push_back({base - s, -1});
  return out;
}

std::optional<double> stable_branch(double delta, double gamma1, double r2_sq) {
  auto b = subharmonic_branches(delta, gamma1, r2_sq);
  if (b.empty() || b.front().sign != +1) return std::nullopt;
  return b.front().r1_sq;
}

std::array<TriadPhase, 3> triad_phases(double delta, double gamma1, double r1_sq, double r2_sq,
                                       double phi2) {
  (void)delta;
  double denom = std::sqrt(r1_sq * r2_sq);
  if (!(denom > 0) || gamma1 > denom * (1 + 1e-12))
    throw DomainError("gamma1/(r1 r2) = " + fmt(gamma1 / denom) + " exceeds 1");
  double theta = kPi - std::asin(std::min(1.0, gamma1 / denom));
  std::array<TriadPhase, 3> out;
  for (int k = 0; k < 3; ++k) out[k] = {wrap((theta + phi2) / 3 + kTwoPi * k / 3), theta};
  return out;
}

MaxIntensity max_intensity(double delta, double gamma1) {
  double ad = std::abs(delta);
  // a few ulps of slack so a threshold computed in other units still counts
  if (delta > -std::sqrt(7.0) * gamma1 * (1 - 1e-13) || delta >= 0)
    throw BelowThresholdError("delta = " + fmt(delta) + " is above the threshold -sqrt(7) gamma1 = " +
                              fmt(-std::sqrt(7.0) * gamma1));
  double root = std::sqrt(std::max(0.0, delta * delta - 7 * gamma1 * gamma1));
  MaxIntensity m;
  m.r1_max_sq = 4.0 / 7.0 * (ad + root);
  // stationary point of the stable branch: 28x^2 - 16|d|x + d^2 + 9g^2 = 0, lower root
  m.argmax_r2_sq = (4 * ad - 3 * root) / 14.0;
  m.asymptotic_argmax_r2_sq = ad / 14.0;
  return m;
}

std::vector<double> second_mode_response(const DimensionlessPoint& pt, double r1_sq, double sector) {
  double b = pt.beta * pt.beta;
  double c = 3 * pt.delta + pt.Delta + 2 * b * r1_sq;
  double s = std::cos(sector) >= 0 ? 1.0 : -1.0;
  double sigma = s * b / 3.0 * r1_sq * std::sqrt(r1_sq);
  double F2 = pt.drive_F_sq();
  double g2 = pt.gamma2;
  // (b y^3 + c y + sigma)^2 + g2^2 y^2 - F^2 in y = r2
  std::vector<double> coeffs = {sigma * sigma - F2, 2 * c * sigma, c * c + g2 * g2, 2 * b * sigma,
                                2 * b * c, 0.0, b * b};
  std::vector<double> out;
  for (double y : nonneg_real_roots(coeffs)) out.push_back(y * y);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b2) { return std::abs(a - b2) <= 1e-12 * std::max(1.0, a); }),
            out.end());
  return out;
}

std::optional<double> triad_drive_sq(const DimensionlessPoint& pt, double r2_sq) {
  auto g = triad_geometry(pt, r2_sq, +1);
  if (!g) return std::nullopt;
  return std::norm(g->Z);
}

double drive_b2_sq(const DimensionlessPoint& pt, double F_sq) {
  return F_sq * pt.alpha1 / (2 * pt.beta * pt.beta * pt.gamma2_ext);
}

ResponseCurve triad_response_curve(const DimensionlessPoint& pt, int points) {
  ResponseCurve c;
  auto w = existence_window(pt.delta, pt.gamma1);
  if (!w || points < 2) return c;
  for (int i = 0; i < points; ++i) {
    double x = w->r2_minus_sq + (w->r2_plus_sq - w->r2_minus_sq) * i / (points - 1);
    auto f = triad_drive_sq(pt, x);
    if (!f) continue;
    c.r2_sq.push_back(x);
    c.F_sq.push_back(*f);
    c.B2_sq.push_back(drive_b2_sq(pt, *f));
  }
  return c;
}

double multivalued_fraction(const ResponseCurve& c, double low_cutoff) {
  if (c.F_sq.size() < 2) return 0;
  double fmax = *std::max_element(c.F_sq.begin(), c.F_sq.end());
  const int levels = 4000;
  int multi = 0;
  for (int l = 0; l < levels; ++l) {
    double G = fmax * (low_cutoff + (1 - low_cutoff) * (l + 0.5) / levels);
    int crossings = 0;
    for (size_t i = 1; i < c.F_sq.size(); ++i)
      if ((c.F_sq[i - 1] - G) * (c.F_sq[i] - G) < 0) ++crossings;
    if (crossings >= 2) ++multi;
  }
  return double(multi) / levels;
}

std::string to_string(StateKind k) {
  switch (k) {
    case StateKind::ground: return "ground";
    case StateKind::triad: return "triad";
    case StateKind::unstable_branch: return "unstable_branch";
  }
  return "?";
}

std::array<cplx, 2> scaled_rhs(const DimensionlessPoint& pt, cplx A1, cplx A2) {
  double b = pt.beta * pt.beta;
  double n1 = std::norm(A1), n2 = std::norm(A2);
  cplx f1 = I * ((pt.delta + I * pt.gamma1 + n1 + 2 * n2) * A1 + std::conj(A1) * std::conj(A1) * A2);
  cplx f2 = I * ((3 * pt.delta + pt.Delta + I * pt.gamma2 + b * n2 + 2 * b * n1) * A2 +
                 b / 3.0 * A1 * A1 * A1 - pt.drive_F() * std::polar(1.0, pt.phiB));
  return {f1, f2};
}

double stationary_residual(const DimensionlessPoint& pt, cplx A1, cplx A2) {
  auto f = scaled_rhs(pt, A1, A2);
  double b = pt.beta * pt.beta;
  double r1 = std::abs(A1), r2 = std::abs(A2);
  // each equation normalised by its largest term
  double s1 = std::abs(cplx(pt.delta, pt.gamma1)) * r1 + r1 * r1 * r1 + 2 * r2 * r2 * r1 + r1 * r1 * r2;
  double s2 = std::abs(cplx(3 * pt.delta + pt.Delta, pt.gamma2)) * r2 + b * r2 * r2 * r2 +
              2 * b * r1 * r1 * r2 + b / 3 * r1 * r1 * r1 + pt.drive_F();
  return std::max(std::abs(f[0]) / std::max(1.0, s1), std::abs(f[1]) / std::max(1.0, s2));
}

Jacobian4 jacobian(const DimensionlessPoint& pt, cplx A1, cplx A2) {
  double b = pt.beta * pt.beta;
  double n1 = std::norm(A1), n2 = std::norm(A2);
  cplx c1 = std::conj(A1), c2 = std::conj(A2);
  // Wirtinger derivatives d f_i / d A_j and d f_i / d conj(A_j)
  cplx d[2][2], dc[2][2];
  d[0][0] = I * (pt.delta + I * pt.gamma1 + 2 * n1 + 2 * n2);
  dc[0][0] = I * (A1 * A1 + 2.0 * c1 * A2);
  d[0][1] = I * (2.0 * c2 * A1 + c1 * c1);
  dc[0][1] = I * (2.0 * A2 * A1);
  d[1][1] = I * (3 * pt.delta + pt.Delta + I * pt.gamma2 + 2 * b * n2 + 2 * b * n1);
  dc[1][1] = I * (b * A2 * A2);
  d[1][0] = I * (2 * b * c1 * A2 + b * A1 * A1);
  dc[1][0] = I * (2 * b * A1 * A2);
  Jacobian4 J{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx dx = d[i][j] + dc[i][j];
      cplx dy = I * (d[i][j] - dc[i][j]);
      J[2 * i][2 * j] = dx.real();
      J[2 * i][2 * j + 1] = dy.real();
      J[2 * i + 1][2 * j] = dx.imag();
      J[2 * i + 1][2 * j + 1] = dy.imag();
    }
  return J;
}

std::vector<cplx> eigenvalues(const Jacobian4& J) {
  Eigen::Matrix4d M;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) M(i, j) = J[i][j];
  Eigen::EigenSolver<Eigen::Matrix4d> es(M, false);
  std::vector<cplx> out;
  for (int i = 0; i < 4; ++i) out.push_back(es.eigenvalues()[i]);
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

std::array<std::array<double, 2>, 2> pump_fixed_jacobian(double delta, double gamma1, cplx A1, cplx A2) {
  double n1 = std::norm(A1), n2 = std::norm(A2);
  cplx c1 = std::conj(A1);
  cplx d = I * (delta + I * gamma1 + 2 * n1 + 2 * n2);
  cplx dc = I * (A1 * A1 + 2.0 * c1 * A2);
  cplx dx = d + dc, dy = I * (d - dc);
  return {{{dx.real(), dy.real()}, {dx.imag(), dy.imag()}}};
}

double closed_form_lambda_sq(double r1, double r2, int sg) {
  return sg * 6 * r1 * r1 * r2 * (r1 + sg * r2 / 2);
}

StabilityReport stability(const SteadyState& s, const DimensionlessPoint& pt) {
  double res = stationary_residual(pt, s.A1, s.A2);
  if (res > 1e-6) throw ResidualError("state is not stationary: residual " + fmt(res));
  StabilityReport r;
  r.eigenvalues = eigenvalues(jacobian(pt, s.A1, s.A2));
  double maxre = -1e300;
  for (auto l : r.eigenvalues) maxre = std::max(maxre, l.real());
  r.stable = maxre < -kStableTol;
  if (s.kind == StateKind::ground) {
    r.lambda0 = cplx(-pt.gamma1, pt.delta + 2 * std::norm(s.A2));
  } else if (std::abs(pt.delta) > 10 * pt.gamma1) {
    int sg = std::cos(s.theta) >= 0 ? +1 : -1;
    double l2 = closed_form_lambda_sq(std::sqrt(s.r1_sq), std::sqrt(s.r2_sq), sg);
    r.closed_form_lambda_sq = l2;
    r.closed_form_agrees = (l2 < 0) == r.stable;
  }
  return r;
}

std::vector<SteadyState> solve_selfconsistent(const DimensionlessPoint& pt, const SolveOptions& opt) {
  pt.validate();
  std::vector<SteadyState> out;
  const double b = pt.beta * pt.beta;
  const double F = pt.drive_F();
  const double F2 = F * F;
  auto finish = [&](SteadyState s) {
    s.residual = stationary_residual(pt, s.A1, s.A2);
    if (s.residual > kResidualTol)
      throw ResidualError(to_string(s.kind) + " state residual " + fmt(s.residual) + " exceeds tolerance");
    auto rep = stability(s, pt);
    s.stable = rep.stable;
    s.eigenvalues = rep.eigenvalues;
    s.lambda0 = rep.lambda0;
    s.closed_form_lambda_sq = rep.closed_form_lambda_sq;
    s.closed_form_agrees = rep.closed_form_agrees;
    out.push_back(s);
  };

  // ground states: a1 = 0, mode 2 is a driven Duffing oscillator
  const double c0 = 3 * pt.delta + pt.Delta;
  std::vector<double> us;
  if (F2 == 0)
    us = {0.0};
  else
    us = nonneg_real_roots({-F2, c0 * c0 + pt.gamma2 * pt.gamma2, 2 * b * c0, b * b});
  int gi = 0;
  for (double u : us) {
    SteadyState s;
    s.kind = StateKind::ground;
    s.index = gi++;
    s.r2_sq = u;
    if (u > 0) {
      // polish |(c0 + i g2 + b u) sqrt(u)| = F
      cplx k{c0 + b * u, pt.gamma2};
      s.phi2 = wrap(pt.phiB - std::arg(k));
      s.sector = std::cos(std::arg(k)) >= 0 ? 0.0 : kPi;
    }
    s.A2 = std::polar(std::sqrt(u), s.phi2);
    finish(s);
  }

  auto w = existence_window(pt.delta, pt.gamma1);
  if (!w || F2 == 0) return out;

  std::vector<int> signs = {+1};
  if (opt.include_unstable) signs.push_back(-1);
  const int n = std::max(opt.scan_points, 101);
  for (int sign : signs) {
    auto H = [&](double x) -> std::optional<double> {
      auto g = triad_geometry(pt, x, sign);
      if (!g) return std::nullopt;
      return std::abs(g->Z) - F;
    };
    std::vector<double> xs(n);
    std::vector<std::optional<double>> hs(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = w->r2_minus_sq + (w->r2_plus_sq - w->r2_minus_sq) * i / (n - 1);
      hs[i] = H(xs[i]);
    }
    std::vector<double> roots;
    auto bisect = [&](double lo, double hi, double hlo) {
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        auto hm = H(mid);
        if (!hm) break;
        if ((*hm < 0) == (hlo < 0)) {
          lo = mid;
          hlo = *hm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    };
    for (int i = 0; i + 1 < n; ++i) {
      if (!hs[i] || !hs[i + 1]) continue;
      double a = *hs[i], c = *hs[i + 1];
      if (a == 0) {
        roots.push_back(xs[i]);
        continue;
      }
      if (a * c < 0) roots.push_back(bisect(xs[i], xs[i + 1], a));
      // a root pair hiding inside one cell: refine the local extremum of H
      if (i > 0 && hs[i - 1] && a * c > 0 && a * *hs[i - 1] > 0) {
        double p = *hs[i - 1];
        bool is_min = a > 0 && a < p && a < c;
        bool is_max = a < 0 && a > p && a > c;
        if ((is_min || is_max) && std::abs(a) < 1e-3 * std::max(1.0, F)) {
          double lo = xs[i - 1], hi = xs[i + 1];
          double sgn = is_min ? 1.0 : -1.0;
          const double gr = 0.5 * (std::sqrt(5.0) - 1);
          for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            auto h1 = H(x1), h2 = H(x2);
            if (!h1 || !h2) break;
            if (sgn * *h1 < sgn * *h2)
              hi = x2;
            else
              lo = x1;
          }
          double xe = 0.5 * (lo + hi);
          auto he = H(xe);
          if (he && (*he) * a <= 0) {
            roots.push_back(bisect(xs[i - 1], xe, p));
            roots.push_back(bisect(xe, xs[i + 1], *he));
          } else if (he && std::abs(*he) <= kResidualTol * std::max(1.0, F)) {
            roots.push_back(xe);
          }
        }
      }
    }
    std::sort(roots.begin(), roots.end());
    int branch_id = 0;
    for (double x : roots) {
      auto g = triad_geometry(pt, x, sign);
      if (!g) continue;
      double phi2 = wrap(pt.phiB - std::arg(g->Z));
      double r1 = std::sqrt(g->r1_sq);
      for (int k = 0; k < 3; ++k) {
        SteadyState s;
        s.kind = sign > 0 ? StateKind::triad : StateKind::unstable_branch;
        s.index = sign > 0 ? k : 3 * branch_id + k;
        s.r1_sq = g->r1_sq;
        s.r2_sq = x;
        s.theta = g->theta;
        s.phi2 = phi2;
        s.phi1 = wrap((g->theta + phi2) / 3 + kTwoPi * k / 3);
        s.sector = std::cos(std::arg(g->Z)) >= 0 ? 0.0 : kPi;
        s.A1 = std::polar(r1, s.phi1);
        s.A2 = std::polar(std::sqrt(x), phi2);
        finish(s);
      }
      ++branch_id;
    }
  }
  return out;
}

MaxDrive max_drive(const DimensionlessPoint& pt) {
  if (!(pt.gamma2_ext > 0)) throw DomainError("gamma2_ext must be positive");
  MaxDrive m;
  double ad = std::abs(pt.delta), b = pt.beta * pt.beta;
  m.b2_max_sq = 2 * pt.Delta * pt.Delta * ad * pt.alpha1 / (7 * b * pt.gamma2_ext);
  m.main_text_b2_max_sq = 0.5 * m.b2_max_sq;
  m.regime_warning = ad < 3 * pt.gamma1;
  return m;
}

}  // namespace subharmonic
