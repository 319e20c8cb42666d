#include "subharmonic/circuit.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "subharmonic/errors.hpp"

namespace subharmonic {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double flux_cos(double phi) { return std::cos(kPi * phi); }

void check_degenerate(double phi) {
  double frac = phi - std::round(phi);  // in [-0.5, 0.5]
  if (std::abs(std::abs(frac) - 0.5) < 1e-12)
    throw DegenerateFluxError("flux " + fmt(phi) + " Phi0 is degenerate (cos(pi Phi/Phi0) = 0)");
}

void check_flux(double phi) {
  if (!std::isfinite(phi)) throw OutOfRangeError("flux is not finite");
  check_degenerate(phi);
  if (std::abs(phi) > kMaxFlux + 1e-12)
    throw OutOfRangeError("flux " + fmt(phi) + " Phi0 outside supported range |Phi| <= 0.45 Phi0");
}

// 2E_J and E_J in J for the chosen convention
double two_ej(const CircuitParams& p, double phi, EJConvention c) {
  double es = p.squid_energy(phi);
  return c == EJConvention::per_junction ? es : 2.0 * es;
}
double ej(const CircuitParams& p, double phi, EJConvention c) {
  double es = p.squid_energy(phi);
  return c == EJConvention::per_junction ? 0.5 * es : es;
}

}  // namespace

double CircuitParams::phase_velocity() const { return 1.0 / std::sqrt(L0 * C0); }

double CircuitParams::inductive_energy() const {
  double f = Phi0 / kTwoPi;
  return f * f / cavity_inductance();
}

double CircuitParams::squid_energy(double phi) const {
  return Phi0 / kTwoPi * Ic * std::abs(flux_cos(phi));
}

double CircuitParams::participation_ratio() const {
  return squid_inductance(*this, 0.0, 0.0) / cavity_inductance();
}

void CircuitParams::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  pos(d, "d");
  pos(Ic, "Ic");
  pos(CJ, "CJ");
  pos(L0, "L0");
  pos(C0, "C0");
  pos(Phi0, "Phi0");
  pos(Q_int_1, "Q_int_1");
  if (Cc) pos(*Cc, "Cc");
  if (Q_ext_1) pos(*Q_ext_1, "Q_ext_1");
  if (Q_int_2) pos(*Q_int_2, "Q_int_2");
  double g0 = participation_ratio();
  if (!(g0 > 0 && g0 < 1)) throw ConfigError("participation ratio L_J/(L0 d) = " + fmt(g0) + " not in (0,1)");
  if (!(cavity_capacitance() > CJ)) throw ConfigError("cavity capacitance C0 d must exceed CJ");
}

CircuitParams reference_device() { return CircuitParams{}; }

std::string to_string(EJConvention c) {
  return c == EJConvention::per_junction ? "per_junction" : "total";
}

EJConvention ej_convention_from_string(const std::string& s) {
  if (s == "per_junction") return EJConvention::per_junction;
  if (s == "total") return EJConvention::total;
  throw ConfigError("unknown E_J convention '" + s + "' (expected per_junction or total)");
}

double DimensionlessPoint::drive_F_sq() const { return beta * beta * 2.0 * gamma2_ext * B2 * B2 / alpha1; }
double DimensionlessPoint::drive_F() const { return std::sqrt(drive_F_sq()); }

void DimensionlessPoint::validate() const {
  if (!(gamma1 >= 0)) throw DomainError("gamma1 must be non-negative");
  if (!(gamma2 > 0)) throw DomainError("gamma2 must be positive");
  if (!(gamma2_ext >= 0 && gamma2_ext <= gamma2 * (1 + 1e-12)))
    throw DomainError("gamma2_ext must lie in [0, gamma2]");
  if (!(alpha1 > 0)) throw DomainError("alpha1 must be positive");
  if (!(beta > 0)) throw DomainError("beta must be positive");
  if (!(B2 >= 0) || !std::isfinite(B2)) throw DomainError("|B2| must be finite and non-negative");
  if (!std::isfinite(delta) || !std::isfinite(Delta)) throw DomainError("detunings must be finite");
}

double squid_inductance(const CircuitParams& p, double phi, double Is) {
  check_degenerate(phi);
  if (!(std::abs(Is) < p.Ic))
    throw OvercurrentError("|Is| = " + fmt(std::abs(Is)) + " A is not below Ic = " + fmt(p.Ic) + " A");
  return p.Phi0 / (kTwoPi * std::abs(flux_cos(phi)) * std::sqrt(p.Ic * p.Ic - Is * Is));
}

double solve_dispersion(double rhs0, double cap_ratio, int n) {
  if (n != 1 && n != 2) throw DomainError("mode index must be 1 or 2");
  const double lo0 = (n - 1) * kPi;
  const double hi0 = lo0 + 0.5 * kPi;
  auto f = [&](double x) { return x * std::tan(x) - (rhs0 - cap_ratio * x * x); };
  double lo = lo0, hi = hi0;
  // endpoints are never evaluated: tan diverges at hi0, and lo0 may be 0
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (fm < 0)
      lo = mid;
    else
      hi = mid;
  }
  // bisected down to adjacent doubles; keep the better side
  double kd = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
  if (kd <= lo0 || kd >= hi0) kd = 0.5 * (lo + hi);
  double rhs = rhs0 - cap_ratio * kd * kd;
  double res = std::abs(f(kd));
  if (!(kd > lo0 && kd < hi0) || res > 1e-9 * std::max(std::abs(rhs), 1e-300))
    throw NoConvergenceError("dispersion root not found in (" + fmt(lo0) + ", " + fmt(hi0) +
                             "); last kd = " + fmt(kd) + ", residual = " + fmt(res));
  return kd;
}

ModeProfile solve_spectrum(const CircuitParams& p, double phi, int n, EJConvention conv) {
  check_flux(phi);
  double rhs0 = two_ej(p, phi, conv) / p.inductive_energy();
  double cap = p.CJ / p.cavity_capacitance();
  ModeProfile m;
  m.n = n;
  m.kd = solve_dispersion(rhs0, cap, n);
  m.omega = m.kd * p.phase_velocity() / p.d;
  return m;
}

double mode_kerr(const CircuitParams& p, double phi, const ModeProfile& m, EJConvention conv) {
  check_flux(phi);
  double el = p.inductive_energy();
  double e = ej(p, phi, conv);
  return kHbar * m.omega * m.omega * el * el / (16.0 * e * e * e);
}

double coupling_ratio_sq(const CircuitParams& p, EJConvention conv) {
  if (p.Cc) {
    double r = *p.Cc / p.cavity_capacitance();
    return r * r;
  }
  if (!p.Q_ext_1) throw MissingCcError("neither Cc nor Q_ext_1 given; cannot resolve the coupling capacitance");
  // omega1 k1d (Cc/Ccav)^2 = omega1 / (2 Q_ext)
  ModeProfile m1 = solve_spectrum(p, 0.0, 1, conv);
  return 1.0 / (2.0 * *p.Q_ext_1 * m1.kd);
}

Damping mode_damping(const CircuitParams& p, double phi, const ModeProfile& m, EJConvention conv) {
  check_flux(phi);
  Damping d;
  d.gamma_ext = m.omega * m.kd * coupling_ratio_sq(p, conv);
  double q = (m.n == 2 && p.Q_int_2) ? *p.Q_int_2 : p.Q_int_1;
  // internal losses taken flux independent, fixed at their zero-flux value
  double w0 = solve_spectrum(p, 0.0, m.n, conv).omega;
  d.gamma_int = w0 / (2.0 * q);
  d.gamma = d.gamma_ext + d.gamma_int;
  return d;
}

ModeProfile mode_profile(const CircuitParams& p, double phi, int n, EJConvention conv) {
  ModeProfile m = solve_spectrum(p, phi, n, conv);
  m.alpha = mode_kerr(p, phi, m, conv);
  Damping d = mode_damping(p, phi, m, conv);
  m.gamma_ext = d.gamma_ext;
  m.gamma_int = d.gamma_int;
  m.gamma = d.gamma;
  return m;
}

ModeCouplings couplings(const ModeProfile& m1, const ModeProfile& m2) {
  ModeCouplings c;
  c.alpha_cross = std::sqrt(m1.alpha * m2.alpha);
  c.beta = std::sqrt(std::sqrt(m2.alpha / m1.alpha));
  c.alpha_tilde = m1.alpha * c.beta;
  return c;
}

ModePair modes_at(const CircuitParams& p, double phi, EJConvention conv) {
  ModePair mp;
  mp.m1 = mode_profile(p, phi, 1, conv);
  mp.m2 = mode_profile(p, phi, 2, conv);
  mp.c = couplings(mp.m1, mp.m2);
  mp.flux = phi;
  return mp;
}

DimensionlessPoint reduce_detuning(const ModePair& modes, double delta1, std::complex<double> B2) {
  const double a1 = modes.m1.alpha;
  if (!(a1 > 0)) throw DomainError("alpha1 must be positive");
  DimensionlessPoint pt;
  pt.alpha1 = a1;
  pt.delta = delta1 / a1;
  pt.Delta = (3.0 * modes.m1.omega - modes.m2.omega) / a1;
  pt.gamma1 = modes.m1.gamma / a1;
  pt.gamma2 = modes.m2.gamma / a1;
  pt.gamma2_ext = modes.m2.gamma_ext / a1;
  pt.beta = modes.c.beta;
  pt.B2 = std::abs(B2);
  pt.phiB = std::arg(B2);
  return pt;
}

DimensionlessPoint reduce(const ModePair& modes, double signal_omega, std::complex<double> B2) {
  return reduce_detuning(modes, signal_omega - modes.m1.omega, B2);
}

// ---- config file ----

namespace {

struct KeySpec {
  const char* unit;
  bool required;
};

const std::map<std::string, KeySpec>& key_specs() {
  static const std::map<std::string, KeySpec> specs = {
      {"d", {"m", true}},          {"Ic", {"A", true}},         {"CJ", {"F", true}},
      {"L0", {"H/m", true}},       {"C0", {"F/m", true}},       {"Cc", {"F", false}},
      {"Q_int_1", {"1", true}},    {"Q_ext_1", {"1", false}},   {"Q_int_2", {"1", false}},
      {"Phi0", {"Wb", false}},
  };
  return specs;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CircuitParams parse_circuit_params(const std::string& text, const std::string& source) {
  std::map<std::string, double> vals;
  std::map<std::string, int> where;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value unit'");
    std::string key = trim(line.substr(0, eq));
    std::istringstream rhs(line.substr(eq + 1));
    std::string num, unit, extra;
    rhs >> num >> unit >> extra;
    auto it = key_specs().find(key);
    if (it == key_specs().end()) fail("unknown key '" + key + "'");
    if (where.count(key)) fail("duplicate key '" + key + "' (first on line " + std::to_string(where[key]) + ")");
    if (num.empty()) fail("missing value for '" + key + "'");
    if (unit.empty()) fail("missing unit for '" + key + "' (expected " + it->second.unit + ")");
    if (!extra.empty()) fail("trailing text after unit for '" + key + "'");
    if (unit != it->second.unit)
      fail("wrong unit '" + unit + "' for '" + key + "' (expected " + it->second.unit + ")");
    double v;
    try {
      size_t pos = 0;
      v = std::stod(num, &pos);
      if (pos != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      fail("cannot parse number '" + num + "' for '" + key + "'");
    }
    vals[key] = v;
    where[key] = lineno;
  }
  for (const auto& [k, spec] : key_specs())
    if (spec.required && !vals.count(k))
      throw ConfigError(source + ":" + std::to_string(lineno) + ": missing required key '" + k + "'");

  CircuitParams p;
  p.d = vals["d"];
  p.Ic = vals["Ic"];
  p.CJ = vals["CJ"];
  p.L0 = vals["L0"];
  p.C0 = vals["C0"];
  p.Q_int_1 = vals["Q_int_1"];
  p.Cc.reset();
  p.Q_ext_1.reset();
  if (vals.count("Cc")) p.Cc = vals["Cc"];
  if (vals.count("Q_ext_1")) p.Q_ext_1 = vals["Q_ext_1"];
  if (vals.count("Q_int_2")) p.Q_int_2 = vals["Q_int_2"];
  if (vals.count("Phi0")) p.Phi0 = vals["Phi0"];
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return p;
}

CircuitParams load_circuit_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open device file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_circuit_params(ss.str(), path);
}

std::string format_circuit_params(const CircuitParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "d = " << p.d << " m\n"
     << "Ic = " << p.Ic << " A\n"
     << "CJ = " << p.CJ << " F\n"
     << "L0 = " << p.L0 << " H/m\n"
     << "C0 = " << p.C0 << " F/m\n";
  if (p.Cc) os << "Cc = " << *p.Cc << " F\n";
  os << "Q_int_1 = " << p.Q_int_1 << " 1\n";
  if (p.Q_ext_1) os << "Q_ext_1 = " << *p.Q_ext_1 << " 1\n";
  if (p.Q_int_2) os << "Q_int_2 = " << *p.Q_int_2 << " 1\n";
  os << "Phi0 = " << p.Phi0 << " Wb\n";
  return os.str();
}

}  // namespace subharmonic
