#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>

namespace subharmonic {

inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kFluxQuantum = 2.067833848e-15;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kMaxFlux = 0.45;  // in units of Phi0

struct CircuitParams {
  double d = 5.08e-3;      // m
  double Ic = 1.90e-6;     // A, SQUID critical current
  double CJ = 86.1e-15;    // F, SQUID capacitance (both junctions)
  double L0 = 0.44e-6;     // H/m
  double C0 = 0.16e-9;     // F/m
  std::optional<double> Cc;          // F
  double Q_int_1 = 61.1e3;
  std::optional<double> Q_ext_1 = 19e3;
  std::optional<double> Q_int_2;     // defaults to Q_int_1
  double Phi0 = kFluxQuantum;

  double cavity_inductance() const { return L0 * d; }
  double cavity_capacitance() const { return C0 * d; }
  double phase_velocity() const;
  // (Phi0/2pi)^2 / L_cav, in J
  double inductive_energy() const;
  // Josephson energy of the whole SQUID at flux phi (units of Phi0), in J
  double squid_energy(double phi) const;
  double participation_ratio() const;

  void validate() const;
};

// Parameters of the reference device, used by the tests and default configs.
CircuitParams reference_device();

// per_junction: E_J(phi) is one junction, so 2E_J equals the SQUID energy.
// total: E_J(phi) is the SQUID energy itself.
enum class EJConvention { per_junction, total };
std::string to_string(EJConvention c);
EJConvention ej_convention_from_string(const std::string& s);

struct ModeProfile {
  int n = 1;
  double kd = 0;
  double omega = 0;      // rad/s
  double alpha = 0;      // rad/s
  double gamma_ext = 0;  // rad/s
  double gamma_int = 0;  // rad/s
  double gamma = 0;      // rad/s
};

struct ModeCouplings {
  double alpha_cross = 0;  // sqrt(a1 a2)
  double alpha_tilde = 0;  // (a1^3 a2)^(1/4)
  double beta = 0;         // (a2/a1)^(1/4)
};

struct DimensionlessPoint {
  double delta = 0;
  double Delta = 0;
  double gamma1 = 0;
  double gamma2 = 0;
  double gamma2_ext = 0;
  double beta = 1;
  double alpha1 = 1;   // rad/s
  double B2 = 0;       // |B2|, s^-1/2
  double phiB = 0;     // rad

  // drive strength F entering the scaled pump equation
  double drive_F() const;
  double drive_F_sq() const;
  void validate() const;
};

double squid_inductance(const CircuitParams& p, double phi, double Is);

// Root of (kd) tan(kd) = rhs0 - cap_ratio (kd)^2 in ((n-1)pi, (n-1)pi + pi/2).
double solve_dispersion(double rhs0, double cap_ratio, int n);

ModeProfile solve_spectrum(const CircuitParams& p, double phi, int n,
                           EJConvention conv = EJConvention::per_junction);
double mode_kerr(const CircuitParams& p, double phi, const ModeProfile& m,
                 EJConvention conv = EJConvention::per_junction);

struct Damping {
  double gamma_ext = 0, gamma_int = 0, gamma = 0;
};
double coupling_ratio_sq(const CircuitParams& p, EJConvention conv = EJConvention::per_junction);
Damping mode_damping(const CircuitParams& p, double phi, const ModeProfile& m,
                     EJConvention conv = EJConvention::per_junction);

ModeProfile mode_profile(const CircuitParams& p, double phi, int n,
                         EJConvention conv = EJConvention::per_junction);

struct ModePair {
  ModeProfile m1, m2;
  ModeCouplings c;
  double flux = 0;
};
ModeCouplings couplings(const ModeProfile& m1, const ModeProfile& m2);
ModePair modes_at(const CircuitParams& p, double phi,
                  EJConvention conv = EJConvention::per_junction);

// signal_omega is the subharmonic frequency; the drive sits at 3*signal_omega.
DimensionlessPoint reduce(const ModePair& modes, double signal_omega, std::complex<double> B2);
DimensionlessPoint reduce_detuning(const ModePair& modes, double delta1, std::complex<double> B2);

// key = value unit, one per line, '#' comments.
CircuitParams parse_circuit_params(const std::string& text, const std::string& source = "<string>");
CircuitParams load_circuit_params(const std::string& path);
std::string format_circuit_params(const CircuitParams& p);

}  // namespace subharmonic
