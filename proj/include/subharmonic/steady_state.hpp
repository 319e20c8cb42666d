#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subharmonic/circuit.hpp"

namespace subharmonic {

using cplx = std::complex<double>;

struct Window {
  double r2_minus_sq = 0, r2_plus_sq = 0;
};
std::optional<Window> existence_window(double delta, double gamma1);

struct Branch {
  double r1_sq = 0;
  int sign = +1;  // +1 is the stable branch
};
std::vector<Branch> subharmonic_branches(double delta, double gamma1, double r2_sq);
// value of the stable (+) branch, no existence check beyond the discriminant
std::optional<double> stable_branch(double delta, double gamma1, double r2_sq);

struct TriadPhase {
  double phi1 = 0, theta = 0;
};
std::array<TriadPhase, 3> triad_phases(double delta, double gamma1, double r1_sq, double r2_sq,
                                       double phi2);

struct MaxIntensity {
  double r1_max_sq = 0;
  double argmax_r2_sq = 0;  // exact maximiser of the stable branch
  double asymptotic_argmax_r2_sq = 0;  // |delta|/14, the |delta| >> gamma1 limit
};
MaxIntensity max_intensity(double delta, double gamma1);

// Roots r2^2 of [(3d+D+b(r2^2+2r1^2)) r2 + s (b/3) r1^3]^2 + g2^2 r2^2 = F^2 with
// s = cos(sector); sector pi is the one the stable triad lives in.
std::vector<double> second_mode_response(const DimensionlessPoint& pt, double r1_sq, double sector);

// Drive F^2 needed to hold r2^2 on the stable triad branch (exact phase, no
// approximation of theta). Empty outside the existence window.
std::optional<double> triad_drive_sq(const DimensionlessPoint& pt, double r2_sq);
// |B2|^2 in s^-1 for a dimensionless drive F^2
double drive_b2_sq(const DimensionlessPoint& pt, double F_sq);

struct ResponseCurve {
  std::vector<double> r2_sq;
  std::vector<double> F_sq;
  std::vector<double> B2_sq;  // s^-1
};
ResponseCurve triad_response_curve(const DimensionlessPoint& pt, int points);

// Fraction of the drive range [cutoff*max, max] over which the curve is multi-valued.
double multivalued_fraction(const ResponseCurve& c, double low_cutoff = 0.1);

enum class StateKind { ground, triad, unstable_branch };
std::string to_string(StateKind k);

struct SteadyState {
  StateKind kind = StateKind::ground;
  int index = 0;  // triad member k, or ground-branch index
  double r1_sq = 0, r2_sq = 0;
  double theta = 0, phi1 = 0, phi2 = 0;
  double sector = 0;  // 0 or pi: phi2 - phiB relative to the drive
  cplx A1, A2;        // scaled amplitudes: A1 = a1, A2 = beta a2
  bool stable = false;
  std::vector<cplx> eigenvalues;  // units of alpha1
  double residual = 0;
  std::optional<cplx> lambda0;           // ground states
  std::optional<double> closed_form_lambda_sq;  // triads with |delta| > 10 gamma1
  std::optional<bool> closed_form_agrees;
};

// Scaled right-hand side dA/dtau.
std::array<cplx, 2> scaled_rhs(const DimensionlessPoint& pt, cplx A1, cplx A2);
double stationary_residual(const DimensionlessPoint& pt, cplx A1, cplx A2);

using Jacobian4 = std::array<std::array<double, 4>, 4>;
Jacobian4 jacobian(const DimensionlessPoint& pt, cplx A1, cplx A2);
std::vector<cplx> eigenvalues(const Jacobian4& J);
// mode-1 block with A2 held fixed, in (p1, q1)
std::array<std::array<double, 2>, 2> pump_fixed_jacobian(double delta, double gamma1, cplx A1, cplx A2);

struct StabilityReport {
  bool stable = false;
  std::vector<cplx> eigenvalues;
  std::optional<cplx> lambda0;
  std::optional<double> closed_form_lambda_sq;
  std::optional<bool> closed_form_agrees;
};
// lambda_1^2 for a triad-type state with radius r1 >= 0 and cos(theta) sign sg
double closed_form_lambda_sq(double r1, double r2, int sg);
StabilityReport stability(const SteadyState& s, const DimensionlessPoint& pt);

struct SolveOptions {
  bool include_unstable = false;  // also report the saddle (-) branch
  int scan_points = 10001;
};
std::vector<SteadyState> solve_selfconsistent(const DimensionlessPoint& pt, const SolveOptions& opt = {});

struct MaxDrive {
  double b2_max_sq = 0;            // s^-1
  double main_text_b2_max_sq = 0;  // alternative prefactor grouping, s^-1
  bool regime_warning = false;     // |delta| < 3 gamma1
};
MaxDrive max_drive(const DimensionlessPoint& pt);

}  // namespace subharmonic
