#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subharmonic/circuit.hpp"

namespace subharmonic {

using cplx = std::complex<double>;

// Physical-unit coefficients of the two-mode equations (all rad/s, B2 in s^-1/2).
struct TwoModeSystem {
  double delta1 = 0, delta2 = 0;
  double gamma1 = 0, gamma2 = 0, gamma2_ext = 0;
  double alpha1 = 0, alpha2 = 0, alpha_cross = 0, alpha_tilde = 0;
  cplx B2;

  static TwoModeSystem from_point(const DimensionlessPoint& pt);
  std::array<cplx, 2> rhs(cplx a1, cplx a2) const;
};

// Rotating-frame energy H/hbar in rad/s. Coefficients are the ones for which
// i da/dt = dH/d(conj a) reproduces the damping-free equations of motion.
double metapotential(const TwoModeSystem& s, cplx a1, cplx a2);

enum class NoiseScheme { rk4_additive, euler_maruyama };
std::string to_string(NoiseScheme s);
NoiseScheme noise_scheme_from_string(const std::string& s);

struct NoiseConfig {
  double D1 = 0, D2 = 0;  // s^-1; complex increment sqrt(D dt)(N1 + i N2)
  std::uint64_t seed = 0;
  NoiseScheme scheme = NoiseScheme::rk4_additive;

  static NoiseConfig thermal(const TwoModeSystem& s, double n_th, std::uint64_t seed);
};

struct IntegrateOptions {
  double ceiling = 1e6;              // |a_n| above this aborts
  std::size_t record_every = 1;      // keep every k-th step
  double expected_max_photons = 0;   // 0: estimate from detuning and initial state
};

struct Trajectory {
  double dt = 0;                 // integration step, s
  std::size_t record_every = 1;  // samples are every record_every steps
  std::vector<cplx> a1, a2;
  double B2_abs = 0, phiB = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> warnings;

  double sample_interval() const { return dt * double(record_every); }
  std::size_t size() const { return a1.size(); }
  double duration() const { return sample_interval() * double(size()); }
};

Trajectory integrate(const TwoModeSystem& sys, cplx a1_0, cplx a2_0, double duration, double dt,
                     const std::optional<NoiseConfig>& noise = std::nullopt,
                     const IntegrateOptions& opt = {});

// Runs each initial condition on its own RNG stream derived from noise->seed.
std::vector<Trajectory> integrate_ensemble(const TwoModeSystem& sys,
                                           const std::vector<std::pair<cplx, cplx>>& initial,
                                           double duration, double dt,
                                           const std::optional<NoiseConfig>& noise,
                                           const IntegrateOptions& opt = {}, unsigned threads = 0);
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

// ---- demodulation and histograms ----

struct GainModel {
  double volts_per_sqrt_photon = 1.0;
};

struct Histogram2D {
  std::vector<double> i_edges, q_edges;
  std::vector<std::uint64_t> counts;  // (i bin) * nq + (q bin)
  double fs = 0;                      // Hz
  std::string units = "sqrt_photons";

  std::size_t ni() const { return i_edges.size() - 1; }
  std::size_t nq() const { return q_edges.size() - 1; }
  double window() const { return 1.0 / fs; }
  std::uint64_t at(std::size_t i, std::size_t q) const { return counts[i * nq() + q]; }
  std::uint64_t total() const;
  void merge(const Histogram2D& other);
};

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

// Boxcar average of a1 over non-overlapping windows of length 1/fs.
std::vector<cplx> demodulate(const Trajectory& t, double fs);
// Out-of-range samples are clamped into the edge bins so every sample is counted.
Histogram2D bin_samples(const std::vector<cplx>& samples, const std::vector<double>& i_edges,
                        const std::vector<double>& q_edges, double fs,
                        const std::optional<GainModel>& gain = std::nullopt);
Histogram2D demodulate_histogram(const std::vector<Trajectory>& ens, double fs,
                                 const std::vector<double>& i_edges, const std::vector<double>& q_edges,
                                 const std::optional<GainModel>& gain = std::nullopt);

// ---- state classification ----

struct SwitchingStats {
  double rate_hz = 0;
  std::size_t changes = 0;
  std::vector<std::vector<std::uint64_t>> transitions;  // [from][to]
  std::vector<double> occupancy;                        // fraction of samples near each state
  double transit_fraction = 0;
};

// label of the nearest centre within radius, -1 in transit
std::vector<int> classify(const std::vector<cplx>& samples, const std::vector<cplx>& centres, double radius);
SwitchingStats switching_rate(const std::vector<cplx>& samples, double sample_interval,
                              const std::vector<cplx>& centres, double radius);

struct ClusterSummary {
  std::vector<double> occupancy;  // per centre
  std::vector<cplx> centroid;     // mean of samples assigned to each centre
  // fraction of transit samples lying within halfwidth of the segment i-j (i<j)
  std::vector<std::vector<double>> line_fraction;
};
ClusterSummary summarize_clusters(const std::vector<cplx>& samples, const std::vector<cplx>& centres,
                                  double radius, double line_halfwidth);

// ---- metapotential grid ----

struct MetapotentialGrid {
  std::vector<double> p1, q1;
  cplx a2;
  std::vector<double> H;  // rad/s, index i * q1.size() + j
  double at(std::size_t i, std::size_t j) const { return H[i * q1.size() + j]; }
};

MetapotentialGrid metapotential_grid(const TwoModeSystem& sys, std::pair<double, double> p1_range,
                                     std::pair<double, double> q1_range, std::size_t n, cplx a2);

struct GridPoint {
  std::size_t i, j;
  bool maximum;
};
// strict local extrema over the 8-neighbourhood, interior points only
std::vector<GridPoint> grid_extrema(const MetapotentialGrid& g);

}  // namespace subharmonic
