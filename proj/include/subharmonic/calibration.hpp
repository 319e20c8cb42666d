#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subharmonic/circuit.hpp"

namespace subharmonic {

// att_db is the drive-line loss as a positive number of dB: the generator
// delivers 10^(att_db/10) times the power that reaches the resonator.
struct CalibrationChain {
  double att_db = 0;
  double gain_db = 66;
  double noise_floor_w = 0.44e-9;
  std::optional<double> X;  // Q2_ext * 10^(att_db/10)
  double scale07 = 0.7;
  void validate() const;
};

struct Linecut {
  double delta1 = 0;  // rad/s
  double flux = 0;    // Phi0
  double fs = 0;      // Hz, informational
  std::vector<double> pd_w, pout_w;
  void validate() const;
};

double dbm_to_w(double dbm);
double w_to_dbm(double w);

double drive_power(double b2_sq, double att_db, double omega);
double drive_b2_sq_from_power(double pd_w, double att_db, double omega);
double output_power(double a1_sq, double gamma1_ext, double gain_db, double omega);
double output_photons(double pout_w, double gamma1_ext, double gain_db, double omega);

// r2^2 reached at drive power pd_w for calibration X, large-anharmonicity response
double pump_intensity(const ModePair& m, double delta1, double pd_w, double X);
// model output power at one drive power (zero outside the existence window)
double model_output(const ModePair& m, double delta1, double pd_w, double X, double gain_db);
// |B2|^2 at the resonator implied by X and the model's own Q2_ext
double b2_sq_from_X(const ModePair& m, double delta1, double pd_w, double X);
double pd_from_b2_sq_X(const ModePair& m, double delta1, double b2_sq, double X);

struct FitResult {
  double x = 0;
  double x_sigma = 0;
  double residual = 0;   // rms of (model - data) over fitted points, W
  std::size_t n_points = 0;
  std::vector<std::vector<double>> model;  // per linecut, per record
};

struct FitOptions {
  double x_min = 0, x_max = 0;  // 0: derived from the data
  int grid = 4001;
};

// modes[k] must correspond to linecuts[k].flux
FitResult fit_X(const std::vector<Linecut>& cuts, const std::vector<ModePair>& modes,
                const CalibrationChain& chain, const FitOptions& opt = {});
double fit_objective(const std::vector<Linecut>& cuts, const std::vector<ModePair>& modes,
                     const CalibrationChain& chain, double X);

double predict_max_output(const ModePair& m, double delta1, const CalibrationChain& chain);
double true_threshold(const ModePair& m);  // -sqrt(7) Gamma1, rad/s
double visible_threshold(const ModePair& m, const CalibrationChain& chain);

enum class Region { I = 0, exists = 1 };

struct RegionMap {
  std::vector<double> pd_w;    // drive power axis
  std::vector<double> delta1;  // rad/s
  std::vector<Region> cells;   // index id * pd_w.size() + ip
  std::vector<std::pair<double, double>> boundary;  // (delta1, pd_max_w)
  Region at(std::size_t id, std::size_t ip) const { return cells[id * pd_w.size() + ip]; }
};
RegionMap region_map(const ModePair& m, const CalibrationChain& chain, const std::vector<double>& pd_w,
                     const std::vector<double>& delta1, unsigned threads = 0);

// CSV with header `pd_dbm,pout_w`; sidecar JSON at path + ".json"
Linecut load_linecut(const std::string& csv_path);
void save_linecut(const Linecut& c, const std::string& csv_path);
std::string fit_report_json(const FitResult& r, const std::string& extra_json = "{}");

}  // namespace subharmonic
