#include "run_config.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "subharmonic/errors.hpp"
#include "subharmonic/io.hpp"

namespace subharmonic::cli {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"device", ""},  // empty: built-in table values
      {"ej_convention", "per_junction"},
      {"flux", "0"},
      {"seed", "1"},
      {"threads", "0"},
      {"out", "."},
      {"format", "csv"},
      {"chain.att_db", "0"},
      {"chain.gain_db", "66"},
      {"chain.noise_floor_w", "0.44e-9"},
      {"chain.X", ""},
      {"chain.scale07", "0.7"},
      {"spectrum.flux_min", "-0.45"},
      {"spectrum.flux_max", "0.45"},
      {"spectrum.flux_points", "91"},
      {"steady.delta1_mhz", "-12"},
      {"steady.b2_sq", "6.25e10"},
      {"steady.pd_w", ""},
      {"steady.phiB", "0"},
      {"steady.include_unstable", "false"},
      {"sweep.pd_dbm_min", "-60"},
      {"sweep.pd_dbm_max", "-10"},
      {"sweep.pd_points", "51"},
      {"sweep.delta1_mhz_min", "-12"},
      {"sweep.delta1_mhz_max", "0"},
      {"sweep.delta1_points", "49"},
      {"simulate.delta1_mhz", "-10"},
      {"simulate.b2_sq", "6.25e10"},
      {"simulate.pd_w", ""},
      {"simulate.phiB", "0"},
      {"simulate.dt_s", ""},            // empty: chosen from the detuning
      {"simulate.duration_s", "2e-3"},
      {"simulate.noise", "true"},
      {"simulate.n_th", "0.05"},
      {"simulate.scheme", "rk4_additive"},
      {"simulate.record_every", "10"},
      {"simulate.fs_hz", "1e5, 1e4"},
      {"simulate.bins", "101"},
      {"simulate.hist_range", ""},      // empty: 1.5 sqrt(r1max^2)
      {"simulate.a1", "0, 0"},
      {"simulate.a2", "0, 0"},
      {"fit.files", ""},
      {"thresholds.flux_min", "0"},
      {"thresholds.flux_max", "0.44"},
      {"thresholds.flux_points", "45"},
  };
  return d;
}

bool is_path_key(const std::string& k) { return k == "device" || k == "fit.files"; }

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(s.substr(used)) != "" || !std::isfinite(x))
    throw ConfigError(key + ": '" + s + "' is not a finite number");
  return x;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

}  // namespace

RunConfig::RunConfig() : v_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& source) {
  if (!defaults().count(key)) throw ConfigError(source + ": unknown key '" + key + "'");
  v_[key] = trim(value);
  if (is_path_key(key)) base_[key] = fs::current_path().string();
}

void RunConfig::merge_text(const std::string& text, const std::string& source, const std::string& base_dir) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    std::string where = source + ":" + std::to_string(n);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    set(trim(line.substr(0, eq)), line.substr(eq + 1), where);
    if (is_path_key(trim(line.substr(0, eq)))) base_[trim(line.substr(0, eq))] = base_dir;
  }
}

void RunConfig::merge_file(const std::string& path) {
  auto dir = fs::absolute(path).parent_path().string();
  merge_text(read_file(path), path, dir);
}

const std::string& RunConfig::raw(const std::string& key) const {
  auto it = v_.find(key);
  if (it == v_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  const auto& s = raw(key);
  if (s.empty()) throw ConfigError(key + " must be set");
  return parse_number(key, s);
}

std::optional<double> RunConfig::optional_number(const std::string& key) const {
  if (raw(key).empty()) return std::nullopt;
  return number(key);
}

long long RunConfig::integer(const std::string& key) const {
  double x = number(key);
  if (x != std::floor(x) || std::abs(x) > 9e15) throw ConfigError(key + ": '" + raw(key) + "' is not an integer");
  return static_cast<long long>(x);
}

bool RunConfig::flag(const std::string& key) const {
  const auto& s = raw(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

std::vector<double> RunConfig::number_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_commas(raw(key))) out.push_back(parse_number(key, s));
  return out;
}

std::vector<std::string> RunConfig::path_list(const std::string& key) const {
  std::vector<std::string> out;
  auto base = base_.count(key) ? base_.at(key) : fs::current_path().string();
  for (const auto& s : split_commas(raw(key))) {
    fs::path p(s);
    out.push_back((p.is_absolute() ? p : fs::path(base) / p).lexically_normal().string());
  }
  return out;
}

std::uint64_t RunConfig::seed() const {
  const auto& s = raw("seed");
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      auto x = std::stoull(s, &used);
      if (used == s.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("seed: '" + s + "' is not an unsigned integer");
}

unsigned RunConfig::threads() const {
  auto n = integer("threads");
  if (n < 0 || n > 4096) throw ConfigError("threads must lie in [0, 4096]");
  return static_cast<unsigned>(n);
}

std::string RunConfig::out_dir() const { return raw("out").empty() ? "." : raw("out"); }

CircuitParams RunConfig::device() const {
  auto paths = path_list("device");
  if (paths.size() > 1) throw ConfigError("device names more than one file");
  CircuitParams p = paths.empty() ? reference_device() : load_circuit_params(paths[0]);
  p.validate();
  return p;
}

EJConvention RunConfig::convention() const {
  try {
    return ej_convention_from_string(raw("ej_convention"));
  } catch (const Error& e) {
    throw ConfigError(std::string("ej_convention: ") + e.what());
  }
}

CalibrationChain RunConfig::chain() const {
  CalibrationChain c;
  c.att_db = number("chain.att_db");
  c.gain_db = number("chain.gain_db");
  c.noise_floor_w = number("chain.noise_floor_w");
  c.X = optional_number("chain.X");
  c.scale07 = number("chain.scale07");
  c.validate();
  return c;
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& [k, v] : v_) {
    std::string shown = v;
    if (is_path_key(k) && !v.empty()) {
      shown.clear();
      for (const auto& p : path_list(k)) shown += (shown.empty() ? "" : ", ") + p;
    }
    os << k << " = " << shown << "\n";
  }
  std::istringstream dev(format_circuit_params(device()));
  for (std::string line; std::getline(dev, line);) os << "device." << line << "\n";
  return os.str();
}

std::vector<double> linspace(const std::string& what, double lo, double hi, long long n) {
  if (n < 1 || lo > hi)
    throw UsageError(what + ": empty range [" + std::to_string(lo) + ", " + std::to_string(hi) + "] with " +
                     std::to_string(n) + " points");
  if (n > 10000000) throw UsageError(what + ": too many points");
  std::vector<double> out;
  for (long long k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1));
  return out;
}

}  // namespace subharmonic::cli
