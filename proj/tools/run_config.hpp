#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subharmonic/calibration.hpp"
#include "subharmonic/circuit.hpp"

namespace subharmonic::cli {

// Flat `key = value` settings. Every known key has a default; unknown keys are
// rejected so typos do not silently fall back.
class RunConfig {
 public:
  RunConfig();

  // base_dir resolves relative paths (device, fit.files) found in this text
  void merge_text(const std::string& text, const std::string& source, const std::string& base_dir);
  void merge_file(const std::string& path);
  void set(const std::string& key, const std::string& value, const std::string& source = "--set");

  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  std::optional<double> optional_number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> number_list(const std::string& key) const;
  std::vector<std::string> path_list(const std::string& key) const;

  std::uint64_t seed() const;
  unsigned threads() const;
  std::string out_dir() const;

  CircuitParams device() const;
  EJConvention convention() const;
  CalibrationChain chain() const;

  // resolved settings, one `key = value` per line, sorted; the device
  // parameters follow under `device.`
  std::string dump() const;
  const std::map<std::string, std::string>& values() const { return v_; }

 private:
  std::map<std::string, std::string> v_;
  std::map<std::string, std::string> base_;  // directory each path-valued key came from
};

// Evenly spaced points; usage error when n < 1 or lo > hi.
std::vector<double> linspace(const std::string& what, double lo, double hi, long long n);

}  // namespace subharmonic::cli
