#pragma once

#include <stdexcept>
#include <string>

namespace subharmonic {

// Error classes map one-to-one onto CLI exit codes (see README).
enum class ErrorCode {
  usage = 1,
  config = 2,
  domain = 3,      // degenerate flux, out of range, below threshold, ...
  numerical = 4,   // no convergence, divergence, residual too large
  io = 5,
  no_signal = 6,
  internal = 7,    // anything not raised by this library
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& w) : Error(ErrorCode::usage, w) {}
};
struct DegenerateFluxError : Error {
  explicit DegenerateFluxError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct OutOfRangeError : Error {
  explicit OutOfRangeError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct OvercurrentError : Error {
  explicit OvercurrentError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct BelowThresholdError : Error {
  explicit BelowThresholdError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct MissingCcError : Error {
  explicit MissingCcError(const std::string& w) : Error(ErrorCode::config, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::config, w) {}
};
struct NoConvergenceError : Error {
  explicit NoConvergenceError(const std::string& w) : Error(ErrorCode::numerical, w) {}
};
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w) : Error(ErrorCode::numerical, w) {}
};
struct ResidualError : Error {
  explicit ResidualError(const std::string& w) : Error(ErrorCode::numerical, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};
struct NoSignalError : Error {
  explicit NoSignalError(const std::string& w) : Error(ErrorCode::no_signal, w) {}
};

}  // namespace subharmonic
