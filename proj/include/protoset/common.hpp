#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace protoset {

// Thrown for malformed configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown for malformed or incompatible data (CLI exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a computation produces a non-finite value (CLI exit code 4).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_config(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

inline void check_data(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

inline void check_numeric(bool cond, const std::string& msg) {
  if (!cond) throw NumericError(msg);
}

// Relative tolerance scaled by the larger operand magnitude.
inline bool approx_equal(double a, double b, double rel = 1e-9) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace protoset
