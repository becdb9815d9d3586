#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace mgems {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error taxonomy; the CLI maps each class to a distinct exit code.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};
struct TraceError : std::runtime_error {
  explicit TraceError(const std::string& msg) : std::runtime_error("trace: " + msg) {}
};
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error("solver: " + msg) {}
};
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& msg) : std::runtime_error("invariant: " + msg) {}
};

// Shortest lossless decimal rendering; used by every writer so identical runs
// produce identical bytes.
inline std::string fmt_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = std::strtod(buf, nullptr);
  if (back == v) {
    // try shorter forms for readability when they round-trip
    for (int prec = 1; prec <= 16; ++prec) {
      char s[40];
      std::snprintf(s, sizeof s, "%.*g", prec, v);
      if (std::strtod(s, nullptr) == v) return s;
    }
  }
  return buf;
}

inline bool nearly_equal(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * (1.0 + std::fabs(a) + std::fabs(b));
}

}  // namespace mgems
