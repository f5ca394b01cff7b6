#pragma once

// Shared error types, a tiny deterministic RNG, and formatting helpers used
// across the V_n solver headers.

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vn {

using Vec = std::vector<double>;

struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

struct MaxDepthExceeded : std::runtime_error {
  explicit MaxDepthExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct Infeasible : std::runtime_error {
  explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

struct AllStartsFailed : std::runtime_error {
  explicit AllStartsFailed(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic splitmix64 stream; avoids implementation-defined std::
// distributions so identical seeds give identical runs on any build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Stable seed mixing for per-task substreams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double sum(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

// Fixed 7-decimal display; printf performs correctly rounded (ties-to-even)
// binary-to-decimal conversion.
inline std::string format_fixed7(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7f", x);
  return buf;
}

// 9 significant digits, used by the CSV writers.
inline std::string format_sig9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

inline double round_down_7(double x) { return std::floor(x * 1e7) * 1e-7; }
inline double round_up_7(double x) { return std::ceil(x * 1e7) * 1e-7; }

}  // namespace vn
