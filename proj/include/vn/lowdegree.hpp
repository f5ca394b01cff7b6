#pragma once

// Closed forms for the degree-2 and degree-3 extremal problems. Both reduce
// to one-parameter families built from squared cosine factors:
//   degree 2:  f = (cos phi + alpha)^2,            alpha in (1 - 1/sqrt2, 1]
//   degree 3:  f = 4 (cos phi + alpha)^2 (cos phi + 1), alpha in (-1/4, 1]
// together with the lower-bound ratio used to pin the degree-2 constant.

#include <cmath>
#include <utility>

#include "vn/common.hpp"
#include "vn/numerics.hpp"
#include "vn/trigpoly.hpp"

namespace vn {

inline constexpr double kAlphaEdge2 = 0.29289321881345248;  // 1 - 1/sqrt(2)

// v evaluated on (cos phi + alpha)^2: (1/2 + 2 alpha)/(sqrt(2 alpha) - sqrt(alpha^2 + 1/2))^2.
// Admissible for 1 - 1/sqrt2 < alpha < 1; the right edge evaluates as a limit point.
inline double v2_objective(double alpha) {
  if (!(alpha > kAlphaEdge2) || alpha > 1.0)
    throw DomainError("v2_objective: alpha outside (1 - 1/sqrt2, 1]");
  const double d = std::sqrt(2.0 * alpha) - std::sqrt(alpha * alpha + 0.5);
  return (0.5 + 2.0 * alpha) / (d * d);
}

// Coefficients of (cos phi + alpha)^2.
inline CosinePolynomial v2_witness(double alpha) {
  return CosinePolynomial{Vec{alpha * alpha + 0.5, 2.0 * alpha, 0.5}};
}

// v on 4 (cos phi + alpha)^2 (cos phi + 1) with coefficients
// (4a^2+4a+2, 4a^2+8a+3, 4a+2, 1); admissible for -1/4 < alpha <= 1.
inline double v3_objective(double alpha) {
  if (!(alpha > -0.25) || alpha > 1.0)
    throw DomainError("v3_objective: alpha outside (-1/4, 1]");
  const double a0 = 4.0 * alpha * alpha + 4.0 * alpha + 2.0;
  const double a1 = 4.0 * alpha * alpha + 8.0 * alpha + 3.0;
  const double d = std::sqrt(a1) - std::sqrt(a0);
  return (4.0 * alpha * alpha + 12.0 * alpha + 6.0) / (d * d);
}

inline CosinePolynomial v3_witness(double alpha) {
  return CosinePolynomial{Vec{4.0 * alpha * alpha + 4.0 * alpha + 2.0,
                              4.0 * alpha * alpha + 8.0 * alpha + 3.0,
                              4.0 * alpha + 2.0, 1.0}};
}

// Membership of (cos phi + alpha)^2 (cos phi + beta) scalings in the degree-3
// class: always for alpha >= 1 - 1/sqrt2; for -1/4 < alpha < 1 - 1/sqrt2 only
// while beta < 1 + (4 alpha + 1)/(4 alpha^2 - 8 alpha + 2).
inline bool c3_membership(double alpha, double beta) {
  if (alpha >= kAlphaEdge2) return true;
  if (alpha > -0.25) {
    const double den = 4.0 * alpha * alpha - 8.0 * alpha + 2.0;
    return beta < 1.0 + (4.0 * alpha + 1.0) / den;
  }
  return false;
}

// Lower envelope for the degree-2 ratio: (8a+2)/(sqrt(8a) - sqrt(4a^2+2))^2 on
// [1 - 1/sqrt2, 1]. The difference-of-square-roots form keeps the denominator
// nonnegative where the expanded form would cancel catastrophically; the left
// endpoint diverges to +inf.
inline double delta_ratio_lower(double alpha) {
  if (alpha < kAlphaEdge2 || alpha > 1.0)
    throw DomainError("delta_ratio_lower: alpha outside [1 - 1/sqrt2, 1]");
  const double d = std::sqrt(8.0 * alpha) - std::sqrt(4.0 * alpha * alpha + 2.0);
  const double dd = d * d;
  if (dd == 0.0) return std::numeric_limits<double>::infinity();
  return (8.0 * alpha + 2.0) / dd;
}

struct LowDegreeResult {
  double alpha_star = 0.0;
  double v_value = 0.0;
  CosinePolynomial witness;
  MembershipReport certificate;
  std::pair<double, double> alpha_range{0.0, 0.0};
};

namespace detail {

// Scan + golden section: the scan pins the global basin, the refinement
// errors out if it disagrees with the scan by more than 10 grid values.
template <class F>
BracketResult scan_then_golden(F&& f, double lo, double hi, double tol, bool maximize) {
  constexpr int kScan = 10000;
  int best_i = 0;
  double best_v = maximize ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * double(i) / kScan;
    const double v = f(x);
    if ((maximize && v > best_v) || (!maximize && v < best_v)) {
      best_v = v;
      best_i = i;
    }
  }
  const double step = (hi - lo) / kScan;
  const double blo = std::max(lo, lo + step * (best_i - 1));
  const double bhi = std::min(hi, lo + step * (best_i + 1));
  BracketResult r = maximize ? golden_section_max(f, blo, bhi, tol)
                             : golden_section_min(f, blo, bhi, tol);
  const double worse = maximize ? best_v - r.value : r.value - best_v;
  if (worse > 10.0 * tol * (1.0 + std::fabs(best_v)))
    throw std::runtime_error("scan_then_golden: refinement left the scanned basin");
  // Closed right edges can carry the extremum; golden section never lands
  // exactly on an endpoint, so compare explicitly.
  const double edge = f(hi);
  if ((maximize && edge > r.value) || (!maximize && edge < r.value)) {
    r.x = hi;
    r.value = edge;
  }
  return r;
}

}  // namespace detail

inline LowDegreeResult compute_v2(double tol = 1e-9) {
  const double lo = kAlphaEdge2 + 1e-12, hi = 1.0 - 1e-12;
  BracketResult r = detail::scan_then_golden([](double a) { return v2_objective(a); },
                                             lo, hi, tol, /*maximize=*/false);
  LowDegreeResult out;
  out.alpha_star = r.x;
  out.v_value = r.value;
  out.witness = v2_witness(r.x);
  out.certificate = membership_c_n(out.witness, 1e-9);
  out.alpha_range = {kAlphaEdge2, 1.0};
  return out;
}

inline LowDegreeResult compute_v3(double tol = 1e-9) {
  const double lo = -0.25 + 1e-12, hi = 1.0;
  BracketResult r = detail::scan_then_golden([](double a) { return v3_objective(a); },
                                             lo, hi, tol, /*maximize=*/false);
  LowDegreeResult out;
  out.alpha_star = r.x;
  out.v_value = r.value;
  out.witness = v3_witness(r.x);
  out.certificate = membership_c_n(out.witness, 1e-9);
  out.alpha_range = {-0.25, 1.0};
  return out;
}

// Maximum of the degree-3 objective over the unconditionally admissible
// range [1 - 1/sqrt2, 1] (below that edge membership depends on the linear
// factor, and the objective diverges toward alpha = -1/4). Attained at the
// closed right edge alpha = 1 with value 22 + 44 sqrt(6) / 5.
inline BracketResult maximize_v3(double tol = 1e-9) {
  return detail::scan_then_golden([](double a) { return v3_objective(a); },
                                  kAlphaEdge2, 1.0, tol, /*maximize=*/true);
}

// Minimum of the lower envelope; this equals the degree-2 constant.
inline BracketResult minimize_delta_ratio_lower(double tol = 1e-9) {
  return detail::scan_then_golden([](double a) { return delta_ratio_lower(a); },
                                  kAlphaEdge2 + 1e-12, 1.0, tol, /*maximize=*/false);
}

}  // namespace vn
