#pragma once

// Lower-bound machinery for the ratio chi_n(a) / (sqrt(a) - 1)^2.
//
// A nonnegative weight m on [lo, hi] together with an evaluation angle phi0
// induces s(k) = cos(k phi0) + integral m(phi) cos(k phi) dphi. When
// s(k) <= 1 for all k >= 2, every admissible polynomial obeys
// chi_n(a) >= A a - B with A = 1 - s(1), B = s(0), so the line
// F(a) = (A a - B)/(sqrt(a) - 1)^2 bounds the ratio from below. Values of a
// where some line already exceeds a known upper bound for V_n can be cut
// from the search interval.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vn/common.hpp"
#include "vn/numerics.hpp"
#include "vn/trigpoly.hpp"

namespace vn {

struct BoundLine {
  double A = 0.0;
  double B = 0.0;

  // F(a) = (A a - B) / (sqrt(a) - 1)^2 for a > 1.
  double eval(double a) const {
    if (!(a > 1.0)) throw DomainError("BoundLine::eval: need a > 1");
    const double d = std::sqrt(a) - 1.0;
    return (A * a - B) / (d * d);
  }

  // Interior critical point (B/A)^2, present only when it lies right of 1;
  // the line increases before it and decreases after.
  std::optional<double> stationary() const {
    if (!(A > 0.0)) return std::nullopt;
    const double s = (B / A) * (B / A);
    if (s > 1.0) return s;
    return std::nullopt;
  }

  // Peak value A*B/(B-A) at the stationary point.
  double peak_value() const { return A * B / (B - A); }
};

// The three certified lines used for interval restriction. The first comes
// from the trivial functional (m = 0 at phi0 = pi); the other two from the
// weight functionals below, whose typeset constants verify_functional
// revalidates by quadrature at startup.
inline std::array<BoundLine, 3> bound_lines() {
  return {BoundLine{2.0, 1.0}, BoundLine{5.8726781, 6.8726781},
          BoundLine{16.5, 25.8011608}};
}

struct WeightFunctional {
  std::string label;
  double phi0 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::function<double(double)> m;
};

// Evaluation functional m = 0 concentrated at phi0 = pi; yields the line (2, 1).
inline WeightFunctional trivial_functional() {
  return {"point-evaluation", M_PI, 0.5 * M_PI, M_PI, [](double) { return 0.0; }};
}

// The two nontrivial functionals behind the certified lines: a cosine
// combination on the upper half-range and a linear ramp from pi/3.
inline std::array<WeightFunctional, 2> classic_functionals() {
  WeightFunctional f1{
      "cosine-weight", M_PI, 0.5 * M_PI, M_PI, [](double phi) {
        return 3.7386644 - 1.4700922 * std::cos(4.0 * phi) - 2.2685722 * std::cos(8.0 * phi);
      }};
  WeightFunctional f2{
      "linear-weight", 2.0 * M_PI / 3.0, M_PI / 3.0, M_PI, [](double phi) {
        return 2.0 * std::sqrt(3.0) + 8.0 * (phi - M_PI / 3.0);
      }};
  return {f1, f2};
}

// s(k) = cos(k phi0) + integral_{lo}^{hi} m(phi) cos(k phi) dphi.
inline double functional_s(const WeightFunctional& fn, int k, double tol = 1e-12) {
  if (k < 0) throw DomainError("functional_s: need k >= 0");
  const double integral =
      quadrature([&](double phi) { return fn.m(phi) * std::cos(double(k) * phi); },
                 fn.lo, fn.hi, tol);
  return std::cos(double(k) * fn.phi0) + integral;
}

struct FunctionalReport {
  bool ok = false;
  BoundLine line;            // (1 - s(1), s(0)) as implied by the quadrature
  std::vector<double> s;     // s(0) .. s(n)
  double min_weight = 0.0;   // grid minimum of m over [lo, hi]
};

// Revalidates a functional for degree n: the weight must be nonnegative on
// its support and s(k) <= 1 + 1e-5 for 2 <= k <= n (the typeset weights are
// rounded to 7 decimals, which pushes some s(k) a few 1e-6 above 1).
inline FunctionalReport verify_functional(const WeightFunctional& fn, int n) {
  if (n < 2) throw DomainError("verify_functional: need n >= 2");
  FunctionalReport rep;
  rep.s.resize(std::size_t(n) + 1);
  for (int k = 0; k <= n; ++k) rep.s[k] = functional_s(fn, k);
  rep.line = BoundLine{1.0 - rep.s[1], rep.s[0]};

  constexpr int kGrid = 2001;
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i)
    mn = std::min(mn, fn.m(fn.lo + (fn.hi - fn.lo) * double(i) / kGrid));
  rep.min_weight = mn;

  bool s_ok = true;
  for (int k = 2; k <= n; ++k)
    if (!(rep.s[k] <= 1.0 + 1e-5)) s_ok = false;
  rep.ok = s_ok && mn >= -1e-9;
  return rep;
}

struct RestrictedInterval {
  double lo = 0.0;       // published endpoints (7th-decimal outward rounding)
  double hi = 0.0;
  double raw_lo = 0.0;   // bisection roots before rounding
  double raw_hi = 0.0;
  bool restricted = false;
};

namespace detail {

// Bisection on a monotone piece; the bracket must straddle the target.
template <class F>
double bisect_to(F&& f, double x0, double x1, double target, double tol = 1e-9) {
  double f0 = f(x0) - target;
  double f1 = f(x1) - target;
  if (f0 == 0.0) return x0;
  if (f1 == 0.0) return x1;
  if ((f0 > 0.0) == (f1 > 0.0)) throw DomainError("bisect_to: bracket does not straddle");
  while (x1 - x0 > tol) {
    const double xm = 0.5 * (x0 + x1);
    const double fm = f(xm) - target;
    if (fm == 0.0) return xm;
    if ((fm > 0.0) == (f0 > 0.0)) {
      x0 = xm;
      f0 = fm;
    } else {
      x1 = xm;
    }
  }
  return 0.5 * (x0 + x1);
}

}  // namespace detail

// Cuts from (1, fejer_bound(n)] every a where some certified line exceeds
// v_upper. Endpoints are rounded outward at the 7th decimal so the published
// interval never loses the true minimizer. Returns (1 + 1e-9, fejer_bound(n))
// unrestricted when every line stays below v_upper.
inline RestrictedInterval restrict_interval(int n, double v_upper) {
  if (n < 4 || n > 8) throw DomainError("restrict_interval: need 4 <= n <= 8");
  if (!(v_upper > 0.0)) throw DomainError("restrict_interval: need v_upper > 0");
  const double cap = fejer_bound(n);
  const double eps = 1e-9;
  const double left = 1.0 + eps;

  std::vector<double> lo_roots;
  std::vector<double> hi_roots;

  for (const BoundLine& L : bound_lines()) {
    const auto sx = L.stationary();
    if (!sx) {
      // Monotone decreasing on (1, inf); diverges at the left edge.
      if (L.eval(cap) > v_upper) throw Infeasible("restrict_interval: empty interval");
      if (L.eval(left) > v_upper)
        lo_roots.push_back(detail::bisect_to([&](double a) { return L.eval(a); },
                                             left, cap, v_upper));
      continue;
    }
    if (*sx <= cap) {
      // Full peak inside the admissible range.
      if (L.peak_value() > v_upper) {
        // Decreasing branch: expand until the line falls back below v_upper.
        double span = std::max(1.0, *sx);
        while (L.eval(*sx + span) > v_upper) span *= 2.0;
        const double r = detail::bisect_to([&](double a) { return L.eval(a); },
                                           *sx, *sx + span, v_upper);
        if (r <= cap) {
          lo_roots.push_back(r);
        } else if (L.eval(left) < v_upper) {
          hi_roots.push_back(detail::bisect_to([&](double a) { return L.eval(a); },
                                               left, *sx, v_upper));
        } else {
          throw Infeasible("restrict_interval: empty interval");
        }
      }
    } else {
      // Only the increasing branch intersects (1, cap].
      if (L.eval(cap) > v_upper) {
        if (L.eval(left) >= v_upper) throw Infeasible("restrict_interval: empty interval");
        hi_roots.push_back(detail::bisect_to([&](double a) { return L.eval(a); },
                                             left, cap, v_upper));
      }
    }
  }

  RestrictedInterval out;
  out.restricted = !lo_roots.empty() || !hi_roots.empty();
  out.raw_lo = left;
  for (double r : lo_roots) out.raw_lo = std::max(out.raw_lo, r);
  out.raw_hi = cap;
  for (double r : hi_roots) out.raw_hi = std::min(out.raw_hi, r);
  if (!(out.raw_lo < out.raw_hi)) throw Infeasible("restrict_interval: empty interval");

  // Structural guard: the kept interval must be free of further excursions
  // (exclusions of different lines could in principle leave holes).
  for (int i = 0; i <= 512; ++i) {
    const double a = out.raw_lo + (out.raw_hi - out.raw_lo) * double(i) / 512.0;
    for (const BoundLine& L : bound_lines())
      if (L.eval(a) > v_upper + 1e-4)
        throw std::runtime_error("restrict_interval: allowed set is disconnected");
  }

  out.lo = lo_roots.empty() ? out.raw_lo : std::max(1.0 + eps, round_down_7(out.raw_lo));
  out.hi = hi_roots.empty() ? cap : std::min(cap, round_up_7(out.raw_hi));
  return out;
}

}  // namespace vn
