#pragma once

// Cosine polynomials f(phi) = sum_k a_k cos(k phi), their spectral (Fejer-
// Riesz) factors, the admissible class used for zero-free regions, and the
// objective functional v(f) = (f(0) - a0) / (sqrt(a1) - sqrt(a0))^2.
//
// The admissible class of degree n requires
//   A1: a_k >= 0 for all k,
//   A2: a_1 > a_0 > 0,
//   A3: f(phi) >= 0 for all phi.

#include <cmath>
#include <string>
#include <vector>

#include "vn/common.hpp"
#include "vn/numerics.hpp"

namespace vn {

struct CosinePolynomial {
  Vec coeffs;  // a_0 .. a_n

  int degree() const { return int(coeffs.size()) - 1; }

  double eval(double phi) const {
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * std::cos(double(k) * phi);
    return s;
  }

  double value_at_zero() const { return sum(coeffs); }
};

// Coefficient vector of a spectral factor: f(phi) = |sum_k x_k e^{i k phi}|^2.
struct SpectralFactor {
  Vec x;

  int degree() const { return int(x.size()) - 1; }
};

// Expands |sum x_k e^{ikphi}|^2: a_0 = sum x_k^2, a_j = 2 sum_k x_k x_{k+j}.
// Any polynomial produced this way is nonnegative on the whole circle.
inline CosinePolynomial from_spectral_factor(const SpectralFactor& s) {
  if (s.x.empty()) throw DomainError("from_spectral_factor: empty factor");
  const int n = s.degree();
  CosinePolynomial p;
  p.coeffs.assign(std::size_t(n) + 1, 0.0);
  for (int k = 0; k <= n; ++k) p.coeffs[0] += s.x[k] * s.x[k];
  for (int j = 1; j <= n; ++j) {
    double c = 0.0;
    for (int k = 0; k + j <= n; ++k) c += s.x[k] * s.x[k + j];
    p.coeffs[j] = 2.0 * c;
  }
  return p;
}

// Largest admissible a1/a0 ratio at degree n: 2 cos(pi / (n + 2)).
inline double fejer_bound(int n) {
  if (n < 1) throw DomainError("fejer_bound: need n >= 1");
  return 2.0 * std::cos(M_PI / double(n + 2));
}

// v(f) = (f(0) - a0) / (sqrt(a1) - sqrt(a0))^2; requires a1 > a0 > 0.
inline double v_functional(const CosinePolynomial& p) {
  if (p.coeffs.size() < 2) throw DomainError("v_functional: need degree >= 1");
  const double a0 = p.coeffs[0], a1 = p.coeffs[1];
  if (!(a1 > a0 && a0 > 0.0)) throw DomainError("v_functional: need a1 > a0 > 0");
  const double d = std::sqrt(a1) - std::sqrt(a0);
  return (p.value_at_zero() - a0) / (d * d);
}

enum class ViolationKind { A1NegativeCoefficient, A2OrderViolation, A3NegativeValue };

inline const char* violation_tag(ViolationKind k) {
  switch (k) {
    case ViolationKind::A1NegativeCoefficient: return "A1-negative-coefficient";
    case ViolationKind::A2OrderViolation: return "A2-order-violation";
    case ViolationKind::A3NegativeValue: return "A3-negative-value";
  }
  return "unknown";
}

struct MembershipReport {
  bool in_class = false;
  std::vector<ViolationKind> violations;
  double min_value = 0.0;     // global minimum of f over the circle
  double min_location = 0.0;  // phi attaining it
};

// Checks A1-A3. The pointwise check samples 4096 grid points on [0, 2pi) and
// refines every local grid minimum by golden section before comparing the
// global minimum against -tol.
inline MembershipReport membership_c_n(const CosinePolynomial& p, double tol = 1e-9) {
  if (p.coeffs.empty()) throw DomainError("membership_c_n: empty polynomial");
  if (!(tol >= 0.0)) throw DomainError("membership_c_n: need tol >= 0");
  MembershipReport rep;

  bool a1_ok = true;
  for (double c : p.coeffs)
    if (!(c >= -tol)) a1_ok = false;
  if (!a1_ok) rep.violations.push_back(ViolationKind::A1NegativeCoefficient);

  const bool a2_ok = p.coeffs.size() >= 2 && p.coeffs[1] > p.coeffs[0] && p.coeffs[0] > 0.0;
  if (!a2_ok) rep.violations.push_back(ViolationKind::A2OrderViolation);

  constexpr int kGrid = 4096;
  const double step = 2.0 * M_PI / kGrid;
  Vec vals(kGrid);
  for (int i = 0; i < kGrid; ++i) vals[i] = p.eval(i * step);

  double best = vals[0];
  double best_phi = 0.0;
  auto f = [&](double phi) { return p.eval(phi); };
  for (int i = 0; i < kGrid; ++i) {
    const double prev = vals[(i + kGrid - 1) % kGrid];
    const double next = vals[(i + 1) % kGrid];
    if (vals[i] <= prev && vals[i] <= next) {
      BracketResult r = golden_section_min(f, (i - 1) * step, (i + 1) * step, 1e-12);
      if (r.value < best) {
        best = r.value;
        best_phi = r.x;
      }
    }
    if (vals[i] < best) {
      best = vals[i];
      best_phi = i * step;
    }
  }
  if (best_phi < 0.0) best_phi += 2.0 * M_PI;
  rep.min_value = best;
  rep.min_location = best_phi;
  const bool a3_ok = best >= -tol;
  if (!a3_ok) rep.violations.push_back(ViolationKind::A3NegativeValue);

  rep.in_class = a1_ok && a2_ok && a3_ok;
  return rep;
}

}  // namespace vn
