#pragma once

// Scalar minimization, damped Newton with analytic derivatives, adaptive
// Simpson quadrature, central finite differences, and small dense solves.
// Every routine is deterministic; systems here never exceed 11 x 11.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "vn/common.hpp"

namespace vn {

// ----------------------------------------------------------------------------
// Small dense linear algebra (row-major).

struct SquareMatrix {
  int n = 0;
  Vec a;  // n*n entries, row-major

  SquareMatrix() = default;
  explicit SquareMatrix(int dim) : n(dim), a(std::size_t(dim) * dim, 0.0) {}

  double& at(int i, int j) { return a[std::size_t(i) * n + j]; }
  double at(int i, int j) const { return a[std::size_t(i) * n + j]; }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

// Solves A y = b by LU with partial pivoting; returns nullopt when a pivot
// underflows relative to the matrix scale.
inline std::optional<Vec> lu_solve(SquareMatrix A, Vec b) {
  const int n = A.n;
  if (int(b.size()) != n) throw DomainError("lu_solve: dimension mismatch");
  double scale = 0.0;
  for (double v : A.a) scale = std::max(scale, std::fabs(v));
  const double tiny = std::max(scale, 1.0) * 1e-306;

  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(A.at(r, c)) > std::fabs(A.at(p, c))) p = r;
    if (std::fabs(A.at(p, c)) < tiny) return std::nullopt;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(A.at(p, j), A.at(c, j));
      std::swap(b[p], b[c]);
    }
    const double inv = 1.0 / A.at(c, c);
    for (int r = c + 1; r < n; ++r) {
      const double f = A.at(r, c) * inv;
      if (f == 0.0) continue;
      A.at(r, c) = 0.0;
      for (int j = c + 1; j < n; ++j) A.at(r, j) -= f * A.at(c, j);
      b[r] -= f * b[c];
    }
  }
  Vec y(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < n; ++j) s -= A.at(r, j) * y[j];
    y[r] = s / A.at(r, r);
  }
  return y;
}

// ----------------------------------------------------------------------------
// Golden-section minimization.

struct BracketResult {
  double x = 0.0;
  double value = 0.0;
  double bracket_width = 0.0;
};

// Minimizes a unimodal f over [lo, hi]. Ties shrink the right edge, so flat
// stretches resolve to the leftmost minimizer within tol.
template <class F>
BracketResult golden_section_min(F&& f, double lo, double hi, double tol = 1e-9) {
  if (!(lo < hi)) throw DomainError("golden_section_min: need lo < hi");
  if (!(tol > 0.0)) throw DomainError("golden_section_min: need tol > 0");
  const double invphi = 0.6180339887498949;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
  }
  BracketResult out;
  out.x = 0.5 * (lo + hi);
  out.value = f(out.x);
  out.bracket_width = hi - lo;
  return out;
}

template <class F>
BracketResult golden_section_max(F&& f, double lo, double hi, double tol = 1e-9) {
  auto neg = [&](double x) { return -f(x); };
  BracketResult r = golden_section_min(neg, lo, hi, tol);
  r.value = -r.value;
  return r;
}

// ----------------------------------------------------------------------------
// Damped Newton minimization.

struct NewtonConfig {
  double grad_tol = 1e-10;  // scaled by (1 + |f|)
  double grad_floor = 0.0;  // absolute floor for stiff penalized objectives
  int max_iters = 500;
  int max_halvings = 60;
  double initial_reg = 1e-8;  // Hessian shift, scaled by (1 + max |H_ii|)
};

enum class NewtonStatus { Converged, SmallStep, LineSearchFailed, MaxIters };

struct NewtonResult {
  Vec x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  NewtonStatus status = NewtonStatus::MaxIters;
  bool converged = false;
};

// fgh(x, grad, hess) returns the objective; grad/hess may be null for a
// value-only evaluation. Accepted steps never increase the objective; the
// Hessian shift grows tenfold until the solve yields a descent direction.
template <class FGH>
NewtonResult newton_minimize(FGH&& fgh, Vec x0, const NewtonConfig& cfg = {}) {
  const int n = int(x0.size());
  NewtonResult res;
  res.x = std::move(x0);
  Vec g(n);
  SquareMatrix h(n);
  double f = fgh(res.x, &g, &h);

  for (int it = 0; it < cfg.max_iters; ++it) {
    res.iters = it;
    res.value = f;
    res.grad_norm = norm2(g);
    if (res.grad_norm <= cfg.grad_tol * (1.0 + std::fabs(f)) + cfg.grad_floor) {
      res.status = NewtonStatus::Converged;
      res.converged = true;
      return res;
    }

    double maxdiag = 0.0;
    for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, std::fabs(h.at(i, i)));
    double reg = cfg.initial_reg * (1.0 + maxdiag);
    Vec step;
    bool descent = false;
    for (int attempt = 0; attempt < 24 && !descent; ++attempt) {
      SquareMatrix hs = h;
      for (int i = 0; i < n; ++i) hs.at(i, i) += (attempt == 0 ? 0.0 : reg);
      Vec rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = -g[i];
      auto sol = lu_solve(hs, rhs);
      if (sol && dot(*sol, g) < 0.0) {
        step = std::move(*sol);
        descent = true;
      } else {
        reg *= 10.0;
      }
    }
    if (!descent) {
      // Steepest descent as a last resort.
      step.assign(n, 0.0);
      for (int i = 0; i < n; ++i) step[i] = -g[i];
    }

    double t = 1.0;
    Vec xt(n);
    double ft = 0.0;
    bool accepted = false;
    for (int half = 0; half <= cfg.max_halvings; ++half) {
      for (int i = 0; i < n; ++i) xt[i] = res.x[i] + t * step[i];
      ft = fgh(xt, nullptr, nullptr);
      if (ft <= f) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.status = NewtonStatus::LineSearchFailed;
      res.converged = false;
      return res;
    }

    double step_norm = 0.0;
    for (int i = 0; i < n; ++i) step_norm += (xt[i] - res.x[i]) * (xt[i] - res.x[i]);
    step_norm = std::sqrt(step_norm);
    res.x = xt;
    f = fgh(res.x, &g, &h);
    if (step_norm <= 4e-15 * (1.0 + norm2(res.x))) {
      res.value = f;
      res.grad_norm = norm2(g);
      res.status = NewtonStatus::SmallStep;
      res.converged = true;
      res.iters = it + 1;
      return res;
    }
  }
  res.value = f;
  res.grad_norm = norm2(g);
  res.status = NewtonStatus::MaxIters;
  res.converged = false;
  res.iters = cfg.max_iters;
  return res;
}

// ----------------------------------------------------------------------------
// Adaptive Simpson quadrature.

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  if (depth > 40) throw MaxDepthExceeded("quadrature: recursion depth > 40");
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // The depth floor defeats accidental agreement on symmetric integrands
  // (e.g. an even function sampled at 0, pi, 2pi can match its own coarse
  // estimate exactly while both are wrong).
  if (depth >= 4 && std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

template <class F>
double quadrature(F&& f, double lo, double hi, double tol = 1e-12) {
  if (lo > hi) throw DomainError("quadrature: need lo <= hi");
  if (!(tol > 0.0)) throw DomainError("quadrature: need tol > 0");
  if (lo == hi) return 0.0;
  const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, lo, hi, fa, fm, fb, whole, tol, 0);
}

// ----------------------------------------------------------------------------
// Central finite differences (test/oracle use).

template <class F>
Vec finite_diff_gradient(F&& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double hi = h * (1.0 + std::fabs(x[i]));
    xp[i] = x[i] + hi;
    xm[i] = x[i] - hi;
    g[i] = (f(xp) - f(xm)) / (2.0 * hi);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

template <class F>
SquareMatrix finite_diff_hessian(F&& f, const Vec& x, double h = 1e-4) {
  const int n = int(x.size());
  SquareMatrix H(n);
  Vec xt = x;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double hi = h * (1.0 + std::fabs(x[i]));
      const double hj = h * (1.0 + std::fabs(x[j]));
      xt = x;
      xt[i] += hi;
      xt[j] += hj;
      const double fpp = f(xt);
      xt = x;
      xt[i] += hi;
      xt[j] -= hj;
      const double fpm = f(xt);
      xt = x;
      xt[i] -= hi;
      xt[j] += hj;
      const double fmp = f(xt);
      xt = x;
      xt[i] -= hi;
      xt[j] -= hj;
      const double fmm = f(xt);
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      H.at(i, j) = v;
      H.at(j, i) = v;
    }
  }
  return H;
}

}  // namespace vn
