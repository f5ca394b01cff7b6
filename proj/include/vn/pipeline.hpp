#pragma once

// Orchestration of the constant computation. The two lowest degrees go
// through their closed-form parametrizations; every higher degree runs the
// full chain: re-verify the bound-line functionals, restrict the a-interval
// using the previous constant as upper bound, sweep a uniform a-grid of
// reduced-problem solves, refine the best certified grid point by golden
// section, and certify the final witness against the complete constraint set.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vn/bounds.hpp"
#include "vn/common.hpp"
#include "vn/kkt.hpp"
#include "vn/lowdegree.hpp"
#include "vn/trigpoly.hpp"

namespace vn {

struct SolverConfig {
  int grid_points = 2001;
  int random_starts = 6;
  std::uint64_t seed = 42;
  // jobs > 1 solves grid points in parallel and disables warm starts, so the
  // records are identical for any worker count; jobs == 1 warm-starts each
  // point from its left neighbour.
  int jobs = 1;
  // Restrict the sweep interval with the published constants instead of the
  // computed chain.
  bool strict_published_bounds = false;
  Vec schedule = default_penalty_schedule();
  double refine_tol = 1e-8;  // golden-section tolerance on a
};

struct SweepRecord {
  double a = 0.0;
  double chi = std::numeric_limits<double>::infinity();
  double ratio = std::numeric_limits<double>::infinity();  // chi / (sqrt(a)-1)^2
  int subproblem_id = 0;  // winning active set; 0 for gap records
  bool certified = false;
  SolveOutcome outcome;                           // winning subproblem
  std::vector<SolveOutcome> subproblem_outcomes;  // all active sets, id order
};

// Published values of the constants, used as upper-bound seeds in strict
// mode and by standalone sweeps that should not recompute the whole chain.
inline double published_vn(int n) {
  switch (n) {
    case 2: return 53.1390720;
    case 3: return 36.9199911;
    case 4: return 34.8992259;
    case 5: return 34.8992259;
    case 6: return 34.8992259;
    case 7: return 34.6494874;
    case 8: return 34.5399155;
    default: throw DomainError("published_vn: tabulated for 2 <= n <= 8");
  }
}

inline double ratio_from_chi(double chi, double a) {
  const double d = std::sqrt(a) - 1.0;
  return chi / (d * d);
}

// Sweep interval for a standalone run of degree n, restricted by the
// published value of the previous constant.
inline RestrictedInterval published_interval(int n) {
  return restrict_interval(n, published_vn(n - 1));
}

// Uniform a-grid of reduced-problem solves over [a_lo, a_hi]. Every grid
// point yields a record; a point where no subproblem certifies (the exact
// Fejer bound, where the feasible set collapses to a single ray and no
// finite multipliers exist) stays in the output as a gap record with an
// infinite ratio.
inline std::vector<SweepRecord> sweep(int n, double a_lo, double a_hi,
                                      const SolverConfig& cfg = {}) {
  if (cfg.grid_points < 2) throw DomainError("sweep: need grid_points >= 2");
  if (!(a_lo > 1.0) || !(a_lo < a_hi) || !(a_hi <= fejer_bound(n) + 1e-12))
    throw DomainError("sweep: interval outside (1, fejer_bound(n)]");

  const int m = cfg.grid_points;
  std::vector<SweepRecord> records(static_cast<std::size_t>(m));

  auto solve_point = [&](int i, const std::map<int, Vec>* warm) {
    SweepRecord rec;
    rec.a = a_lo + (a_hi - a_lo) * double(i) / double(m - 1);
    ChiOptions co;
    co.schedule = cfg.schedule;
    co.random_starts = cfg.random_starts;
    co.seed = mix_seed(cfg.seed, std::uint64_t(i));
    if (warm) co.warm_starts = *warm;
    try {
      ChiResult r = chi_reduced(n, rec.a, co);
      rec.chi = r.chi;
      rec.ratio = ratio_from_chi(r.chi, rec.a);
      rec.subproblem_id = r.best.subproblem_id;
      rec.certified = certify_full(n, rec.a, r.best.x).ok;
      rec.outcome = r.best;
      rec.subproblem_outcomes = std::move(r.subproblems);
    } catch (const Infeasible&) {
      // gap record
    }
    return rec;
  };

  if (cfg.jobs <= 1) {
    std::map<int, Vec> warm;
    for (int i = 0; i < m; ++i) {
      records[std::size_t(i)] = solve_point(i, &warm);
      for (const SolveOutcome& out : records[std::size_t(i)].subproblem_outcomes)
        if (out.converged) warm[out.subproblem_id] = out.x;
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(cfg.jobs, m);
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < m; i = next.fetch_add(1))
          records[std::size_t(i)] = solve_point(i, nullptr);
      });
    for (std::thread& t : pool) t.join();
  }
  return records;
}

struct RefineResult {
  double a_star = 0.0;
  double ratio_star = std::numeric_limits<double>::infinity();
};

// Golden-section refinement of a -> ratio around the best certified grid
// point, bracketed by +-bracket_halfwidth clipped to the swept range. Grid
// ties break to the left, and the grid best caps the result, so a flat
// bracket cannot come back worse than the record it started from.
inline RefineResult refine(int n, const std::vector<SweepRecord>& records,
                           double bracket_halfwidth,
                           const SolverConfig& cfg = {}) {
  if (records.empty()) throw DomainError("refine: empty record list");
  if (!(bracket_halfwidth > 0.0))
    throw DomainError("refine: need positive bracket halfwidth");
  const SweepRecord* best = nullptr;
  for (const SweepRecord& r : records)
    if (r.certified && (!best || r.ratio < best->ratio)) best = &r;
  if (!best) throw Infeasible("refine: no certified record to refine around");

  const double lo = std::max(records.front().a, best->a - bracket_halfwidth);
  const double hi = std::min(records.back().a, best->a + bracket_halfwidth);

  ChiOptions co;
  co.schedule = cfg.schedule;
  co.random_starts = cfg.random_starts;
  co.seed = cfg.seed;
  co.warm_starts[best->outcome.subproblem_id] = best->outcome.x;

  RefineResult out{best->a, best->ratio};
  if (lo < hi) {
    BracketResult g = golden_section_min(
        [&](double a) { return ratio_from_chi(chi_reduced(n, a, co).chi, a); },
        lo, hi, cfg.refine_tol);
    if (g.value < out.ratio_star) {
      out.a_star = g.x;
      out.ratio_star = g.value;
    }
  }
  return out;
}

struct VnResult {
  int n = 0;
  // Search range: the alpha-parameter range for n = 2, 3 and the restricted
  // a-interval for n >= 4; a_star is the optimizer within it.
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  double v_value = std::numeric_limits<double>::infinity();
  double a_star = 0.0;
  CosinePolynomial witness;
  Vec witness_factor;  // empty for n = 2, 3: the closed forms need none
  CertifyReport certificate;
  bool certified = false;
  int grid_points = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  // Lower envelope over grid points that solved but failed certification;
  // +inf when every solved point certified. Uncertified values only lower-
  // bound the true curve, so they never enter the argmin.
  double uncertified_min_ratio = std::numeric_limits<double>::infinity();
};

struct CertificationFailed : std::runtime_error {
  VnResult partial;
  CertificationFailed(const std::string& what, VnResult r)
      : std::runtime_error(what), partial(std::move(r)) {}
};

class Pipeline {
 public:
  explicit Pipeline(SolverConfig cfg = SolverConfig{}) : cfg_(std::move(cfg)) {}

  const SolverConfig& config() const { return cfg_; }

  // Memoized: computing a constant caches every earlier one it needed for
  // its upper-bound seed.
  const VnResult& compute_vn(int n) {
    if (n < 2 || n > 8)
      throw DomainError("compute_vn: supported degrees are 2..8");
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    VnResult r = n <= 3 ? closed_form(n) : reduced(n);
    return cache_.emplace(n, std::move(r)).first->second;
  }

 private:
  static double secs_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

  VnResult closed_form(int n) {
    const auto t0 = std::chrono::steady_clock::now();
    const LowDegreeResult ld = n == 2 ? compute_v2() : compute_v3();
    VnResult out;
    out.n = n;
    out.interval_lo = ld.alpha_range.first;
    out.interval_hi = ld.alpha_range.second;
    out.v_value = ld.v_value;
    out.a_star = ld.alpha_star;
    out.witness = ld.witness;
    // The reduced-problem certificate (a_0 = 1, a_1 = a from a spectral
    // factor) does not apply to the closed forms; record class membership.
    out.certificate.ok = ld.certificate.in_class;
    out.certificate.polynomial = ld.witness;
    out.certificate.membership = ld.certificate;
    out.certificate.min_coefficient =
        *std::min_element(ld.witness.coeffs.begin(), ld.witness.coeffs.end());
    out.certified = ld.certificate.in_class;
    out.grid_points = 10001;  // resolution of the closed-form scan
    out.seed = cfg_.seed;
    out.runtime_seconds = secs_since(t0);
    if (!out.certified)
      throw CertificationFailed("compute_vn: closed-form witness failed class membership",
                                out);
    return out;
  }

  VnResult reduced(int n) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const WeightFunctional& fn : classic_functionals())
      if (!verify_functional(fn, n).ok)
        throw std::runtime_error(
            "compute_vn: a bound-line functional failed re-verification");
    const double v_upper = cfg_.strict_published_bounds ? published_vn(n - 1)
                                                    : compute_vn(n - 1).v_value;
    const RestrictedInterval iv = restrict_interval(n, v_upper);
    const std::vector<SweepRecord> recs = sweep(n, iv.lo, iv.hi, cfg_);
    const double step = (iv.hi - iv.lo) / double(cfg_.grid_points - 1);
    const RefineResult rf = refine(n, recs, step, cfg_);

    const SweepRecord* gbest = nullptr;
    for (const SweepRecord& r : recs)
      if (r.certified && (!gbest || r.ratio < gbest->ratio)) gbest = &r;
    // refine() already threw if nothing certified, so gbest is non-null.

    ChiOptions co;
    co.schedule = cfg_.schedule;
    co.random_starts = cfg_.random_starts;
    co.seed = cfg_.seed;
    co.warm_starts[gbest->outcome.subproblem_id] = gbest->outcome.x;
    const ChiResult fin = chi_reduced(n, rf.a_star, co);
    const CertifyReport cert = certify_full(n, rf.a_star, fin.best.x);

    VnResult out;
    out.n = n;
    out.interval_lo = iv.lo;
    out.interval_hi = iv.hi;
    out.v_value = ratio_from_chi(fin.chi, rf.a_star);
    out.a_star = rf.a_star;
    out.witness = cert.polynomial;
    out.witness_factor = fin.best.x;
    out.certificate = cert;
    out.certified = cert.ok && fin.best.converged;
    out.grid_points = cfg_.grid_points;
    out.seed = cfg_.seed;
    for (const SweepRecord& r : recs)
      if (!r.certified && r.ratio < out.uncertified_min_ratio)
        out.uncertified_min_ratio = r.ratio;
    out.runtime_seconds = secs_since(t0);
    if (!out.certified)
      throw CertificationFailed("compute_vn: final witness failed certification at a = " +
                                    format_fixed7(rf.a_star),
                                out);
    return out;
  }

  SolverConfig cfg_;
  std::map<int, VnResult> cache_;
};

}  // namespace vn
