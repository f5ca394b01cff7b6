#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "vn/kkt.hpp"

using namespace vn;

namespace {

Vec random_point(Rng& rng, int dim) {
  Vec x(dim);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

constexpr double kAStar46 = 1.7051159;  // shared argmin for degrees 4..6

}  // namespace

TEST_CASE("kept constraint sets", "[kkt]") {
  REQUIRE(kept_constraints(4).empty());
  REQUIRE(kept_constraints(5) == std::vector<int>{5});
  REQUIRE(kept_constraints(6) == std::vector<int>{5, 6});
  REQUIRE(kept_constraints(7) == std::vector<int>{5, 6});
  REQUIRE(kept_constraints(8) == std::vector<int>{5, 6});
  REQUIRE_THROWS_AS(kept_constraints(3), DomainError);
  REQUIRE_THROWS_AS(kept_constraints(9), DomainError);
}

TEST_CASE("penalty objective closed form at the origin", "[kkt][penalty]") {
  // At x = 0 every coefficient vanishes, so Phi = -1 + mu (1 + a^2).
  const ReducedProblem pb(6, 1.75);
  for (double mu : {1e2, 1e5}) {
    PenaltyObjective phi{&pb, {5, 6}, mu};
    const Vec zero(pb.dim(), 0.0);
    REQUIRE(phi(zero, nullptr, nullptr) ==
            Catch::Approx(-1.0 + mu * (1.0 + 1.75 * 1.75)).epsilon(1e-14));
    REQUIRE(phi.alpha(zero) == Catch::Approx(1.0 + 1.75 * 1.75).epsilon(1e-14));
  }
}

TEST_CASE("penalty derivatives match finite differences", "[kkt][penalty]") {
  Rng rng(20240817);
  for (int n = 4; n <= 8; ++n) {
    const ReducedProblem pb(n, 1.7);
    std::vector<int> act = kept_constraints(n);
    PenaltyObjective phi{&pb, act, 1e3};
    auto value_only = [&](const Vec& x) { return phi(x, nullptr, nullptr); };
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = random_point(rng, pb.dim());
      Vec g;
      SquareMatrix h;
      const double f = phi(x, &g, &h);
      REQUIRE(std::isfinite(f));
      const Vec gfd = finite_diff_gradient(value_only, x);
      for (int i = 0; i < pb.dim(); ++i)
        REQUIRE(g[i] == Catch::Approx(gfd[i]).epsilon(1e-5).margin(1e-4));
      const SquareMatrix hfd = finite_diff_hessian(value_only, x);
      for (int i = 0; i < pb.dim(); ++i)
        for (int j = 0; j < pb.dim(); ++j)
          REQUIRE(h.at(i, j) ==
                  Catch::Approx(hfd.at(i, j)).epsilon(1e-5).margin(1e-3));
    }
  }
}

TEST_CASE("coefficient helpers agree with the spectral expansion", "[kkt]") {
  Rng rng(7);
  const ReducedProblem pb(7, 1.7);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec x = random_point(rng, pb.dim());
    const CosinePolynomial p = from_spectral_factor(SpectralFactor{x});
    REQUIRE(pb.H1(x) == Catch::Approx(p.coeffs[0]).epsilon(1e-12));
    for (int m = 1; m <= 7; ++m)
      REQUIRE(pb.coeff(x, m) == Catch::Approx(p.coeffs[m]).margin(1e-12));
    const double s = sum(x);
    REQUIRE(pb.F(x) == Catch::Approx(s * s - 1.0).margin(1e-12));
  }
}

TEST_CASE("canonical factor representative", "[kkt]") {
  const Vec x{0.2, 0.5, 0.6, 0.5, 0.1};
  const Vec r(x.rbegin(), x.rend());
  Vec neg(x);
  for (double& v : neg) v = -v;
  REQUIRE(canonicalize_factor(x) == x);      // already canonical
  REQUIRE(canonicalize_factor(r) == x);      // reversal collapses
  REQUIRE(canonicalize_factor(neg) == x);    // sign flip collapses
  Vec negr(r);
  for (double& v : negr) v = -v;
  REQUIRE(canonicalize_factor(negr) == x);
  // Idempotent on its own output.
  REQUIRE(canonicalize_factor(canonicalize_factor(neg)) == x);
  REQUIRE(sum(canonicalize_factor(neg)) > 0.0);
}

TEST_CASE("unconstrained subproblem at the shared argmin", "[kkt][solve]") {
  const ReducedProblem pb(4, kAStar46);
  const SolveOutcome out = solve_subproblem(pb, {});
  REQUIRE(out.converged);
  REQUIRE(out.subproblem_id == 1);
  REQUIRE(std::fabs(out.objective - 3.2635716) < 1e-6);
  REQUIRE(out.h1_residual < 1e-9);
  REQUIRE(out.h2_residual < 1e-9);
  REQUIRE(out.kkt_residual_norm < 1e-8);
  REQUIRE(out.final_mu_alpha < 1e-6);
  const Vec expect{0.2114174, 0.5028452, 0.6363167, 0.5028451, 0.2114174};
  for (int i = 0; i < 5; ++i) REQUIRE(std::fabs(out.x[i] - expect[i]) < 1e-5);
}

TEST_CASE("solver tracks the closed form near the Fejer edge",
          "[kkt][solve]") {
  // At a = 2 cos(pi/6) the feasible set collapses to the Fejer factor with
  // F = 4(1 + sqrt(3))/3, where the two equality gradients become parallel
  // and no finite multiplier pair exists. The solver must stay accurate on
  // the approach and refuse the degenerate point itself.
  const double edge = fejer_bound(4);
  const double edge_value = 4.0 * (1.0 + std::sqrt(3.0)) / 3.0;
  const SolveOutcome near = solve_subproblem(ReducedProblem(4, edge - 1e-5), {});
  REQUIRE(near.converged);
  REQUIRE(near.objective < edge_value);
  REQUIRE(std::fabs(near.objective - edge_value) < 1e-2);
  const SolveOutcome at = solve_subproblem(ReducedProblem(4, edge), {});
  REQUIRE(!at.converged);
}

TEST_CASE("active coefficient pins to zero", "[kkt][solve]") {
  const ReducedProblem pb(5, kAStar46);
  const SolveOutcome out = solve_subproblem(pb, {5});
  REQUIRE(out.converged);
  REQUIRE(out.subproblem_id == 2);
  REQUIRE(std::fabs(out.objective - 3.2635716) < 1e-6);
  REQUIRE(std::fabs(out.kept_values.at(5)) < 1e-9);
  REQUIRE(out.multipliers.count(5) == 1);
  REQUIRE(out.theta_monotone);  // default starts track the global basin
  REQUIRE(std::fabs(out.theta_trace.back() - out.objective) < 1e-5);
  REQUIRE_THROWS_AS(solve_subproblem(pb, {4}), DomainError);
}

TEST_CASE("degree-8 boundary subproblem reproduces the extremal value",
          "[kkt][solve]") {
  const ReducedProblem pb(8, 1.7312576);
  const SolveOutcome out = solve_subproblem(pb, {5, 6});
  REQUIRE(out.converged);
  REQUIRE(out.subproblem_id == 4);
  REQUIRE(std::fabs(out.objective - 3.4440562) < 1e-5);
  REQUIRE(std::fabs(out.kept_values.at(5)) < 1e-8);
  REQUIRE(std::fabs(out.kept_values.at(6)) < 1e-8);
  // Dual feasibility at the true active set.
  REQUIRE(out.multipliers.at(5) > -1e-8);
  REQUIRE(out.multipliers.at(6) > -1e-8);
}

TEST_CASE("stationarity residual separates minimizers from bystanders",
          "[kkt]") {
  const ReducedProblem pb(5, kAStar46);
  const SolveOutcome out = solve_subproblem(pb, {5});
  REQUIRE(kkt_residual(pb, out.x, out.lambda1, out.lambda2, out.multipliers) <
          1e-8);
  Vec bumped = out.x;
  bumped[2] += 0.05;
  REQUIRE(kkt_residual(pb, bumped, out.lambda1, out.lambda2, out.multipliers) >
          1e-2);
}

TEST_CASE("active-set enumeration picks the feasible minimum", "[kkt][chi]") {
  ChiResult r4 = chi_reduced(4, kAStar46);
  REQUIRE(r4.subproblems.size() == 1);
  REQUIRE(std::fabs(r4.chi - 3.2635716) < 1e-6);

  ChiResult r5 = chi_reduced(5, kAStar46);
  REQUIRE(r5.subproblems.size() == 2);
  REQUIRE(r5.best.subproblem_id == 2);
  REQUIRE(std::fabs(r5.chi - r4.chi) < 1e-7);
  // The unconstrained candidate undercuts the minimum but leaves a_5 < 0, so
  // enumeration must reject it.
  REQUIRE(r5.subproblems[0].objective < r5.chi);
  REQUIRE(!r5.subproblems[0].converged);

  ChiResult r6 = chi_reduced(6, kAStar46);
  REQUIRE(r6.subproblems.size() == 4);
  REQUIRE(r6.best.subproblem_id == 4);
  REQUIRE(std::fabs(r6.chi - r4.chi) < 1e-6);
}

TEST_CASE("degree-7 extremal point", "[kkt][chi]") {
  const double a = 1.7185098;
  ChiResult r = chi_reduced(7, a);
  REQUIRE(r.best.subproblem_id == 4);
  const double d = std::sqrt(a) - 1.0;
  REQUIRE(std::fabs(r.chi / (d * d) - 34.6494874) < 1e-5);
  CertifyReport cert = certify_full(7, a, r.best.x);
  REQUIRE(cert.ok);
  REQUIRE(std::fabs(cert.polynomial.coeffs[7] - 0.0035595) < 1e-6);
  REQUIRE(std::fabs(cert.polynomial.coeffs[2] - 1.0731034) < 1e-6);
  REQUIRE(std::fabs(cert.polynomial.coeffs[5]) < 1e-7);
  REQUIRE(std::fabs(cert.polynomial.coeffs[6]) < 1e-7);
}

TEST_CASE("enumeration is deterministic for a fixed seed", "[kkt][chi]") {
  ChiOptions opt;
  opt.seed = 42;
  ChiResult a = chi_reduced(6, 1.71, opt);
  ChiResult b = chi_reduced(6, 1.71, opt);
  REQUIRE(a.chi == b.chi);
  REQUIRE(a.best.x.size() == b.best.x.size());
  REQUIRE(std::memcmp(a.best.x.data(), b.best.x.data(),
                      a.best.x.size() * sizeof(double)) == 0);
}

TEST_CASE("warm starts do not change the answer", "[kkt][chi]") {
  ChiResult cold = chi_reduced(6, 1.72);
  ChiOptions opt;
  opt.warm_starts[cold.best.subproblem_id] = cold.best.x;
  ChiResult warm = chi_reduced(6, 1.72, opt);
  REQUIRE(std::fabs(warm.chi - cold.chi) < 1e-9);
}

TEST_CASE("infeasible targets throw", "[kkt][chi]") {
  // a beyond the Fejer bound cannot satisfy H2 = a on the sphere.
  REQUIRE_THROWS_AS(chi_reduced(4, 1.99), Infeasible);
  REQUIRE_THROWS_AS(ReducedProblem(4, 1.0), DomainError);
  REQUIRE_THROWS_AS(ReducedProblem(3, 1.5), DomainError);
  REQUIRE_THROWS_AS(ReducedProblem(9, 1.5), DomainError);
}

TEST_CASE("full certification accepts minimizers and rejects junk",
          "[kkt][certify]") {
  ChiResult r = chi_reduced(6, kAStar46);
  CertifyReport good = certify_full(6, kAStar46, r.best.x);
  REQUIRE(good.ok);
  // The shared-argmin point is degenerate for degree 6 (the factor pads with
  // zeros, so an active constraint gradient vanishes); equality residuals sit
  // at the penalty level rather than the polished one.
  REQUIRE(good.a0_error < 1e-7);
  REQUIRE(good.a1_error < 1e-7);
  REQUIRE(good.min_coefficient > -1e-6);
  REQUIRE(good.membership.in_class);

  // A unit vector with the wrong second coefficient fails the a_1 gate.
  Vec wrong(7, 0.0);
  wrong[0] = 0.8;
  wrong[3] = 0.6;
  CertifyReport bad = certify_full(6, kAStar46, wrong);
  REQUIRE(!bad.ok);

  // Wrong dimension is rejected outright.
  CertifyReport dim = certify_full(5, kAStar46, r.best.x);
  REQUIRE(!dim.ok);
}

TEST_CASE("penalty infeasibility vanishes like 1/mu", "[kkt][penalty]") {
  const ReducedProblem pb(5, kAStar46);
  PenaltyObjective phi{&pb, {5}, 0.0};
  Vec x = detail::padded_quartic_start(pb.dim());
  double prev_alpha = std::numeric_limits<double>::infinity();
  double prev_product = std::numeric_limits<double>::infinity();
  for (double mu : {1e3, 1e5, 1e7}) {
    phi.mu = mu;
    NewtonConfig cfg;
    cfg.grad_floor = 32.0 * std::numeric_limits<double>::epsilon() * mu;
    NewtonResult nr = newton_minimize(phi, x, cfg);
    REQUIRE(nr.converged);
    x = nr.x;
    const double a = phi.alpha(x);
    // alpha ~ C / mu^2, so the product mu * alpha itself decays like 1 / mu.
    REQUIRE(a < prev_alpha + 1e-14);
    REQUIRE(mu * a < prev_product + 1e-14);
    prev_alpha = a;
    prev_product = mu * a;
  }
  REQUIRE(prev_product < 1e-4);
}
