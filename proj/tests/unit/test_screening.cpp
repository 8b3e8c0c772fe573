#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "srbo/error.hpp"
#include "srbo/screening.hpp"
#include "srbo/synthetic.hpp"

using namespace srbo;

namespace {

struct Instance {
  std::shared_ptr<const Dataset> data;
  std::unique_ptr<GramOracle> q;
  oracle::Matrix m;
  std::size_t l = 0;
  double upper = 0.0;

  Instance(Dataset d, const KernelSpec& spec)
      : data(std::make_shared<const Dataset>(std::move(d))),
        q(std::make_unique<GramOracle>(data, spec, GramMode::labeled)),
        m(oracle::dense_gram(*data, spec, true)),
        l(data->rows()),
        upper(1.0 / static_cast<double>(l)) {}

  oracle::Solution solve(double nu) const {
    return oracle::accelerated_solve(m, std::vector<double>(l, 0.0), upper, nu, false);
  }
};

Instance random_instance(std::mt19937_64& rng, std::size_t l) {
  std::uniform_real_distribution<double> shift(0.3, 2.0);
  const bool rbf = rng() & 1;
  return Instance(oracle::random_blobs(l, shift(rng), rng),
                  rbf ? KernelSpec::rbf(1.0) : KernelSpec::linear());
}

// Random point of {e^T a >= nu, 0 <= a <= upper}.
std::vector<double> random_feasible(std::size_t l, double upper, double nu, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-upper, 2.0 * upper);
  std::vector<double> v(l);
  for (double& x : v) x = u(rng);
  return oracle::project_sorted(v, upper, nu, false);
}

std::vector<double> minus(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

double direct_radius(const oracle::Matrix& m, const std::vector<double>& a0,
                     const std::vector<double>& delta) {
  return 0.25 * oracle::quad(m, delta, delta) + oracle::quad(m, a0, delta);
}

ScoreBounds point_bounds(std::vector<double> centers) {
  ScoreBounds b;
  b.center_score = centers;
  b.self_norm.assign(centers.size(), 1.0);
  b.lower = centers;
  b.upper = std::move(centers);
  return b;
}

Dataset probe_grid() {
  std::vector<double> x;
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) {
      x.push_back(0.6 * i);
      x.push_back(0.6 * j);
    }
  }
  return Dataset(121, 2, std::move(x));
}

// One screened step from the reference optimum at nu0 to nu1.
struct Step {
  std::vector<double> alpha0;
  std::vector<double> delta;
  SafeBall ball;
  ScoreBounds bounds;
  ScreenOutcome outcome;
};

Step screened_step(const Instance& inst, double nu0, double nu1, double slack = 0.0) {
  Step s;
  s.alpha0 = inst.solve(nu0).alpha;
  s.delta = solve_delta_full(*inst.q, s.alpha0, nu1, inst.upper, 1e-12);
  // The reference alpha0 is optimal only to ~1e-11, which the gap covers.
  const auto qa = multiply(*inst.q, s.alpha0);
  slack += frank_wolfe_gap(s.alpha0, qa, NuBoxConstraints{nu0, inst.upper, nu0});
  s.ball = make_ball(*inst.q, s.alpha0, s.delta, nu0, nu1, slack);
  s.bounds = score_bounds(*inst.q, s.ball);
  const auto [lo, hi] = rho_bounds(s.bounds, nu1, inst.l);
  s.outcome = screen(s.bounds, lo, hi, inst.upper);
  return s;
}

std::pair<double, double> random_nu_pair(std::mt19937_64& rng, std::size_t l) {
  const double cap = 1.0 - 1.0 / static_cast<double>(l);
  std::uniform_real_distribution<double> u(0.05, cap - 0.02);
  const double a = u(rng);
  std::uniform_real_distribution<double> gap(0.001, 0.08);
  return {a, std::min(a + gap(rng), cap)};
}

std::vector<double> combined_reduced_solve(const Instance& inst, const ScreenOutcome& outcome,
                                           double nu1) {
  const auto rp = reduced_problem(*inst.q, outcome, nu1, inst.l);
  if (outcome.survivors.empty()) return combine(outcome, {});
  const auto sol = dcdm_solve(*rp.q1, rp.f, rp.constraints, {}, {1e-12, 100000});
  return combine(outcome, sol.alpha);
}

}  // namespace

TEST(Radius, Examples) {
  std::mt19937_64 rng(1);
  auto inst = random_instance(rng, 12);
  const std::vector<double> zero(12, 0.0);
  const auto a0 = inst.solve(0.3).alpha;
  EXPECT_EQ(radius_of(*inst.q, a0, zero), 0.0);

  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<double> delta(12);
  for (double& x : delta) x = g(rng);
  EXPECT_NEAR(radius_of(*inst.q, zero, delta), 0.25 * oracle::quad(inst.m, delta, delta), 1e-14);
}

TEST(Radius, MatchesCenterNormIdentity) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    auto inst = random_instance(rng, 20);
    const auto a0 = inst.solve(0.4).alpha;
    const auto a1 = random_feasible(20, inst.upper, 0.45, rng);
    const auto delta = minus(a1, a0);
    std::vector<double> beta(20);
    for (std::size_t i = 0; i < 20; ++i) beta[i] = a0[i] + 0.5 * delta[i];
    const double identity = oracle::quad(inst.m, beta, beta) - oracle::quad(inst.m, a0, a0);
    EXPECT_NEAR(radius_of(*inst.q, a0, delta), std::max(identity, 0.0), 1e-12);
  }
}

TEST(DeltaFeasible, Examples) {
  const std::size_t l = 10;
  const double upper = 0.1;
  const std::vector<double> a0(l, 0.3 / l);
  const std::vector<double> zero(l, 0.0);
  EXPECT_FALSE(delta_feasible(a0, zero, 0.5, upper));
  EXPECT_TRUE(delta_feasible(a0, zero, 0.3, upper));
  const std::vector<double> shift(l, (0.5 - 0.3) / l);
  EXPECT_TRUE(delta_feasible(a0, shift, 0.5, upper));
  auto spike = shift;
  spike[3] = upper;
  EXPECT_FALSE(delta_feasible(a0, spike, 0.5, upper));
  auto below = shift;
  below[0] = -0.5;
  EXPECT_FALSE(delta_feasible(a0, below, 0.1, upper));

  std::vector<double> oc0(l, 0.1);
  EXPECT_TRUE(delta_feasible_oc(oc0, zero, 0.2));
  EXPECT_FALSE(delta_feasible_oc(oc0, shift, 0.2));
}

TEST(SolveDeltaFull, ZeroWhenNoTighteningIsNeeded) {
  std::mt19937_64 rng(3);
  auto inst = random_instance(rng, 16);
  const auto a0 = inst.solve(0.5).alpha;
  const auto delta = solve_delta_full(*inst.q, a0, 0.45, inst.upper);
  EXPECT_LE(radius_of(*inst.q, a0, delta), 1e-12);
  EXPECT_TRUE(delta_feasible(a0, delta, 0.45, inst.upper));
}

TEST(SolveDeltaFull, TwoVariableGridSearch) {
  // Two samples, linear kernel with bias, opposite labels.
  Instance inst(Dataset(2, 1, {1.0, -0.5}, {1, -1}), KernelSpec::linear());
  const std::vector<double> a0{0.15, 0.15};
  const double nu1 = 0.7;
  const auto delta = solve_delta_full(*inst.q, a0, nu1, inst.upper, 1e-12);
  ASSERT_TRUE(delta_feasible(a0, delta, nu1, inst.upper));
  const double got = radius_of(*inst.q, a0, delta);

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 500; ++i) {
    for (int j = 0; j <= 500; ++j) {
      const std::vector<double> a{i * 1e-3, j * 1e-3};
      if (a[0] + a[1] < nu1 - 1e-12) continue;
      best = std::min(best, direct_radius(inst.m, a0, minus(a, a0)));
    }
  }
  EXPECT_LE(got, best + 1e-9);
  EXPECT_GE(got, best - 2e-3);
}

TEST(SolveDeltaFull, DominatesRandomFeasibleDeltas) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    auto inst = random_instance(rng, 10);
    const auto [nu0, nu1] = random_nu_pair(rng, 10);
    const auto a0 = inst.solve(nu0).alpha;
    const auto delta = solve_delta_full(*inst.q, a0, nu1, inst.upper, 1e-12);
    ASSERT_TRUE(delta_feasible(a0, delta, nu1, inst.upper));
    const double r = radius_of(*inst.q, a0, delta);
    for (int k = 0; k < 1000; ++k) {
      const auto probe = minus(random_feasible(10, inst.upper, nu1, rng), a0);
      EXPECT_LE(r, std::max(direct_radius(inst.m, a0, probe), 0.0) + 1e-6);
    }
  }
}

TEST(SolveDeltaWarm, FeasibleDeltaIsReturnedUnchanged) {
  std::mt19937_64 rng(5);
  auto inst = random_instance(rng, 12);
  const auto ak = inst.solve(0.3).alpha;
  const auto target = random_feasible(12, inst.upper, 0.5, rng);
  const auto dk = minus(target, ak);
  const auto out = solve_delta_warm(*inst.q, ak, dk, 0.5, inst.upper);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(out[i], dk[i]);
}

TEST(SolveDeltaWarm, OnlyTheBoxViolatorMoves) {
  Instance inst(Dataset(3, 1, {1.0, -1.0, 0.5}, {1, -1, 1}), KernelSpec::linear());
  const std::vector<double> ak{0.3, 0.1, 0.1};
  const std::vector<double> dk{0.1, 0.05, 0.05};
  const auto out = solve_delta_warm(*inst.q, ak, dk, 0.6, inst.upper);
  EXPECT_TRUE(delta_feasible(ak, out, 0.6, inst.upper));
  EXPECT_NE(out[0], dk[0]);
  EXPECT_NEAR(out[1], dk[1], 1e-15);
  EXPECT_NEAR(out[2], dk[2], 1e-15);
}

TEST(SolveDeltaWarm, RadiusSitsBetweenFullSolveAndNaiveClip) {
  std::mt19937_64 rng(6);
  int compared_with_clip = 0;
  for (int t = 0; t < 20; ++t) {
    auto inst = random_instance(rng, 30);
    const auto [nu0, nu1] = random_nu_pair(rng, 30);
    const double nu2 = std::min(nu1 + (nu1 - nu0), 1.0 - 1.0 / 30.0);
    const auto a_prev = inst.solve(nu0).alpha;
    const auto dk = solve_delta_full(*inst.q, a_prev, nu1, inst.upper, 1e-12);
    const auto ak = inst.solve(nu1).alpha;

    const auto warm = solve_delta_warm(*inst.q, ak, dk, nu2, inst.upper, 1e-12);
    const auto full = solve_delta_full(*inst.q, ak, nu2, inst.upper, 1e-12);
    ASSERT_TRUE(delta_feasible(ak, warm, nu2, inst.upper));
    const double r_warm = radius_of(*inst.q, ak, warm);
    EXPECT_GE(r_warm, radius_of(*inst.q, ak, full) - 1e-9);

    std::vector<double> clip(30);
    for (std::size_t i = 0; i < 30; ++i) clip[i] = std::clamp(ak[i] + dk[i], 0.0, inst.upper) - ak[i];
    if (delta_feasible(ak, clip, nu2, inst.upper)) {
      ++compared_with_clip;
      EXPECT_LE(r_warm, radius_of(*inst.q, ak, clip) + 1e-9);
    }
  }
  EXPECT_GT(compared_with_clip, 0);
}

TEST(ScoreBoundsTest, ZeroRadiusCollapsesToCenter) {
  std::mt19937_64 rng(7);
  auto inst = random_instance(rng, 15);
  const auto a0 = inst.solve(0.3).alpha;
  const std::vector<double> zero(15, 0.0);
  const auto ball = make_ball(*inst.q, a0, zero, 0.3, 0.3);
  EXPECT_EQ(ball.radius_sq, 0.0);
  EXPECT_EQ(ball.beta, a0);
  const auto b = score_bounds(*inst.q, ball);
  const auto qa = oracle::matvec(inst.m, a0);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(b.lower[i], b.upper[i]);
    EXPECT_NEAR(b.center_score[i], qa[i], 1e-12);
    EXPECT_NEAR(b.self_norm[i], std::sqrt(inst.m[i * 15 + i]), 1e-14);
  }
}

TEST(ScoreBoundsTest, DoublingRadiusWidensBySqrtTwo) {
  std::mt19937_64 rng(8);
  auto inst = random_instance(rng, 15);
  const auto s = screened_step(inst, 0.2, 0.3);
  auto wide = s.ball;
  wide.radius_sq = 2.0 * s.ball.effective_radius_sq();
  wide.slack = 0.0;
  const auto b = score_bounds(*inst.q, wide);
  for (std::size_t i = 0; i < 15; ++i) {
    const double w0 = s.bounds.upper[i] - s.bounds.center_score[i];
    const double w1 = b.upper[i] - b.center_score[i];
    EXPECT_NEAR(w1, std::sqrt(2.0) * w0, 1e-12);
    EXPECT_NEAR(b.center_score[i] - b.lower[i], w1, 1e-12);
  }
}

TEST(ScoreBoundsTest, BallContainsNextOptimumAndBoundsSandwichMargins) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    auto inst = random_instance(rng, 10 + t % 40);
    const auto [nu0, nu1] = random_nu_pair(rng, inst.l);
    const auto s = screened_step(inst, nu0, nu1);
    const auto a1 = inst.solve(nu1).alpha;
    const double dist = oracle::quad(inst.m, a1, a1) - 2.0 * oracle::quad(inst.m, a1, s.ball.beta) +
                        oracle::quad(inst.m, s.ball.beta, s.ball.beta);
    EXPECT_LE(dist, s.ball.effective_radius_sq() + 1e-8) << "trial " << t;
    const auto d1 = oracle::matvec(inst.m, a1);
    for (std::size_t i = 0; i < inst.l; ++i) {
      EXPECT_GE(d1[i], s.bounds.lower[i] - 1e-8) << "trial " << t;
      EXPECT_LE(d1[i], s.bounds.upper[i] + 1e-8) << "trial " << t;
    }
  }
}

TEST(RhoBounds, Examples) {
  const auto b = point_bounds({3, 2, 1, 0});
  // Integer i* = 2: rho can sit anywhere between the 2nd and 3rd margins.
  const auto [lo, hi] = rho_bounds(b, 0.5, 4);
  EXPECT_DOUBLE_EQ(lo, 1.0);
  EXPECT_DOUBLE_EQ(hi, 2.0);
  const auto [lo1, hi1] = rho_bounds(b, 0.99, 4);
  EXPECT_DOUBLE_EQ(lo1, 3.0);
  EXPECT_DOUBLE_EQ(hi1, 3.0);
  // Fractional i* = 4 - 0.6 * 4 = 1.6: floor picks the largest upper, ceil the second lower.
  const auto [lo2, hi2] = rho_bounds(b, 0.6, 4);
  EXPECT_DOUBLE_EQ(hi2, 3.0);
  EXPECT_DOUBLE_EQ(lo2, 2.0);
  const auto neg = point_bounds({-1, -2, -3, -4});
  EXPECT_EQ(rho_bounds(neg, 0.5, 4).first, 0.0);
  EXPECT_EQ(kth_largest(std::vector<double>{5, 1, 3}, 9), 1.0);
  EXPECT_EQ(kth_largest(std::vector<double>{5, 1, 3}, 0), 5.0);
}

TEST(RhoBounds, TrueRhoLiesInTheInterval) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 100; ++t) {
    auto inst = random_instance(rng, 10 + t % 40);
    const auto [nu0, nu1] = random_nu_pair(rng, inst.l);
    const auto s = screened_step(inst, nu0, nu1);
    const auto ref = train_full(*inst.q, nu1, {SolverKind::dcdm, 1e-10});
    EXPECT_GE(ref.rho, s.outcome.rho_lower - 1e-8) << "trial " << t;
    EXPECT_LE(ref.rho, s.outcome.rho_upper + 1e-8) << "trial " << t;
  }
}

TEST(Screen, HugeRadiusScreensNothing) {
  std::mt19937_64 rng(11);
  auto inst = random_instance(rng, 20);
  auto s = screened_step(inst, 0.3, 0.35);
  s.ball.radius_sq = 1e6;
  const auto b = score_bounds(*inst.q, s.ball);
  const auto [lo, hi] = rho_bounds(b, 0.35, 20);
  const auto out = screen(b, lo, hi, inst.upper);
  EXPECT_EQ(out.survivors.size(), 20u);
  EXPECT_EQ(out.screening_ratio, 0.0);
}

TEST(Screen, ExactBallReproducesTheKktPartition) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    auto inst = random_instance(rng, 40);
    const auto model = train_full(*inst.q, 0.4, {SolverKind::dcdm, 1e-12});
    const std::vector<double> zero(40, 0.0);
    const auto ball = make_ball(*inst.q, model.alpha, zero, 0.4, 0.4);
    const auto b = score_bounds(*inst.q, ball);
    const double tol = 1e-6;
    const auto out = screen(b, model.rho - tol, model.rho + tol, inst.upper);
    const auto audit = kkt_audit(model, *inst.q, tol);
    EXPECT_EQ(out.fixed_zero, audit.outside);
    EXPECT_EQ(out.fixed_upper, audit.inside);
  }
}

TEST(Screen, OutcomePartitionsTheIndices) {
  std::mt19937_64 rng(13);
  auto inst = random_instance(rng, 50);
  const auto s = screened_step(inst, 0.3, 0.302);
  std::vector<std::size_t> all;
  all.insert(all.end(), s.outcome.fixed_zero.begin(), s.outcome.fixed_zero.end());
  all.insert(all.end(), s.outcome.fixed_upper.begin(), s.outcome.fixed_upper.end());
  all.insert(all.end(), s.outcome.survivors.begin(), s.outcome.survivors.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(50);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
  const double ratio =
      static_cast<double>(s.outcome.fixed_zero.size() + s.outcome.fixed_upper.size()) / 50.0;
  EXPECT_DOUBLE_EQ(s.outcome.screening_ratio, ratio);
  for (auto i : s.outcome.fixed_upper) EXPECT_EQ(s.outcome.fixed_values[i], inst.upper);
}

TEST(Screen, FixedSetsShrinkAsTheRadiusGrows) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    auto inst = random_instance(rng, 40);
    const auto s = screened_step(inst, 0.3, 0.31);
    auto wide = s.ball;
    wide.slack += 0.01 * (t + 1);
    const auto b = score_bounds(*inst.q, wide);
    const auto [lo, hi] = rho_bounds(b, 0.31, 40);
    const auto out = screen(b, lo, hi, inst.upper);
    EXPECT_TRUE(std::includes(s.outcome.fixed_zero.begin(), s.outcome.fixed_zero.end(),
                              out.fixed_zero.begin(), out.fixed_zero.end()));
    EXPECT_TRUE(std::includes(s.outcome.fixed_upper.begin(), s.outcome.fixed_upper.end(),
                              out.fixed_upper.begin(), out.fixed_upper.end()));
  }
}

TEST(Screen, FixedCoordinatesMatchTheReferenceSolve) {
  std::mt19937_64 rng(15);
  const auto probes = probe_grid();
  int screened_any = 0;
  for (int t = 0; t < 100; ++t) {
    auto inst = random_instance(rng, 10 + t % 50);
    const auto [nu0, nu1] = random_nu_pair(rng, inst.l);
    const auto s = screened_step(inst, nu0, nu1);
    const auto ref = inst.solve(nu1);
    bool coords_match = true;
    for (auto set : {&s.outcome.fixed_zero, &s.outcome.fixed_upper}) {
      for (auto i : *set) {
        coords_match = coords_match && std::abs(ref.alpha[i] - s.outcome.fixed_values[i]) <= 1e-6;
      }
    }
    screened_any += s.outcome.screening_ratio > 0.0;
    if (coords_match) continue;
    // Non-unique optimum: the combined solution must still be optimal.
    const auto alpha = combined_reduced_solve(inst, s.outcome, nu1);
    EXPECT_NEAR(0.5 * oracle::quad(inst.m, alpha, alpha), ref.objective, 1e-7) << "trial " << t;
    const auto a = make_nu_model(*inst.q, nu1, alpha);
    const auto b = make_nu_model(*inst.q, nu1, ref.alpha);
    const auto va = decision_values(a, probes);
    const auto vb = decision_values(b, probes);
    for (std::size_t i = 0; i < va.size(); ++i) EXPECT_NEAR(va[i], vb[i], 1e-7) << "trial " << t;
  }
  EXPECT_GT(screened_any, 0);
}

TEST(ReducedProblemTest, NothingScreenedIsTheOriginalProblem) {
  std::mt19937_64 rng(16);
  auto inst = random_instance(rng, 12);
  ScreenOutcome out;
  out.survivors.resize(12);
  std::iota(out.survivors.begin(), out.survivors.end(), 0);
  out.fixed_values.assign(12, 0.0);
  out.box_upper = inst.upper;
  const auto rp = reduced_problem(*inst.q, out, 0.4, 12);
  EXPECT_EQ(rp.q1->size(), 12u);
  for (double f : rp.f) EXPECT_EQ(f, 0.0);
  EXPECT_DOUBLE_EQ(rp.constraints.linear_floor, 0.4);
  EXPECT_DOUBLE_EQ(rp.constraints.upper, inst.upper);
}

TEST(ReducedProblemTest, EverythingScreenedIsFullyDetermined) {
  std::mt19937_64 rng(17);
  auto inst = random_instance(rng, 4);
  ScreenOutcome out;
  out.fixed_zero = {0, 2};
  out.fixed_upper = {1, 3};
  out.fixed_values = {0.0, 0.25, 0.0, 0.25};
  out.box_upper = 0.25;
  const auto rp = reduced_problem(*inst.q, out, 0.5, 4);
  EXPECT_EQ(rp.q1->size(), 0u);
  EXPECT_EQ(rp.constraints.linear_floor, 0.0);
  EXPECT_EQ(combine(out, {}), out.fixed_values);
  const auto f = fixed_linear_term(*inst.q, out);
  EXPECT_TRUE(f.empty());
}

TEST(ReducedProblemTest, LinearTermAndFloorUseTheFixedMass) {
  std::mt19937_64 rng(18);
  auto inst = random_instance(rng, 6);
  ScreenOutcome out;
  out.fixed_zero = {0};
  out.fixed_upper = {2, 5};
  out.survivors = {1, 3, 4};
  const double u = inst.upper;
  out.fixed_values = {0.0, 0.0, u, 0.0, 0.0, u};
  out.box_upper = u;
  const auto rp = reduced_problem(*inst.q, out, 0.6, 6);
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t i = out.survivors[a];
    EXPECT_NEAR(rp.f[a], u * (inst.m[i * 6 + 2] + inst.m[i * 6 + 5]), 1e-14);
  }
  EXPECT_NEAR(rp.constraints.linear_floor, 0.6 - 2.0 * u, 1e-15);
  EXPECT_NEAR(rp.fixed_mass, 2.0 * u, 1e-15);
}

TEST(ReducedProblemTest, CombinedSolutionMatchesTheFullObjective) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 50; ++t) {
    auto inst = random_instance(rng, 20 + t % 30);
    const auto [nu0, nu1] = random_nu_pair(rng, inst.l);
    const auto s = screened_step(inst, nu0, nu1);
    const auto alpha = combined_reduced_solve(inst, s.outcome, nu1);
    const double obj = 0.5 * oracle::quad(inst.m, alpha, alpha);
    const double ref = inst.solve(nu1).objective;
    EXPECT_LE(std::abs(obj - ref), 1e-6 * std::max(1.0, std::abs(ref))) << "trial " << t;
  }
}

TEST(SolvePath, SinglePointGridIsAPlainSolve) {
  std::mt19937_64 rng(20);
  auto inst = random_instance(rng, 30);
  const std::vector<double> grid{0.4};
  const auto path = solve_path(*inst.q, grid);
  ASSERT_EQ(path.steps.size(), 1u);
  EXPECT_EQ(path.steps[0].screening_ratio, 0.0);
  EXPECT_NEAR(path.steps[0].objective, inst.solve(0.4).objective, 1e-7);
}

TEST(SolvePath, RejectsBadGrids) {
  EXPECT_THROW(check_nu_grid(std::vector<double>{}), InputError);
  EXPECT_THROW(check_nu_grid(std::vector<double>{0.3, 0.2}), InputError);
  EXPECT_THROW(check_nu_grid(std::vector<double>{0.3, 0.3}), InputError);
  EXPECT_NO_THROW(check_nu_grid(std::vector<double>{0.1, 0.2}));
  const auto d = std::make_shared<const Dataset>(synthetic::generate(synthetic::Kind::gauss1, 5, 1));
  EXPECT_THROW(solve_path(d, KernelSpec::linear(), std::vector<double>{0.5, 0.95}), InputError);
}

TEST(SolvePath, ScreenedPathPredictsLikeTheBaseline) {
  const auto train = std::make_shared<const Dataset>(synthetic::gaussian_pair(2.0, -2.0, 200, 200, 5));
  std::vector<double> grid;
  for (int k = 1; k <= 9; ++k) grid.push_back(0.1 * k);
  const auto probes = probe_grid();
  for (const auto& spec : {KernelSpec::linear(), KernelSpec::rbf(1.0)}) {
    const GramOracle q(train, spec, GramMode::labeled);
    PathOptions on;
    PathOptions off;
    off.screening = false;
    const auto a = solve_path(q, grid, on);
    const auto b = solve_path(q, grid, off);
    ASSERT_EQ(a.steps.size(), grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      EXPECT_EQ(predict(model_at(q, a.steps[k]), probes), predict(model_at(q, b.steps[k]), probes))
          << "nu " << grid[k];
      EXPECT_NEAR(a.steps[k].objective, b.steps[k].objective,
                  1e-6 * std::max(1e-3, b.steps[k].objective));
    }
  }
}

TEST(SolvePath, FineGridScreensSomething) {
  const auto train = std::make_shared<const Dataset>(synthetic::gaussian_pair(2.0, -2.0, 100, 100, 6));
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.3 + 0.002 * k);
  const auto path = solve_path(train, KernelSpec::linear(), grid);
  EXPECT_GT(path.mean_screening_ratio(), 0.0);
  for (const auto& s : path.steps) {
    EXPECT_EQ(s.n_survivors + s.n_fixed_zero + s.n_fixed_upper, 200u);
    EXPECT_TRUE(s.converged);
  }
}

TEST(PathJson, RecordsPerNuFields) {
  const auto train = std::make_shared<const Dataset>(synthetic::generate(synthetic::Kind::gauss2, 20, 2));
  const std::vector<double> grid{0.2, 0.3, 0.4};
  const auto path = solve_path(train, KernelSpec::rbf(1.0), grid);
  const auto j = nlohmann::json::parse(path_to_json(path));
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(j[k].at("nu").get<double>(), grid[k]);
    for (const char* key : {"screening_ratio", "objective", "wall_ms", "n_survivors"}) {
      EXPECT_TRUE(j[k].contains(key)) << key;
    }
  }
}
