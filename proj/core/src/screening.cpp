#include "srbo/screening.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "srbo/error.hpp"

namespace srbo {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw InputError(std::string(what) + ": length mismatch");
}

std::vector<double> sum_of(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// Linear term of the partial delta problem on `released`:
// (Q alpha_k)_N + Q[N, rest] cand_rest, one row per released coordinate.
std::vector<double> partial_linear_term(const SymmetricOperator& q, std::span<const double> alpha_k,
                                        std::span<const double> cand,
                                        const std::vector<std::size_t>& released,
                                        const std::vector<char>& is_released) {
  std::vector<double> f(released.size());
  for (std::size_t k = 0; k < released.size(); ++k) {
    const auto r = q.row(released[k]);
    double s = 0.0;
    for (std::size_t j = 0; j < alpha_k.size(); ++j) {
      const double frozen = is_released[j] ? 0.0 : cand[j];
      s += r[j] * (alpha_k[j] + frozen);
    }
    f[k] = s;
  }
  return f;
}

std::vector<std::size_t> box_violators(std::span<const double> cand, double upper,
                                       std::vector<char>& is_released, double& frozen_sum) {
  const double tol = 1e-12 * std::max(upper, 1e-300);
  std::vector<std::size_t> released;
  frozen_sum = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand[i] < -tol || cand[i] > upper + tol) {
      released.push_back(i);
      is_released[i] = 1;
    } else {
      frozen_sum += cand[i];
    }
  }
  return released;
}

// Releases frozen coordinates in the order given by `key` (largest first)
// until `done(frozen_sum, released_count)` holds.
template <typename Key, typename Done>
void release_until(std::span<const double> cand, std::vector<std::size_t>& released,
                   std::vector<char>& is_released, double& frozen_sum, Key key, Done done) {
  if (done(frozen_sum, released.size())) return;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (!is_released[i]) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  for (std::size_t i : order) {
    released.push_back(i);
    is_released[i] = 1;
    frozen_sum -= cand[i];
    if (done(frozen_sum, released.size())) break;
  }
  std::sort(released.begin(), released.end());
}

std::vector<double> scatter_delta(std::span<const double> alpha_k, std::span<const double> cand,
                                  const std::vector<std::size_t>& released,
                                  std::span<const double> solved) {
  std::vector<double> delta(alpha_k.size());
  for (std::size_t i = 0; i < alpha_k.size(); ++i) delta[i] = cand[i] - alpha_k[i];
  for (std::size_t k = 0; k < released.size(); ++k) {
    delta[released[k]] = solved[k] - alpha_k[released[k]];
  }
  return delta;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

double radius_of(const SymmetricOperator& q, std::span<const double> alpha0,
                 std::span<const double> delta) {
  require_same_length(alpha0, delta, "radius_of");
  if (alpha0.size() != q.size()) throw InputError("radius_of: oracle size mismatch");
  const auto qd = multiply(q, delta);
  double r = 0.0;
  for (std::size_t i = 0; i < qd.size(); ++i) r += (0.25 * delta[i] + alpha0[i]) * qd[i];
  return std::max(r, 0.0);
}

bool delta_feasible(std::span<const double> alpha0, std::span<const double> delta, double nu_to,
                    double box_upper) {
  require_same_length(alpha0, delta, "delta_feasible");
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha0.size(); ++i) {
    const double a = alpha0[i] + delta[i];
    if (a < -1e-10 || a > box_upper + 1e-10) return false;
    sum += a;
  }
  return sum >= nu_to - 1e-10;
}

bool delta_feasible_oc(std::span<const double> alpha0, std::span<const double> delta,
                       double box_upper) {
  require_same_length(alpha0, delta, "delta_feasible_oc");
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha0.size(); ++i) {
    const double a = alpha0[i] + delta[i];
    if (a < -1e-10 || a > box_upper + 1e-10) return false;
    sum += a;
  }
  return std::abs(sum - 1.0) <= 1e-10;
}

std::vector<double> solve_delta_full(const SymmetricOperator& q, std::span<const double> alpha0,
                                     double nu_to, double box_upper, double eps) {
  const std::size_t n = q.size();
  if (alpha0.size() != n) throw InputError("solve_delta_full: length mismatch");
  const NuBoxConstraints c{nu_to, box_upper, nu_to};
  c.validate(n);
  std::vector<double> zero(n, 0.0);
  if (delta_feasible(alpha0, zero, nu_to, box_upper)) return zero;

  const auto f = multiply(q, alpha0);
  const auto start = project(alpha0, c);
  const auto sol = dcdm_solve(q, f, c, start, {eps, 10000});
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = sol.alpha[i] - alpha0[i];
  return delta;
}

std::vector<double> solve_delta_warm(const SymmetricOperator& q, std::span<const double> alpha_k,
                                     std::span<const double> delta_k, double nu_next,
                                     double box_upper, double eps) {
  const std::size_t n = q.size();
  require_same_length(alpha_k, delta_k, "solve_delta_warm");
  if (alpha_k.size() != n) throw InputError("solve_delta_warm: oracle size mismatch");
  NuBoxConstraints{nu_next, box_upper, nu_next}.validate(n);
  if (delta_feasible(alpha_k, delta_k, nu_next, box_upper)) {
    return {delta_k.begin(), delta_k.end()};
  }

  const auto cand = sum_of(alpha_k, delta_k);
  std::vector<char> is_released(n, 0);
  double frozen_sum = 0.0;
  auto released = box_violators(cand, box_upper, is_released, frozen_sum);
  release_until(
      cand, released, is_released, frozen_sum, [&](std::size_t i) { return box_upper - cand[i]; },
      [&](double fs, std::size_t count) {
        return fs + static_cast<double>(count) * box_upper >= nu_next;
      });

  const double floor = std::max(0.0, nu_next - frozen_sum);
  const NuBoxConstraints c{nu_next, box_upper,
                           std::min(floor, static_cast<double>(released.size()) * box_upper)};
  const auto f = partial_linear_term(q, alpha_k, cand, released, is_released);
  std::vector<double> start(released.size());
  for (std::size_t k = 0; k < released.size(); ++k) start[k] = cand[released[k]];
  start = project(start, c);
  const SubmatrixView sub(q, released);
  const auto sol = dcdm_solve(sub, f, c, start, {eps, 10000});
  return scatter_delta(alpha_k, cand, released, sol.alpha);
}

std::vector<double> solve_delta_full_oc(const SymmetricOperator& h,
                                        std::span<const double> alpha0, double box_upper,
                                        double eps) {
  const std::size_t n = h.size();
  if (alpha0.size() != n) throw InputError("solve_delta_full_oc: length mismatch");
  const SimplexBoxConstraints c{1.0, box_upper};
  c.validate(n);
  std::vector<double> zero(n, 0.0);
  if (delta_feasible_oc(alpha0, zero, box_upper)) return zero;

  const auto f = multiply(h, alpha0);
  const auto start = project(alpha0, c);
  const auto sol = smo_equality_solve(h, f, c, start, {eps, 10000});
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = sol.alpha[i] - alpha0[i];
  return delta;
}

std::vector<double> solve_delta_warm_oc(const SymmetricOperator& h,
                                        std::span<const double> alpha_k,
                                        std::span<const double> delta_k, double box_upper,
                                        double eps) {
  const std::size_t n = h.size();
  require_same_length(alpha_k, delta_k, "solve_delta_warm_oc");
  if (alpha_k.size() != n) throw InputError("solve_delta_warm_oc: oracle size mismatch");
  SimplexBoxConstraints{1.0, box_upper}.validate(n);
  if (delta_feasible_oc(alpha_k, delta_k, box_upper)) return {delta_k.begin(), delta_k.end()};

  const auto cand = sum_of(alpha_k, delta_k);
  std::vector<char> is_released(n, 0);
  double frozen_sum = 0.0;
  auto released = box_violators(cand, box_upper, is_released, frozen_sum);
  const double fs0 = frozen_sum + static_cast<double>(released.size()) * box_upper;
  if (fs0 < 1.0) {
    // Not enough room under the box: release the coordinates that can grow most.
    release_until(
        cand, released, is_released, frozen_sum,
        [&](std::size_t i) { return box_upper - cand[i]; },
        [&](double fs, std::size_t count) {
          return fs + static_cast<double>(count) * box_upper >= 1.0;
        });
  }
  if (frozen_sum > 1.0) {
    // Too much frozen mass: release the largest coordinates so they can shrink.
    release_until(
        cand, released, is_released, frozen_sum, [&](std::size_t i) { return cand[i]; },
        [&](double fs, std::size_t) { return fs <= 1.0; });
  }

  const double cap = static_cast<double>(released.size()) * box_upper;
  const SimplexBoxConstraints c{std::clamp(1.0 - frozen_sum, 0.0, cap), box_upper};
  const auto f = partial_linear_term(h, alpha_k, cand, released, is_released);
  std::vector<double> start(released.size());
  for (std::size_t k = 0; k < released.size(); ++k) start[k] = cand[released[k]];
  start = project(start, c);
  const SubmatrixView sub(h, released);
  const auto sol = smo_equality_solve(sub, f, c, start, {eps, 10000});
  return scatter_delta(alpha_k, cand, released, sol.alpha);
}

SafeBall make_ball(const SymmetricOperator& q, std::span<const double> alpha0,
                   std::span<const double> delta, double nu_from, double nu_to, double slack,
                   std::span<const double> q_alpha0) {
  const std::size_t n = q.size();
  require_same_length(alpha0, delta, "make_ball");
  if (alpha0.size() != n) throw InputError("make_ball: oracle size mismatch");
  std::vector<double> computed;
  if (q_alpha0.empty()) {
    computed = multiply(q, alpha0);
    q_alpha0 = computed;
  }
  const auto qd = multiply(q, delta);

  SafeBall ball;
  ball.nu_from = nu_from;
  ball.nu_to = nu_to;
  ball.slack = std::max(slack, 0.0);
  ball.beta.resize(n);
  ball.center_score.resize(n);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ball.beta[i] = alpha0[i] + 0.5 * delta[i];
    ball.center_score[i] = q_alpha0[i] + 0.5 * qd[i];
    r += 0.25 * delta[i] * qd[i] + q_alpha0[i] * delta[i];
  }
  ball.radius_sq = std::max(r, 0.0);
  return ball;
}

ScoreBounds score_bounds(const SymmetricOperator& q, const SafeBall& ball) {
  const std::size_t n = q.size();
  if (ball.beta.size() != n) throw InputError("score_bounds: ball size mismatch");
  ScoreBounds b;
  b.center_score = ball.center_score.size() == n ? ball.center_score : multiply(q, ball.beta);
  b.self_norm.resize(n);
  b.lower.resize(n);
  b.upper.resize(n);
  const double root_r = std::sqrt(ball.effective_radius_sq());
  for (std::size_t i = 0; i < n; ++i) {
    b.self_norm[i] = std::sqrt(std::max(q.diag(i), 0.0));
    const double w = root_r * b.self_norm[i];
    b.lower[i] = b.center_score[i] - w;
    b.upper[i] = b.center_score[i] + w;
  }
  return b;
}

double kth_largest(std::span<const double> values, std::size_t k) {
  if (values.empty()) throw InputError("kth_largest: empty input");
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::vector<double> v(values.begin(), values.end());
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(v.begin(), nth, v.end(), std::greater<>());
  return *nth;
}

std::pair<double, double> rho_bounds(const ScoreBounds& bounds, double nu_to, std::size_t l,
                                     bool nonnegative) {
  if (l == 0 || bounds.lower.size() != l || bounds.upper.size() != l) {
    throw InputError("rho_bounds: size mismatch");
  }
  const double n = static_cast<double>(l);
  const double i_star = std::clamp(n - nu_to * n, 0.0, n);
  // At most i* margins exceed rho and at most l - i* fall below it, so
  // d(ceil i*) >= rho >= d(floor i* + 1). The lower index is floor + 1 rather
  // than ceil: the two differ exactly when i* is an integer, where ceil is
  // one short. The tolerance keeps an integer i* computed as k - 1e-13 safe.
  const auto hi_k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(i_star)));
  const auto lo_k = std::min<std::size_t>(
      l, static_cast<std::size_t>(std::floor(i_star + 1e-9 * std::max(1.0, n))) + 1);
  double rho_upper = kth_largest(bounds.upper, hi_k);
  double rho_lower = kth_largest(bounds.lower, lo_k);
  if (nonnegative) {
    rho_upper = std::max(rho_upper, 0.0);
    rho_lower = std::max(rho_lower, 0.0);
  }
  return {rho_lower, rho_upper};
}

constexpr double kScreenGuard = 1e-10;

ScreenOutcome screen(const ScoreBounds& bounds, double rho_lower, double rho_upper,
                     double box_upper) {
  const std::size_t n = bounds.lower.size();
  ScreenOutcome out;
  out.box_upper = box_upper;
  out.rho_lower = rho_lower;
  out.rho_upper = rho_upper;
  out.fixed_values.assign(n, 0.0);
  // Margins are bounded by max Q_ii; a bound that clears rho only by roundoff
  // (degenerate w = 0 optima put every score at ~1e-14) must not fix anything.
  double scale = 1.0;
  for (double s : bounds.self_norm) scale = std::max(scale, s * s);
  const double guard = kScreenGuard * scale;
  for (std::size_t i = 0; i < n; ++i) {
    if (bounds.lower[i] > rho_upper + guard) {
      out.fixed_zero.push_back(i);
    } else if (bounds.upper[i] < rho_lower - guard) {
      out.fixed_upper.push_back(i);
      out.fixed_values[i] = box_upper;
    } else {
      out.survivors.push_back(i);
    }
  }
  out.screening_ratio =
      n == 0 ? 0.0
             : static_cast<double>(out.fixed_zero.size() + out.fixed_upper.size()) /
                   static_cast<double>(n);
  return out;
}

std::vector<double> fixed_linear_term(const SymmetricOperator& q, const ScreenOutcome& outcome) {
  std::vector<double> f(outcome.survivors.size(), 0.0);
  for (std::size_t j : outcome.fixed_upper) {
    const double a = outcome.fixed_values[j];
    if (a == 0.0) continue;
    const auto r = q.row(j);
    for (std::size_t k = 0; k < outcome.survivors.size(); ++k) f[k] += r[outcome.survivors[k]] * a;
  }
  return f;
}

ReducedProblem reduced_problem(const SymmetricOperator& q, const ScreenOutcome& outcome,
                               double nu_to, std::size_t l) {
  if (q.size() != l || outcome.size() != l) throw InputError("reduced_problem: size mismatch");
  ReducedProblem red;
  red.q1 = std::make_unique<SubmatrixView>(q, outcome.survivors);
  red.f = fixed_linear_term(q, outcome);
  for (std::size_t j : outcome.fixed_upper) red.fixed_mass += outcome.fixed_values[j];
  const double upper = 1.0 / static_cast<double>(l);
  const double cap = static_cast<double>(outcome.survivors.size()) * upper;
  red.constraints = {nu_to, upper, std::clamp(nu_to - red.fixed_mass, 0.0, cap)};
  return red;
}

std::vector<double> combine(const ScreenOutcome& outcome, std::span<const double> survivor_alpha) {
  if (survivor_alpha.size() != outcome.survivors.size()) {
    throw InputError("combine: survivor count mismatch");
  }
  std::vector<double> alpha = outcome.fixed_values;
  for (std::size_t k = 0; k < survivor_alpha.size(); ++k) {
    alpha[outcome.survivors[k]] = survivor_alpha[k];
  }
  return alpha;
}

double PathResult::mean_screening_ratio() const {
  if (steps.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t k = 1; k < steps.size(); ++k) s += steps[k].screening_ratio;
  return s / static_cast<double>(steps.size() - 1);
}

double PathResult::total_wall_ms() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.wall_ms;
  return s;
}

void check_nu_grid(std::span<const double> nu_grid) {
  if (nu_grid.empty()) throw InputError("nu grid is empty");
  for (std::size_t k = 0; k < nu_grid.size(); ++k) {
    if (!std::isfinite(nu_grid[k])) throw InputError("nu grid has a non-finite value");
    if (k > 0 && !(nu_grid[k] > nu_grid[k - 1])) {
      throw InputError("nu grid must be strictly ascending");
    }
  }
}

namespace {

PathStep record(double nu, std::vector<double> alpha, const std::vector<double>& q_alpha,
                const DualSolution& sol, double upper) {
  PathStep st;
  st.nu = nu;
  double quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) quad += alpha[i] * q_alpha[i];
  st.objective = 0.5 * quad;
  st.rho = recover_rho(alpha, q_alpha, nu, upper, 1e-6 * upper);
  st.sweeps = sol.sweeps;
  st.converged = sol.converged;
  st.kkt_violation = kkt_violation(alpha, q_alpha, NuBoxConstraints{nu, upper, nu});
  st.n_survivors = alpha.size();
  st.alpha = std::move(alpha);
  return st;
}

}  // namespace

PathResult solve_path(const GramOracle& q, std::span<const double> nu_grid,
                      const PathOptions& options) {
  if (q.mode() != GramMode::labeled) throw InputError("solve_path needs a labeled Gram oracle");
  check_nu_grid(nu_grid);
  for (double nu : nu_grid) check_nu_svm_problem(q.data(), nu);

  const std::size_t l = q.size();
  const double upper = 1.0 / static_cast<double>(l);
  PathResult path;
  path.screening = options.screening;
  path.kernel = q.spec();

  std::vector<double> alpha;
  std::vector<double> q_alpha;
  std::vector<double> delta_prev;
  for (std::size_t k = 0; k < nu_grid.size(); ++k) {
    const double nu = nu_grid[k];
    const auto t0 = std::chrono::steady_clock::now();
    if (k == 0 || !options.screening) {
      auto sol = dcdm_solve(q, {}, NuBoxConstraints::for_nu_svm(nu, l), {}, options.solver);
      const double ms = elapsed_ms(t0);
      alpha = sol.alpha;
      q_alpha = sol.gradient;  // f = 0, so the gradient is Q alpha
      auto st = record(nu, alpha, q_alpha, sol, upper);
      st.wall_ms = ms;
      path.steps.push_back(std::move(st));
      continue;
    }

    const double nu_from = nu_grid[k - 1];
    auto delta = (k == 1 || options.delta == DeltaStrategy::full)
                     ? solve_delta_full(q, alpha, nu, upper, options.solver.eps)
                     : solve_delta_warm(q, alpha, delta_prev, nu, upper, options.solver.eps);
    const double slack = frank_wolfe_gap(alpha, q_alpha, NuBoxConstraints{nu_from, upper, nu_from});
    const auto ball = make_ball(q, alpha, delta, nu_from, nu, slack, q_alpha);
    const auto bounds = score_bounds(q, ball);
    const auto [rho_lo, rho_hi] = rho_bounds(bounds, nu, l, true);
    const auto outcome = screen(bounds, rho_lo, rho_hi, upper);
    const auto red = reduced_problem(q, outcome, nu, l);

    std::vector<double> start;
    if (options.warm_start_reduced && !outcome.survivors.empty()) {
      start.reserve(outcome.survivors.size());
      for (std::size_t i : outcome.survivors) start.push_back(alpha[i]);
      start = project(start, red.constraints);
    }
    const auto sol = dcdm_solve(*red.q1, red.f, red.constraints, start, options.solver);
    auto next = combine(outcome, sol.alpha);
    q_alpha = multiply(q, next);
    const double ms = elapsed_ms(t0);

    auto st = record(nu, next, q_alpha, sol, upper);
    st.wall_ms = ms;
    st.screening_ratio = outcome.screening_ratio;
    st.n_fixed_zero = outcome.fixed_zero.size();
    st.n_fixed_upper = outcome.fixed_upper.size();
    st.n_survivors = outcome.survivors.size();
    st.radius_sq = ball.effective_radius_sq();
    st.rho_lower = rho_lo;
    st.rho_upper = rho_hi;
    path.steps.push_back(std::move(st));

    alpha = std::move(next);
    delta_prev = std::move(delta);
  }
  return path;
}

PathResult solve_path(std::shared_ptr<const Dataset> data, const KernelSpec& kernel,
                      std::span<const double> nu_grid, const PathOptions& options) {
  if (!data) throw InputError("solve_path: null dataset");
  const GramOracle q(std::move(data), kernel, GramMode::labeled);
  return solve_path(q, nu_grid, options);
}

NuSvmModel model_at(const GramOracle& q, const PathStep& step) {
  return make_nu_model(q, step.nu, step.alpha);
}

std::string path_to_json(const PathResult& path) {
  auto records = nlohmann::json::array();
  for (const auto& st : path.steps) {
    records.push_back({{"nu", st.nu},
                       {"screening_ratio", st.screening_ratio},
                       {"objective", st.objective},
                       {"wall_ms", st.wall_ms},
                       {"n_survivors", st.n_survivors},
                       {"n_fixed_zero", st.n_fixed_zero},
                       {"n_fixed_upper", st.n_fixed_upper},
                       {"rho", st.rho},
                       {"radius_sq", st.radius_sq},
                       {"sweeps", st.sweeps},
                       {"converged", st.converged},
                       {"kkt_violation", st.kkt_violation}});
  }
  return records.dump(2);
}

}  // namespace srbo
