#include "srbo/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "srbo/error.hpp"

namespace srbo {

NuBoxConstraints NuBoxConstraints::for_nu_svm(double nu, std::size_t l) {
  if (l == 0) throw InputError("nu-SVM dual needs at least one sample");
  return {nu, 1.0 / static_cast<double>(l), nu};
}

void NuBoxConstraints::validate(std::size_t n) const {
  if (!(upper >= 0.0) || !std::isfinite(upper)) throw InputError("box upper bound must be >= 0");
  if (!std::isfinite(linear_floor)) throw InputError("linear floor must be finite");
  if (linear_floor > static_cast<double>(n) * upper * (1.0 + 1e-12) + 1e-15) {
    throw InputError("infeasible: floor " + std::to_string(linear_floor) + " exceeds n * upper");
  }
}

SimplexBoxConstraints SimplexBoxConstraints::for_one_class(double nu, std::size_t l) {
  if (l == 0) throw InputError("one-class dual needs at least one sample");
  if (!(nu > 0.0 && nu <= 1.0)) throw InputError("one-class nu must be in (0, 1]");
  return {1.0, 1.0 / (nu * static_cast<double>(l))};
}

void SimplexBoxConstraints::validate(std::size_t n) const {
  if (!(upper >= 0.0) || !std::isfinite(upper)) throw InputError("box upper bound must be >= 0");
  if (!(sum_target >= -1e-15) ||
      sum_target > static_cast<double>(n) * upper * (1.0 + 1e-12) + 1e-15) {
    throw InputError("infeasible: sum target outside [0, n * upper]");
  }
}

namespace {

std::vector<double> gradient_of(const SymmetricOperator& q, std::span<const double> f,
                                std::span<const double> alpha) {
  auto g = multiply(q, alpha);
  if (!f.empty()) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += f[i];
  }
  return g;
}

double objective_from_gradient(std::span<const double> alpha, std::span<const double> grad,
                               std::span<const double> f) {
  // 1/2 a^T Q a + f^T a = 1/2 a^T (grad + f)
  double s = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    s += alpha[i] * (grad[i] + (f.empty() ? 0.0 : f[i]));
  }
  return 0.5 * s;
}

void check_inputs(const SymmetricOperator& q, std::span<const double> f,
                  std::span<const double> alpha0) {
  if (!f.empty() && f.size() != q.size()) throw InputError("linear term length mismatch");
  if (!alpha0.empty() && alpha0.size() != q.size()) throw InputError("alpha0 length mismatch");
  for (double v : f) {
    if (!std::isfinite(v)) throw NumericError("non-finite linear term");
  }
}

double boundary_tol(double upper) { return 1e-12 * std::max(upper, 1e-300); }

// Projected gradient of one coordinate whose movement is limited to [low, upper].
double projected(double g, double a, double low, double upper, double btol) {
  const bool can_down = a > low + btol;
  const bool can_up = a < upper - btol;
  if (can_down && can_up) return g;
  if (can_up) return std::min(g, 0.0);
  if (can_down) return std::max(g, 0.0);
  return 0.0;
}

struct Pair {
  std::size_t up = 0;    // receives mass, smallest gradient among a < upper
  std::size_t down = 0;  // gives mass, largest gradient among a > 0
  double violation = 0.0;
  bool valid = false;
};

Pair most_violating_pair(std::span<const double> alpha, std::span<const double> grad,
                         double upper, double btol) {
  Pair p;
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < upper - btol && grad[i] < gmin) {
      gmin = grad[i];
      p.up = i;
    }
    if (alpha[i] > btol && grad[i] > gmax) {
      gmax = grad[i];
      p.down = i;
    }
  }
  if (std::isfinite(gmin) && std::isfinite(gmax) && p.up != p.down) {
    p.violation = gmax - gmin;
    p.valid = true;
  }
  return p;
}

// Second-order working set choice: `up` is the smallest gradient among
// coordinates that can grow, `down` maximizes the guaranteed decrease
// (g_down - g_up)^2 / eta among coordinates that can shrink. The reported
// violation is still the first-order max gap.
Pair second_order_pair(const SymmetricOperator& q, std::span<const double> alpha,
                       std::span<const double> grad, double upper, double btol) {
  Pair p = most_violating_pair(alpha, grad, upper, btol);
  if (!p.valid) return p;
  const double gmin = grad[p.up];
  const auto ri = q.row(p.up);
  const double qii = ri[p.up];
  double best = -1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (j == p.up || !(alpha[j] > btol)) continue;
    const double b = grad[j] - gmin;
    if (b <= 0.0) continue;
    const double eta = std::max(qii + q.diag(j) - 2.0 * ri[j], 1e-12);
    const double gain = b * b / eta;
    if (gain > best) {
      best = gain;
      p.down = j;
    }
  }
  return p;
}

// Moves t along e_up - e_down with an exact line search; returns false if
// nothing moved.
bool pair_step(const SymmetricOperator& q, std::vector<double>& alpha, std::vector<double>& grad,
               const Pair& p, double upper) {
  const std::size_t i = p.up;
  const std::size_t j = p.down;
  const auto ri = q.row(i);
  const auto rj = q.row(j);
  const double eta = std::max(ri[i] + rj[j] - 2.0 * ri[j], 1e-12);
  const double room = std::min(upper - alpha[i], alpha[j]);
  if (room <= 0.0) return false;
  double t = (grad[j] - grad[i]) / eta;
  if (!(t > 0.0)) return false;
  bool clipped = false;
  if (t >= room) {
    t = room;
    clipped = true;
  }
  if (clipped && upper - alpha[i] <= alpha[j]) {
    alpha[j] -= upper - alpha[i];
    alpha[i] = upper;
  } else if (clipped) {
    alpha[i] += alpha[j];
    alpha[j] = 0.0;
  } else {
    alpha[i] += t;
    alpha[j] -= t;
  }
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += t * (ri[k] - rj[k]);
  return true;
}

double nu_violation(std::span<const double> alpha, std::span<const double> grad,
                    const NuBoxConstraints& c) {
  const double btol = boundary_tol(c.upper);
  const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double low = std::max(0.0, c.linear_floor - (sum - alpha[i]));
    worst = std::max(worst, std::abs(projected(grad[i], alpha[i], low, c.upper, btol)));
  }
  const auto p = most_violating_pair(alpha, grad, c.upper, btol);
  if (p.valid) worst = std::max(worst, p.violation);
  return worst;
}

double simplex_violation(std::span<const double> alpha, std::span<const double> grad,
                         const SimplexBoxConstraints& c) {
  const auto p = most_violating_pair(alpha, grad, c.upper, boundary_tol(c.upper));
  return p.valid ? std::max(p.violation, 0.0) : 0.0;
}

std::vector<double> start_point(std::size_t n, double mass, std::span<const double> alpha0,
                                const DualConstraints& c) {
  if (!alpha0.empty()) {
    if (!is_feasible(alpha0, c, 1e-9)) throw InputError("alpha0 is not feasible");
    std::vector<double> a(alpha0.begin(), alpha0.end());
    const double upper = std::visit([](const auto& k) { return k.upper; }, c);
    for (double& v : a) v = std::clamp(v, 0.0, upper);
    return a;
  }
  return std::vector<double>(n, n == 0 ? 0.0 : std::max(mass, 0.0) / static_cast<double>(n));
}

}  // namespace

double dual_objective(const SymmetricOperator& q, std::span<const double> f,
                      std::span<const double> alpha) {
  const auto g = gradient_of(q, f, alpha);
  return objective_from_gradient(alpha, g, f);
}

DualSolution dcdm_solve(const SymmetricOperator& q, std::span<const double> f,
                        const NuBoxConstraints& c, std::span<const double> alpha0,
                        const SolverOptions& options) {
  const std::size_t n = q.size();
  check_inputs(q, f, alpha0);
  c.validate(n);

  DualSolution sol;
  auto& alpha = sol.alpha;
  alpha = start_point(n, c.linear_floor, alpha0, c);
  if (n == 0) {
    sol.converged = true;
    sol.objective_trace.push_back(0.0);
    return sol;
  }
  auto grad = gradient_of(q, f, alpha);
  double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  const double U = c.upper;
  const double btol = boundary_tol(U);
  sol.objective_trace.push_back(objective_from_gradient(alpha, grad, f));

  if (nu_violation(alpha, grad, c) <= options.eps) {
    sol.sweeps = 1;
    sol.converged = true;
    sol.objective_trace.push_back(sol.objective_trace.back());
  }

  while (!sol.converged && sol.sweeps < options.max_sweeps) {
    ++sol.sweeps;
    for (std::size_t i = 0; i < n; ++i) {
      const double low = std::max(0.0, c.linear_floor - (sum - alpha[i]));
      const double pg = projected(grad[i], alpha[i], low, U, btol);
      if (std::abs(pg) <= options.eps) continue;
      const double qii = q.diag(i);
      double next;
      if (qii > 1e-12) {
        next = std::clamp(alpha[i] - grad[i] / qii, low, U);
      } else {
        next = grad[i] > 0.0 ? low : U;  // objective is linear along this coordinate
      }
      const double d = next - alpha[i];
      if (d == 0.0) continue;
      alpha[i] = next;
      sum += d;
      const auto r = q.row(i);
      for (std::size_t k = 0; k < n; ++k) grad[k] += d * r[k];
    }

    for (std::size_t moves = 0; moves < n; ++moves) {
      const auto p = second_order_pair(q, alpha, grad, U, btol);
      if (!p.valid || p.violation <= options.eps) break;
      if (!pair_step(q, alpha, grad, p, U)) break;
    }
    sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    sol.objective_trace.push_back(objective_from_gradient(alpha, grad, f));

    if (nu_violation(alpha, grad, c) <= options.eps) {
      // Confirm on a drift-free gradient before declaring convergence.
      grad = gradient_of(q, f, alpha);
      if (nu_violation(alpha, grad, c) <= options.eps) sol.converged = true;
    }
  }

  sol.gradient = gradient_of(q, f, alpha);
  sol.objective = objective_from_gradient(alpha, sol.gradient, f);
  sol.max_projected_gradient = nu_violation(alpha, sol.gradient, c);
  for (double v : alpha) {
    if (!std::isfinite(v)) throw NumericError("dcdm: non-finite iterate");
  }
  return sol;
}

DualSolution smo_equality_solve(const SymmetricOperator& h, std::span<const double> f,
                                const SimplexBoxConstraints& c, std::span<const double> alpha0,
                                const SolverOptions& options) {
  const std::size_t n = h.size();
  check_inputs(h, f, alpha0);
  c.validate(n);

  DualSolution sol;
  auto& alpha = sol.alpha;
  alpha = start_point(n, c.sum_target, alpha0, c);
  if (n == 0) {
    sol.converged = true;
    sol.objective_trace.push_back(0.0);
    return sol;
  }
  auto grad = gradient_of(h, f, alpha);
  const double btol = boundary_tol(c.upper);
  sol.objective_trace.push_back(objective_from_gradient(alpha, grad, f));

  while (sol.sweeps < options.max_sweeps) {
    bool done = false;
    for (std::size_t it = 0; it < n; ++it) {
      const auto p = second_order_pair(h, alpha, grad, c.upper, btol);
      if (!p.valid || p.violation <= options.eps || !pair_step(h, alpha, grad, p, c.upper)) {
        done = true;
        break;
      }
    }
    ++sol.sweeps;
    sol.objective_trace.push_back(objective_from_gradient(alpha, grad, f));
    if (done) {
      grad = gradient_of(h, f, alpha);
      if (simplex_violation(alpha, grad, c) <= options.eps) {
        sol.converged = true;
        break;
      }
    }
  }

  sol.gradient = gradient_of(h, f, alpha);
  sol.objective = objective_from_gradient(alpha, sol.gradient, f);
  sol.max_projected_gradient = simplex_violation(alpha, sol.gradient, c);
  for (double v : alpha) {
    if (!std::isfinite(v)) throw NumericError("smo: non-finite iterate");
  }
  return sol;
}

std::vector<double> project_box_linear(std::span<const double> v, double upper, SumConstraint sum) {
  const std::size_t n = v.size();
  if (!(upper >= 0.0)) throw InputError("projection: upper must be >= 0");
  const double cap = static_cast<double>(n) * upper;
  if (sum.value > cap * (1.0 + 1e-12) + 1e-15 ||
      (sum.kind == SumConstraint::Kind::equal && sum.value < -1e-15)) {
    throw InputError("projection: empty constraint set");
  }
  const double target = std::clamp(sum.value, 0.0, cap);

  auto clipped_sum = [&](double lambda) {
    double s = 0.0;
    for (double x : v) s += std::clamp(x + lambda, 0.0, upper);
    return s;
  };
  auto at = [&](double lambda) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::clamp(v[i] + lambda, 0.0, upper);
    return p;
  };

  if (n == 0) return {};
  if (sum.kind == SumConstraint::Kind::at_least && clipped_sum(0.0) >= target) return at(0.0);

  double lo = -*std::max_element(v.begin(), v.end());
  double hi = upper - *std::min_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (clipped_sum(mid) < target ? lo : hi) = mid;
  }
  double lambda = 0.5 * (lo + hi);

  // Exact solve on the linear piece identified by the bracket.
  double fixed = 0.0;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (double x : v) {
    const double y = x + lambda;
    if (y >= upper) {
      fixed += upper;
    } else if (y > 0.0) {
      free_sum += x;
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (target - fixed - free_sum) / static_cast<double>(free_count);
    if (exact >= lo - 1e-12 * (1.0 + std::abs(lo)) && exact <= hi + 1e-12 * (1.0 + std::abs(hi))) {
      lambda = exact;
    }
  }
  return at(lambda);
}

std::vector<double> project(std::span<const double> v, const DualConstraints& constraints) {
  return std::visit(
      [&](const auto& c) -> std::vector<double> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NuBoxConstraints>) {
          return project_box_linear(v, c.upper, SumConstraint::at_least(c.linear_floor));
        } else {
          return project_box_linear(v, c.upper, SumConstraint::equal(c.sum_target));
        }
      },
      constraints);
}

DualSolution pg_reference_solve(const SymmetricOperator& q, std::span<const double> f,
                                const DualConstraints& constraints, double eps,
                                std::size_t max_iters, std::span<const double> alpha0) {
  const std::size_t n = q.size();
  check_inputs(q, f, alpha0);
  std::visit([n](const auto& c) { c.validate(n); }, constraints);

  DualSolution sol;
  if (n == 0) {
    sol.converged = true;
    return sol;
  }
  const double mass = std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NuBoxConstraints>) {
          return c.linear_floor;
        } else {
          return c.sum_target;
        }
      },
      constraints);
  auto alpha = alpha0.empty() ? project(start_point(n, mass, {}, constraints), constraints)
                              : start_point(n, mass, alpha0, constraints);

  // Largest eigenvalue by power iteration, padded.
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lmax = 0.0;
  for (int it = 0; it < 20; ++it) {
    auto y = multiply(q, x);
    const double norm = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (norm <= 0.0) break;
    lmax = norm;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  double lipschitz = lmax > 0.0 ? 1.1 * lmax : 1.0;

  auto grad = gradient_of(q, f, alpha);
  double obj = objective_from_gradient(alpha, grad, f);
  sol.objective_trace.push_back(obj);
  std::vector<double> trial(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) trial[i] = alpha[i] - grad[i];
    const auto unit = project(trial, constraints);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(alpha[i] - unit[i]));
    sol.max_projected_gradient = residual;
    if (residual <= eps) {
      sol.converged = true;
      break;
    }
    // Step 1/L; doubling L guards against an underestimated eigenvalue.
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = alpha[i] - grad[i] / lipschitz;
      auto next = project(trial, constraints);
      auto next_grad = gradient_of(q, f, next);
      const double next_obj = objective_from_gradient(next, next_grad, f);
      if (next_obj <= obj + 1e-14 * (1.0 + std::abs(obj)) || lipschitz > 1e12) {
        alpha = std::move(next);
        grad = std::move(next_grad);
        obj = next_obj;
        break;
      }
      lipschitz *= 2.0;
    }
    ++sol.sweeps;
    sol.objective_trace.push_back(obj);
  }
  sol.alpha = std::move(alpha);
  sol.gradient = gradient_of(q, f, sol.alpha);
  sol.objective = objective_from_gradient(sol.alpha, sol.gradient, f);
  return sol;
}

double frank_wolfe_gap(std::span<const double> alpha, std::span<const double> gradient,
                       const DualConstraints& constraints) {
  const std::size_t n = alpha.size();
  if (gradient.size() != n) throw InputError("frank_wolfe_gap: length mismatch");
  double current = 0.0;
  for (std::size_t i = 0; i < n; ++i) current += gradient[i] * alpha[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return gradient[a] < gradient[b]; });

  const bool equality = std::holds_alternative<SimplexBoxConstraints>(constraints);
  const double upper = std::visit([](const auto& c) { return c.upper; }, constraints);
  const double mass = equality ? std::get<SimplexBoxConstraints>(constraints).sum_target
                               : std::get<NuBoxConstraints>(constraints).linear_floor;

  // Greedy vertex: fill the cheapest coordinates up to `upper`; with an
  // inequality, every negative-gradient coordinate is worth filling anyway.
  double best = 0.0;
  double used = 0.0;
  for (std::size_t k : order) {
    const double g = gradient[k];
    double take = 0.0;
    if (!equality && g < 0.0) {
      take = upper;
    } else if (used < mass) {
      take = std::min(upper, mass - used);
    } else {
      break;
    }
    best += g * take;
    used += take;
  }
  return std::max(current - best, 0.0);
}

double kkt_violation(std::span<const double> alpha, std::span<const double> gradient,
                     const DualConstraints& constraints) {
  if (alpha.size() != gradient.size()) throw InputError("kkt_violation: length mismatch");
  return std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NuBoxConstraints>) {
          return nu_violation(alpha, gradient, c);
        } else {
          return simplex_violation(alpha, gradient, c);
        }
      },
      constraints);
}

bool is_feasible(std::span<const double> alpha, const DualConstraints& constraints, double tol) {
  const double upper = std::visit([](const auto& c) { return c.upper; }, constraints);
  double sum = 0.0;
  for (double a : alpha) {
    if (!std::isfinite(a) || a < -tol || a > upper + tol) return false;
    sum += a;
  }
  if (const auto* nu = std::get_if<NuBoxConstraints>(&constraints)) {
    return sum >= nu->linear_floor - tol;
  }
  return std::abs(sum - std::get<SimplexBoxConstraints>(constraints).sum_target) <= tol;
}

}  // namespace srbo
