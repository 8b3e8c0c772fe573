#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "srbo/kernel.hpp"

namespace srbo {

/// { a : e^T a >= linear_floor, 0 <= a <= upper }.
/// For a full nu-SVM dual: floor = nu, upper = 1/l. Reduced problems keep
/// upper = 1/l of the full problem and lower the floor by the fixed mass.
struct NuBoxConstraints {
  double nu = 0.0;
  double upper = 0.0;
  double linear_floor = 0.0;

  static NuBoxConstraints for_nu_svm(double nu, std::size_t l);
  /// Throws InputError if the set is empty for `n` variables.
  void validate(std::size_t n) const;
};

/// { a : e^T a = sum_target, 0 <= a <= upper }; the one-class dual uses
/// sum_target = 1 and upper = 1/(nu l).
struct SimplexBoxConstraints {
  double sum_target = 1.0;
  double upper = 0.0;

  static SimplexBoxConstraints for_one_class(double nu, std::size_t l);
  void validate(std::size_t n) const;
};

using DualConstraints = std::variant<NuBoxConstraints, SimplexBoxConstraints>;

struct SolverOptions {
  double eps = 1e-8;
  std::size_t max_sweeps = 10000;
};

/// Result of a dual solve of  min 1/2 a^T Q a + f^T a  over a constraint set.
struct DualSolution {
  std::vector<double> alpha;
  double objective = 0.0;
  std::size_t sweeps = 0;
  double max_projected_gradient = 0.0;
  bool converged = false;
  /// Objective before the first sweep, then after every sweep.
  std::vector<double> objective_trace;
  /// Q a + f at the returned alpha (recomputed from scratch).
  std::vector<double> gradient;
};

/**
 * Dual coordinate descent for the nu-shaped dual.
 *
 * Each sweep visits coordinates cyclically; coordinate i has the lower
 * bound max(0, floor - sum_{k != i} a_k) and the upper bound `upper`, its
 * projected gradient is clipped against whichever bounds are active and a
 * nonzero projected gradient above eps triggers the exact step 1/Q_ii.
 * When e^T a sits on the floor no single coordinate can move down, so each
 * sweep ends with a phase of two-coordinate moves along e_i - e_j (most
 * violating pair first). Stops when the projected gradient and the pair
 * violation are both <= eps.
 *
 * `f` and `alpha0` may be empty (zero linear term, default start
 * a_i = floor / n).
 */
DualSolution dcdm_solve(const SymmetricOperator& q, std::span<const double> f,
                        const NuBoxConstraints& constraints, std::span<const double> alpha0 = {},
                        const SolverOptions& options = {});

/**
 * Two-coordinate solver for the simplex-box dual: repeatedly moves mass
 * between the maximally violating pair with an exact line search. One sweep
 * is `n` pair updates. Default start a_i = sum_target / n.
 */
DualSolution smo_equality_solve(const SymmetricOperator& h, std::span<const double> f,
                                const SimplexBoxConstraints& constraints,
                                std::span<const double> alpha0 = {},
                                const SolverOptions& options = {});

struct SumConstraint {
  enum class Kind { at_least, equal };
  Kind kind = Kind::at_least;
  double value = 0.0;

  static SumConstraint at_least(double v) { return {Kind::at_least, v}; }
  static SumConstraint equal(double v) { return {Kind::equal, v}; }
};

/// Euclidean projection onto {0 <= p <= upper} intersected with the sum
/// constraint: p = clip(v + lambda e, 0, upper) with lambda found by
/// bisection and then solved exactly on its linear piece.
std::vector<double> project_box_linear(std::span<const double> v, double upper, SumConstraint sum);

std::vector<double> project(std::span<const double> v, const DualConstraints& constraints);

/// Projected gradient with step 1/L (L from 20 power iterations, x1.1),
/// stopping when |a - P(a - grad)|_inf <= eps. Intended as a slow but
/// independent reference for the other solvers.
DualSolution pg_reference_solve(const SymmetricOperator& q, std::span<const double> f,
                                const DualConstraints& constraints, double eps = 1e-10,
                                std::size_t max_iters = 2'000'000,
                                std::span<const double> alpha0 = {});

/// 1/2 a^T Q a + f^T a.
double dual_objective(const SymmetricOperator& q, std::span<const double> f,
                      std::span<const double> alpha);

/// <g, a> - min_{b in set} <g, b>; nonnegative for feasible a, zero at the
/// optimum when g is the gradient there.
double frank_wolfe_gap(std::span<const double> alpha, std::span<const double> gradient,
                       const DualConstraints& constraints);

/// Largest projected-gradient or pair violation of `alpha` given its gradient.
double kkt_violation(std::span<const double> alpha, std::span<const double> gradient,
                     const DualConstraints& constraints);

/// True iff alpha lies in the set within `tol` per coordinate and on the sum.
bool is_feasible(std::span<const double> alpha, const DualConstraints& constraints,
                 double tol = 1e-10);

}  // namespace srbo
