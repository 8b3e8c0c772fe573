#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srbo/kernel.hpp"
#include "srbo/nusvm.hpp"
#include "srbo/qp.hpp"

namespace srbo {

/**
 * Ball in feature space that contains the optimum at `nu_to`, described by
 * its kernel coefficients: center c = Z^T beta with beta = alpha0 + delta/2
 * and squared radius r = 1/4 d^T Q d + alpha0^T Q d.
 *
 * `slack` enlarges the radius to cover an alpha0 that is only approximately
 * optimal at `nu_from` (it is the Frank-Wolfe gap of alpha0 there). It is
 * zero for an exact alpha0.
 */
struct SafeBall {
  std::vector<double> beta;
  double radius_sq = 0.0;
  double slack = 0.0;
  double nu_from = 0.0;
  double nu_to = 0.0;
  /// Q beta, cached because every bound needs it.
  std::vector<double> center_score;

  double effective_radius_sq() const { return std::max(radius_sq, 0.0) + std::max(slack, 0.0); }
};

struct ScoreBounds {
  std::vector<double> center_score;
  std::vector<double> self_norm;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct ScreenOutcome {
  std::vector<std::size_t> fixed_zero;
  std::vector<std::size_t> fixed_upper;
  std::vector<std::size_t> survivors;
  /// Value for every index; survivors hold 0 here until combined.
  std::vector<double> fixed_values;
  double box_upper = 0.0;
  double screening_ratio = 0.0;
  double rho_lower = 0.0;
  double rho_upper = 0.0;

  std::size_t size() const noexcept { return fixed_values.size(); }
};

/// r(delta), clamped at 0.
double radius_of(const SymmetricOperator& q, std::span<const double> alpha0,
                 std::span<const double> delta);

/// alpha0 + delta in {e^T a >= nu_to, 0 <= a <= box_upper} within 1e-10.
bool delta_feasible(std::span<const double> alpha0, std::span<const double> delta, double nu_to,
                    double box_upper);
/// alpha0 + delta in {e^T a = 1, 0 <= a <= box_upper} within 1e-10.
bool delta_feasible_oc(std::span<const double> alpha0, std::span<const double> delta,
                       double box_upper);

/// argmin r(delta) over feasible delta. Minimizing r over a = alpha0 + delta
/// is the dual QP with linear term Q alpha0, so this reuses dcdm_solve.
std::vector<double> solve_delta_full(const SymmetricOperator& q, std::span<const double> alpha0,
                                     double nu_to, double box_upper, double eps = 1e-8);

/**
 * Cheaper delta for the next grid point: keeps the previous delta on every
 * coordinate where alpha_k + delta_k still satisfies the new constraints
 * and re-optimizes only the rest. When the kept coordinates cannot satisfy
 * the sum constraint, the coordinates with the most headroom are released
 * too, largest first.
 */
std::vector<double> solve_delta_warm(const SymmetricOperator& q, std::span<const double> alpha_k,
                                     std::span<const double> delta_k, double nu_next,
                                     double box_upper, double eps = 1e-8);

/// Equality-constrained counterparts for the one-class dual.
std::vector<double> solve_delta_full_oc(const SymmetricOperator& h,
                                        std::span<const double> alpha0, double box_upper,
                                        double eps = 1e-8);
std::vector<double> solve_delta_warm_oc(const SymmetricOperator& h,
                                        std::span<const double> alpha_k,
                                        std::span<const double> delta_k, double box_upper,
                                        double eps = 1e-8);

/// Builds the ball; `q_alpha0` may be passed to avoid recomputing Q alpha0.
SafeBall make_ball(const SymmetricOperator& q, std::span<const double> alpha0,
                   std::span<const double> delta, double nu_from, double nu_to,
                   double slack = 0.0, std::span<const double> q_alpha0 = {});

ScoreBounds score_bounds(const SymmetricOperator& q, const SafeBall& ball);

/// k-th largest value (1-based); k is clamped to [1, n].
double kth_largest(std::span<const double> values, std::size_t k);

/**
 * i* = l - nu_to l; rho_upper is the floor(i*)-th largest upper bound and
 * rho_lower the (floor(i*) + 1)-th largest lower bound, indices clamped to
 * [1, l]. For fractional i* the lower index equals ceil(i*). With
 * `nonnegative` both are clamped at 0 (the nu-SVM primal has rho >= 0).
 */
std::pair<double, double> rho_bounds(const ScoreBounds& bounds, double nu_to, std::size_t l,
                                     bool nonnegative = true);

/// lower > rho_upper fixes alpha at 0, upper < rho_lower fixes it at box_upper.
/// Both tests carry a guard of 1e-10 * max(1, max Q_ii) against roundoff.
ScreenOutcome screen(const ScoreBounds& bounds, double rho_lower, double rho_upper,
                     double box_upper);

struct ReducedProblem {
  std::unique_ptr<SubmatrixView> q1;
  std::vector<double> f;
  NuBoxConstraints constraints;
  double fixed_mass = 0.0;
};

/// Survivor QP: Q1 = Q[S,S], f = Q[S,D] alpha_D, floor = nu_to - e^T alpha_D.
ReducedProblem reduced_problem(const SymmetricOperator& q, const ScreenOutcome& outcome,
                               double nu_to, std::size_t l);

/// f = Q[S,D] alpha_D for any outcome.
std::vector<double> fixed_linear_term(const SymmetricOperator& q, const ScreenOutcome& outcome);

/// Fixed values with the survivor solution scattered back in.
std::vector<double> combine(const ScreenOutcome& outcome, std::span<const double> survivor_alpha);

enum class DeltaStrategy { warm, full };

struct PathOptions {
  bool screening = true;
  DeltaStrategy delta = DeltaStrategy::warm;
  SolverOptions solver{};
  /// Start reduced solves from alpha_k restricted to the survivors instead
  /// of the solver's default point.
  bool warm_start_reduced = false;
};

struct PathStep {
  double nu = 0.0;
  std::vector<double> alpha;
  double objective = 0.0;
  double rho = 0.0;
  double screening_ratio = 0.0;
  std::size_t n_fixed_zero = 0;
  std::size_t n_fixed_upper = 0;
  std::size_t n_survivors = 0;
  double radius_sq = 0.0;
  double rho_lower = 0.0;
  double rho_upper = 0.0;
  double wall_ms = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  /// KKT violation of the combined alpha on the full problem.
  double kkt_violation = 0.0;
};

struct PathResult {
  bool screening = false;
  KernelSpec kernel;
  std::vector<PathStep> steps;

  double mean_screening_ratio() const;
  double total_wall_ms() const;
};

/// Throws InputError unless the grid is nonempty and strictly ascending.
void check_nu_grid(std::span<const double> nu_grid);

/**
 * nu path over an ascending grid. The first point is a full solve; with
 * screening on, each later point builds a ball from the previous solution,
 * screens, and solves only the survivors.
 */
PathResult solve_path(const GramOracle& q, std::span<const double> nu_grid,
                      const PathOptions& options = {});
PathResult solve_path(std::shared_ptr<const Dataset> data, const KernelSpec& kernel,
                      std::span<const double> nu_grid, const PathOptions& options = {});

NuSvmModel model_at(const GramOracle& q, const PathStep& step);

/// JSON array of {nu, screening_ratio, objective, wall_ms, n_survivors, ...}.
std::string path_to_json(const PathResult& path);

}  // namespace srbo
