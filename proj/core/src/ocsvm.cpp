#include "srbo/ocsvm.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "srbo/error.hpp"
#include "srbo/experiment.hpp"

namespace srbo {

void check_oc_problem(const Dataset& data, double nu) {
  if (data.rows() == 0) throw InputError("one-class SVM needs at least one sample");
  if (!(nu > 0.0 && nu <= 1.0)) {
    throw InputError("one-class nu=" + std::to_string(nu) + " outside (0, 1]");
  }
}

double recover_rho_oc(std::span<const double> alpha, std::span<const double> scores, double upper,
                      double alpha_tol) {
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double hi_bound = -std::numeric_limits<double>::infinity();
  double lo_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > alpha_tol && alpha[i] < upper - alpha_tol) {
      free_sum += scores[i];
      ++free_count;
    } else if (alpha[i] >= upper - alpha_tol) {
      hi_bound = std::max(hi_bound, scores[i]);
    } else {
      lo_bound = std::min(lo_bound, scores[i]);
    }
  }
  if (free_count > 0) return free_sum / static_cast<double>(free_count);
  if (std::isfinite(hi_bound) && std::isfinite(lo_bound)) return 0.5 * (hi_bound + lo_bound);
  if (std::isfinite(hi_bound)) return hi_bound;
  return std::isfinite(lo_bound) ? lo_bound : 0.0;
}

OcSvmModel make_oc_model(const GramOracle& h, double nu, std::vector<double> alpha,
                         const DualSolution* diagnostics) {
  OcSvmModel model;
  model.nu = nu;
  model.kernel = h.spec();
  model.data = h.data_handle();
  model.alpha = std::move(alpha);
  const auto s = multiply(h, model.alpha);
  double quad = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) quad += model.alpha[i] * s[i];
  model.objective = 0.5 * quad;
  const double upper = model.box_upper();
  model.rho = recover_rho_oc(model.alpha, s, upper, 1e-6 * upper);
  if (diagnostics) {
    model.sweeps = diagnostics->sweeps;
    model.converged = diagnostics->converged;
    model.max_projected_gradient = diagnostics->max_projected_gradient;
  }
  return model;
}

OcSvmModel train_full_oc(const GramOracle& h, double nu, const TrainOptions& options) {
  if (h.mode() != GramMode::unlabeled) throw InputError("train_full_oc needs an unlabeled oracle");
  check_oc_problem(h.data(), nu);
  const auto c = SimplexBoxConstraints::for_one_class(nu, h.size());
  DualSolution sol;
  if (options.solver == SolverKind::dcdm) {
    sol = smo_equality_solve(h, {}, c, {}, {options.eps, options.max_sweeps});
  } else {
    sol = pg_reference_solve(h, {}, c, options.eps);
  }
  return make_oc_model(h, nu, std::move(sol.alpha), &sol);
}

OcSvmModel train_full_oc(std::shared_ptr<const Dataset> data, const KernelSpec& kernel, double nu,
                         const TrainOptions& options) {
  if (!data) throw InputError("train_full_oc: null dataset");
  check_oc_problem(*data, nu);
  const GramOracle h(std::move(data), kernel, GramMode::unlabeled);
  return train_full_oc(h, nu, options);
}

std::vector<double> decision_oc(const OcSvmModel& model, const Dataset& probes) {
  const Dataset& train = *model.data;
  if (probes.cols() != train.cols()) {
    throw InputError("probe dimension " + std::to_string(probes.cols()) +
                     " does not match training dimension " + std::to_string(train.cols()));
  }
  std::vector<double> out(probes.rows(), 0.0);
  for (std::size_t p = 0; p < probes.rows(); ++p) {
    const auto x0 = probes.sample(p);
    double s = 0.0;
    for (std::size_t j = 0; j < model.alpha.size(); ++j) {
      if (model.alpha[j] != 0.0) s += model.alpha[j] * kernel_eval(model.kernel, train.sample(j), x0);
    }
    out[p] = s - model.rho;
  }
  return out;
}

std::vector<int> predict_oc(const OcSvmModel& model, const Dataset& probes) {
  const auto s = decision_oc(model, probes);
  std::vector<int> labels(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) labels[i] = s[i] >= 0.0 ? 1 : -1;
  return labels;
}

ScreenOutcome screen_oc(const SymmetricOperator& h, std::span<const double> alpha_k,
                        std::span<const double> delta, double nu_next, std::size_t l,
                        double slack, std::span<const double> h_alpha_k) {
  if (h.size() != l) throw InputError("screen_oc: oracle size mismatch");
  if (!(nu_next > 0.0 && nu_next <= 1.0)) throw InputError("screen_oc: nu outside (0, 1]");
  const double upper = 1.0 / (nu_next * static_cast<double>(l));
  if (!delta_feasible_oc(alpha_k, delta, upper)) {
    throw InputError("screen_oc: alpha_k + delta is not feasible for the new box");
  }
  const auto ball = make_ball(h, alpha_k, delta, 0.0, nu_next, slack, h_alpha_k);
  const auto bounds = score_bounds(h, ball);
  const auto [lo, hi] = rho_bounds(bounds, nu_next, l, false);
  return screen(bounds, lo, hi, upper);
}

namespace {

PathStep record_oc(double nu, std::vector<double> alpha, const std::vector<double>& h_alpha,
                   const DualSolution& sol) {
  const double upper = 1.0 / (nu * static_cast<double>(alpha.size()));
  PathStep st;
  st.nu = nu;
  double quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) quad += alpha[i] * h_alpha[i];
  st.objective = 0.5 * quad;
  st.rho = recover_rho_oc(alpha, h_alpha, upper, 1e-6 * upper);
  st.sweeps = sol.sweeps;
  st.converged = sol.converged;
  st.kkt_violation = kkt_violation(alpha, h_alpha, SimplexBoxConstraints{1.0, upper});
  st.n_survivors = alpha.size();
  st.alpha = std::move(alpha);
  return st;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PathResult solve_path_oc(const GramOracle& h, std::span<const double> nu_grid,
                         const PathOptions& options) {
  if (h.mode() != GramMode::unlabeled) throw InputError("solve_path_oc needs an unlabeled oracle");
  check_nu_grid(nu_grid);
  for (double nu : nu_grid) check_oc_problem(h.data(), nu);

  const std::size_t l = h.size();
  PathResult path;
  path.screening = options.screening;
  path.kernel = h.spec();

  std::vector<double> alpha;
  std::vector<double> h_alpha;
  std::vector<double> delta_prev;
  for (std::size_t k = 0; k < nu_grid.size(); ++k) {
    const double nu = nu_grid[k];
    const auto c = SimplexBoxConstraints::for_one_class(nu, l);
    const auto t0 = std::chrono::steady_clock::now();
    if (k == 0 || !options.screening) {
      const auto sol = smo_equality_solve(h, {}, c, {}, options.solver);
      const double ms = ms_since(t0);
      alpha = sol.alpha;
      h_alpha = sol.gradient;
      auto st = record_oc(nu, alpha, h_alpha, sol);
      st.wall_ms = ms;
      path.steps.push_back(std::move(st));
      continue;
    }

    const double nu_from = nu_grid[k - 1];
    const double upper_from = 1.0 / (nu_from * static_cast<double>(l));
    auto delta = (k == 1 || options.delta == DeltaStrategy::full)
                     ? solve_delta_full_oc(h, alpha, c.upper, options.solver.eps)
                     : solve_delta_warm_oc(h, alpha, delta_prev, c.upper, options.solver.eps);
    const double slack = frank_wolfe_gap(alpha, h_alpha, SimplexBoxConstraints{1.0, upper_from});
    const auto ball = make_ball(h, alpha, delta, nu_from, nu, slack, h_alpha);
    const auto bounds = score_bounds(h, ball);
    const auto [rho_lo, rho_hi] = rho_bounds(bounds, nu, l, false);
    const auto outcome = screen(bounds, rho_lo, rho_hi, c.upper);

    const SubmatrixView q1(h, outcome.survivors);
    const auto f = fixed_linear_term(h, outcome);
    double fixed_mass = 0.0;
    for (std::size_t j : outcome.fixed_upper) fixed_mass += outcome.fixed_values[j];
    const double cap = static_cast<double>(outcome.survivors.size()) * c.upper;
    const SimplexBoxConstraints reduced{std::clamp(1.0 - fixed_mass, 0.0, cap), c.upper};

    std::vector<double> start;
    if (options.warm_start_reduced && !outcome.survivors.empty()) {
      for (std::size_t i : outcome.survivors) start.push_back(alpha[i]);
      start = project(start, reduced);
    }
    const auto sol = smo_equality_solve(q1, f, reduced, start, options.solver);
    auto next = combine(outcome, sol.alpha);
    h_alpha = multiply(h, next);
    const double ms = ms_since(t0);

    auto st = record_oc(nu, next, h_alpha, sol);
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

PathResult solve_path_oc(std::shared_ptr<const Dataset> data, const KernelSpec& kernel,
                         std::span<const double> nu_grid, const PathOptions& options) {
  if (!data) throw InputError("solve_path_oc: null dataset");
  const GramOracle h(std::move(data), kernel, GramMode::unlabeled);
  return solve_path_oc(h, nu_grid, options);
}

OcSvmModel oc_model_at(const GramOracle& h, const PathStep& step) {
  return make_oc_model(h, step.nu, step.alpha);
}

std::string model_to_json(const OcSvmModel& model) {
  nlohmann::json j;
  j["type"] = "one-class-svm";
  j["kernel"] = {{"kind", model.kernel.kind == KernelKind::linear ? "linear" : "rbf"},
                 {"sigma", model.kernel.sigma},
                 {"augment_bias", model.kernel.augment_bias}};
  j["nu"] = model.nu;
  j["alpha"] = model.alpha;
  j["rho"] = model.rho;
  j["objective"] = model.objective;
  j["converged"] = model.converged;
  j["sweeps"] = model.sweeps;
  if (model.data) {
    j["samples"] = model.data->rows();
    j["features"] = model.data->cols();
    j["dataset_checksum"] = hex_checksum(model.data->checksum());
  }
  return j.dump(2);
}

}  // namespace srbo
