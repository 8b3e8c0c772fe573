#include "srbo/nusvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "srbo/error.hpp"
#include "srbo/experiment.hpp"

namespace srbo {

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "dcdm") return SolverKind::dcdm;
  if (name == "reference") return SolverKind::reference;
  throw ConfigError("unknown solver '" + name + "' (expected dcdm or reference)");
}

std::string to_string(SolverKind kind) {
  return kind == SolverKind::dcdm ? "dcdm" : "reference";
}

void check_nu_svm_problem(const Dataset& data, double nu) {
  const std::size_t l = data.rows();
  if (l < 2) throw InputError("nu-SVM needs at least two samples");
  if (!data.has_labels()) throw InputError("nu-SVM needs labels");
  const double cap = 1.0 - 1.0 / static_cast<double>(l);
  if (!(nu > 0.0) || nu > cap + 1e-12) {
    throw InputError("nu=" + std::to_string(nu) + " outside (0, 1 - 1/l] for l=" +
                     std::to_string(l));
  }
  const auto labels = data.labels();
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) throw InputError("nu-SVM needs both classes in the training set");
}

double recover_rho(std::span<const double> alpha, std::span<const double> margins, double nu,
                   double upper, double alpha_tol) {
  const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  if (sum > nu + 1e-9) return 0.0;

  double free_sum = 0.0;
  std::size_t free_count = 0;
  double hi_bound = -std::numeric_limits<double>::infinity();  // max d over alpha at upper
  double lo_bound = std::numeric_limits<double>::infinity();   // min d over alpha at 0
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > alpha_tol && alpha[i] < upper - alpha_tol) {
      free_sum += margins[i];
      ++free_count;
    } else if (alpha[i] >= upper - alpha_tol) {
      hi_bound = std::max(hi_bound, margins[i]);
    } else {
      lo_bound = std::min(lo_bound, margins[i]);
    }
  }
  double rho;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(hi_bound) && std::isfinite(lo_bound)) {
    rho = 0.5 * (hi_bound + lo_bound);
  } else {
    rho = std::isfinite(hi_bound) ? hi_bound : (std::isfinite(lo_bound) ? lo_bound : 0.0);
  }
  return std::max(rho, 0.0);
}

NuSvmModel make_nu_model(const GramOracle& q, double nu, std::vector<double> alpha,
                         const DualSolution* diagnostics) {
  NuSvmModel model;
  model.nu = nu;
  model.kernel = q.spec();
  model.data = q.data_handle();
  model.alpha = std::move(alpha);
  const auto d = multiply(q, model.alpha);
  double quad = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) quad += model.alpha[i] * d[i];
  model.objective = 0.5 * quad;
  const double upper = model.box_upper();
  model.rho = recover_rho(model.alpha, d, nu, upper, 1e-6 * upper);
  if (diagnostics) {
    model.sweeps = diagnostics->sweeps;
    model.converged = diagnostics->converged;
    model.max_projected_gradient = diagnostics->max_projected_gradient;
  }
  return model;
}

NuSvmModel train_full(const GramOracle& q, double nu, const TrainOptions& options) {
  if (q.mode() != GramMode::labeled) throw InputError("train_full needs a labeled Gram oracle");
  check_nu_svm_problem(q.data(), nu);
  const auto c = NuBoxConstraints::for_nu_svm(nu, q.size());
  DualSolution sol;
  if (options.solver == SolverKind::dcdm) {
    sol = dcdm_solve(q, {}, c, {}, {options.eps, options.max_sweeps});
  } else {
    sol = pg_reference_solve(q, {}, c, options.eps);
  }
  return make_nu_model(q, nu, std::move(sol.alpha), &sol);
}

NuSvmModel train_full(std::shared_ptr<const Dataset> data, const KernelSpec& kernel, double nu,
                      const TrainOptions& options) {
  if (!data) throw InputError("train_full: null dataset");
  check_nu_svm_problem(*data, nu);
  const GramOracle q(std::move(data), kernel, GramMode::labeled);
  return train_full(q, nu, options);
}

std::vector<double> decision_values(const NuSvmModel& model, const Dataset& probes) {
  const Dataset& train = *model.data;
  if (probes.cols() != train.cols()) {
    throw InputError("probe dimension " + std::to_string(probes.cols()) +
                     " does not match training dimension " + std::to_string(train.cols()));
  }
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < model.alpha.size(); ++j) {
    if (model.alpha[j] != 0.0) support.push_back(j);
  }
  std::vector<double> out(probes.rows(), 0.0);
  for (std::size_t p = 0; p < probes.rows(); ++p) {
    const auto x0 = probes.sample(p);
    double s = 0.0;
    for (std::size_t j : support) {
      s += model.alpha[j] * train.label(j) * kernel_eval(model.kernel, x0, train.sample(j));
    }
    out[p] = s;
  }
  return out;
}

std::vector<int> predict(const NuSvmModel& model, const Dataset& probes) {
  const auto v = decision_values(model, probes);
  std::vector<int> labels(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) labels[i] = v[i] >= 0.0 ? 1 : -1;
  return labels;
}

std::vector<double> margins(const NuSvmModel& model, const SymmetricOperator& q) {
  if (q.size() != model.alpha.size()) throw InputError("margins: oracle size mismatch");
  return multiply(q, model.alpha);
}

std::vector<double> margins(const NuSvmModel& model) {
  const Dataset& train = *model.data;
  auto d = decision_values(model, train);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= train.label(i);
  return d;
}

KktReport kkt_audit(const NuSvmModel& model, const SymmetricOperator& q, double tol) {
  KktReport rep;
  rep.margins = margins(model, q);
  const std::size_t l = model.alpha.size();
  const double upper = model.box_upper();
  const double alpha_tol = tol * upper;
  const double rho = model.rho;
  const double sum = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);

  rep.beta_mult.resize(l);
  rep.xi.resize(l);
  rep.gamma_mult = sum - model.nu;
  double worst = std::max({0.0, -rep.gamma_mult, std::abs(rep.gamma_mult * rho), -rho});
  double quad = 0.0;
  double hinge = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    const double a = model.alpha[i];
    const double d = rep.margins[i];
    rep.beta_mult[i] = upper - a;
    rep.xi[i] = std::max(0.0, rho - d);
    quad += a * d;
    hinge += rep.xi[i];
    worst = std::max({worst, -a, a - upper});
    // Complementary slackness in margin units.
    if (a > alpha_tol) worst = std::max(worst, d - rho);
    if (a < upper - alpha_tol) worst = std::max(worst, rho - d);

    if (d > rho + tol) {
      rep.outside.push_back(i);
      if (a > alpha_tol) ++rep.implication_failures;
    } else if (d < rho - tol) {
      rep.inside.push_back(i);
      if (a < upper - alpha_tol) ++rep.implication_failures;
    } else {
      rep.on_margin.push_back(i);
    }
  }
  rep.max_violation = worst;
  const double primal = 0.5 * quad - model.nu * rho + hinge / static_cast<double>(l);
  rep.duality_gap = primal + 0.5 * quad;
  return rep;
}

KktReport kkt_audit(const NuSvmModel& model, double tol) {
  const GramOracle q(model.data, model.kernel, GramMode::labeled);
  return kkt_audit(model, q, tol);
}

namespace {

NuProperty nu_property_from(const NuSvmModel& model, std::span<const double> d, double tol) {
  const std::size_t l = model.alpha.size();
  const double alpha_tol = tol * model.box_upper();
  std::size_t m = 0;
  std::size_t s = 0;
  for (std::size_t i = 0; i < l; ++i) {
    if (model.alpha[i] > alpha_tol) ++s;
    if (d[i] < model.rho - tol) ++m;
  }
  const double n = static_cast<double>(l);
  return {static_cast<double>(m) / n, static_cast<double>(s) / n};
}

}  // namespace

NuProperty nu_property(const NuSvmModel& model, const SymmetricOperator& q, double tol) {
  const auto d = margins(model, q);
  return nu_property_from(model, d, tol);
}

NuProperty nu_property(const NuSvmModel& model, double tol) {
  const auto d = margins(model);
  return nu_property_from(model, d, tol);
}

double primal_objective(const NuSvmModel& model, std::span<const double> d) {
  const std::size_t l = model.alpha.size();
  if (d.size() != l) throw InputError("primal_objective: margin length mismatch");
  double quad = 0.0;
  double hinge = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    quad += model.alpha[i] * d[i];
    hinge += std::max(0.0, model.rho - d[i]);
  }
  return 0.5 * quad - model.nu * model.rho + hinge / static_cast<double>(l);
}

double primal_objective(const NuSvmModel& model) {
  if (model.alpha.empty()) return 0.0;
  const auto d = margins(model);
  return primal_objective(model, d);
}

std::string model_to_json(const NuSvmModel& model) {
  nlohmann::json j;
  j["type"] = "nu-svm";
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
