#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "srbo/data.hpp"
#include "srbo/kernel.hpp"
#include "srbo/qp.hpp"

namespace srbo {

enum class SolverKind { dcdm, reference };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct TrainOptions {
  SolverKind solver = SolverKind::dcdm;
  double eps = 1e-8;
  std::size_t max_sweeps = 10000;
};

struct NuSvmModel {
  std::vector<double> alpha;
  double nu = 0.0;
  KernelSpec kernel;
  std::shared_ptr<const Dataset> data;
  double rho = 0.0;
  double objective = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  double max_projected_gradient = 0.0;

  double box_upper() const { return 1.0 / static_cast<double>(alpha.size()); }
};

/// Throws InputError unless 0 < nu <= 1 - 1/l and both classes are present.
void check_nu_svm_problem(const Dataset& data, double nu);

NuSvmModel train_full(std::shared_ptr<const Dataset> data, const KernelSpec& kernel, double nu,
                      const TrainOptions& options = {});

/// Same, reusing a labeled Gram oracle built for the training set.
NuSvmModel train_full(const GramOracle& q, double nu, const TrainOptions& options = {});

/// Wraps a dual solution (alpha over the whole training set) into a model;
/// recovers rho from the margins.
NuSvmModel make_nu_model(const GramOracle& q, double nu, std::vector<double> alpha,
                         const DualSolution* diagnostics = nullptr);

/**
 * rho from KKT: 0 when e^T alpha exceeds nu (the multiplier of rho >= 0 is
 * then active), else the mean margin over free support vectors, else the
 * midpoint of [max d over alpha at the upper bound, min d over alpha at 0]
 * clamped at 0.
 */
double recover_rho(std::span<const double> alpha, std::span<const double> margins, double nu,
                   double upper, double alpha_tol);

/// kappa~(x0, X) diag(Y) alpha for every probe row.
std::vector<double> decision_values(const NuSvmModel& model, const Dataset& probes);

/// sign of the decision values, with sign(0) = +1.
std::vector<int> predict(const NuSvmModel& model, const Dataset& probes);

/// d = Q alpha. The overload without an oracle evaluates kernels directly.
std::vector<double> margins(const NuSvmModel& model);
std::vector<double> margins(const NuSvmModel& model, const SymmetricOperator& q);

struct KktReport {
  std::vector<double> margins;
  std::vector<double> beta_mult;  // 1/l - alpha_i
  double gamma_mult = 0.0;        // e^T alpha - nu
  std::vector<double> xi;         // max(0, rho - d_i)
  double max_violation = 0.0;
  std::vector<std::size_t> on_margin;     // E: |d - rho| <= tol
  std::vector<std::size_t> outside;       // R: d > rho + tol
  std::vector<std::size_t> inside;        // L: d < rho - tol
  std::size_t implication_failures = 0;   // R with alpha > 0 or L with alpha < 1/l
  double duality_gap = 0.0;
};

/// `tol` is in margin units; alpha-boundary tests use tol / l.
KktReport kkt_audit(const NuSvmModel& model, double tol = 1e-6);
KktReport kkt_audit(const NuSvmModel& model, const SymmetricOperator& q, double tol = 1e-6);

struct NuProperty {
  double margin_error_fraction = 0.0;
  double support_fraction = 0.0;
};

NuProperty nu_property(const NuSvmModel& model, double tol = 1e-6);
NuProperty nu_property(const NuSvmModel& model, const SymmetricOperator& q, double tol = 1e-6);

/// 1/2 |w|^2 - nu rho + (1/l) sum max(0, rho - d_i).
double primal_objective(const NuSvmModel& model);
double primal_objective(const NuSvmModel& model, std::span<const double> margins);

/// JSON document with kernel, nu, alpha, rho, objective and dataset checksum.
std::string model_to_json(const NuSvmModel& model);

}  // namespace srbo
