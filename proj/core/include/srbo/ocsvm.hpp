#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "srbo/data.hpp"
#include "srbo/kernel.hpp"
#include "srbo/nusvm.hpp"
#include "srbo/qp.hpp"
#include "srbo/screening.hpp"

namespace srbo {

struct OcSvmModel {
  std::vector<double> alpha;
  double nu = 0.0;
  KernelSpec kernel;
  std::shared_ptr<const Dataset> data;
  double rho = 0.0;
  double objective = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  double max_projected_gradient = 0.0;

  double box_upper() const { return 1.0 / (nu * static_cast<double>(alpha.size())); }
};

/// Throws InputError unless 0 < nu <= 1 and the set is nonempty.
void check_oc_problem(const Dataset& data, double nu);

OcSvmModel train_full_oc(std::shared_ptr<const Dataset> data, const KernelSpec& kernel, double nu,
                         const TrainOptions& options = {});
/// `h` must be an unlabeled Gram oracle over the training set.
OcSvmModel train_full_oc(const GramOracle& h, double nu, const TrainOptions& options = {});

OcSvmModel make_oc_model(const GramOracle& h, double nu, std::vector<double> alpha,
                         const DualSolution* diagnostics = nullptr);

/// Mean score over free support vectors, else the midpoint of
/// [max score over alpha at the upper bound, min score over alpha at 0].
double recover_rho_oc(std::span<const double> alpha, std::span<const double> scores, double upper,
                      double alpha_tol);

/// sum_i alpha_i kappa~(x_i, x0) - rho for each probe.
std::vector<double> decision_oc(const OcSvmModel& model, const Dataset& probes);

/// +1 (normal) iff the score is >= 0, else -1 (outlier).
std::vector<int> predict_oc(const OcSvmModel& model, const Dataset& probes);

/// Ball, bounds and screening for the step to nu_next, given the delta that
/// repairs alpha_k for the new box. `slack` widens the radius as in SafeBall.
ScreenOutcome screen_oc(const SymmetricOperator& h, std::span<const double> alpha_k,
                        std::span<const double> delta, double nu_next, std::size_t l,
                        double slack = 0.0, std::span<const double> h_alpha_k = {});

/// Ascending nu path for the one-class dual, screened or not.
PathResult solve_path_oc(const GramOracle& h, std::span<const double> nu_grid,
                         const PathOptions& options = {});
PathResult solve_path_oc(std::shared_ptr<const Dataset> data, const KernelSpec& kernel,
                         std::span<const double> nu_grid, const PathOptions& options = {});

OcSvmModel oc_model_at(const GramOracle& h, const PathStep& step);

std::string model_to_json(const OcSvmModel& model);

}  // namespace srbo
