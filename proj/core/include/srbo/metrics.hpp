#pragma once

#include <cstddef>
#include <span>

namespace srbo {

/// 100 * matches / n. Throws InputError on empty or mismatched input.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Area under the ROC curve via the Mann-Whitney statistic; ties count 1/2.
/// Labels are +1 (positive) / -1; both classes must be present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// baseline / srbo; both must be positive.
double speedup_ratio(double baseline_ms, double srbo_ms);

struct WilcoxonResult {
  std::size_t n = 0;  // pairs left after dropping zero differences
  double w_plus = 0.0;
  double w_minus = 0.0;
  double z = 0.0;
  double p_one_sided = 0.0;  // H1: a tends to exceed b
  double p_two_sided = 0.0;
  bool exact = false;
};

/**
 * Wilcoxon signed-rank test on the paired differences a - b.
 *
 * Zero differences are dropped and tied magnitudes get average ranks. For
 * n > 20 the normal approximation Z = (W+ - n(n+1)/4) / sqrt(n(n+1)(2n+1)/24)
 * is used with p = 1 - Phi(Z); otherwise the null distribution of W+ is
 * enumerated exactly over all 2^n sign assignments. Throws InputError when
 * the lengths differ or every difference is zero.
 */
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

}  // namespace srbo
