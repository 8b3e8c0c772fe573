#include "srbo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "srbo/error.hpp"

namespace srbo {

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw InputError("accuracy: length mismatch");
  if (truth.empty()) throw InputError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

// 1-based average ranks of `values` (ascending).
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("auc: length mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 1 && y != -1) throw InputError("auc: labels must be +1/-1");
    n_pos += y == 1 ? 1 : 0;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InputError("auc: both classes are required");
  const auto ranks = average_ranks(scores);
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) pos_rank_sum += ranks[i];
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double speedup_ratio(double baseline_ms, double srbo_ms) {
  if (!(baseline_ms > 0.0) || !(srbo_ms > 0.0)) {
    throw InputError("speedup_ratio: times must be positive");
  }
  return baseline_ms / srbo_ms;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("wilcoxon: paired samples differ in length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw InputError("wilcoxon: non-finite difference");
    if (d != 0.0) diff.push_back(d);
  }
  if (diff.empty()) throw InputError("wilcoxon: all differences are zero");

  WilcoxonResult res;
  res.n = diff.size();
  std::vector<double> magnitude(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) magnitude[i] = std::abs(diff[i]);
  const auto ranks = average_ranks(magnitude);
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0.0 ? res.w_plus : res.w_minus) += ranks[i];

  const double n = static_cast<double>(res.n);
  const double mean = n * (n + 1.0) / 4.0;
  const double sd = std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0);
  res.z = (res.w_plus - mean) / sd;

  if (res.n > 20) {
    res.p_one_sided = 0.5 * std::erfc(res.z / std::sqrt(2.0));
    res.p_two_sided = std::min(1.0, std::erfc(std::abs(res.z) / std::sqrt(2.0)));
    return res;
  }

  // Average ranks are multiples of 1/2, so doubled ranks are integers and the
  // 2^n sign assignments collapse into a count per attainable doubled sum.
  res.exact = true;
  std::vector<std::size_t> doubled(res.n);
  std::size_t total = 0;
  for (std::size_t i = 0; i < res.n; ++i) {
    doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
    total += doubled[i];
  }
  std::vector<double> count(total + 1, 0.0);
  count[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r : doubled) {
    for (std::size_t s = reach + 1; s-- > 0;) {
      if (count[s] != 0.0) count[s + r] += count[s];
    }
    reach += r;
  }
  const auto observed = static_cast<std::size_t>(std::llround(2.0 * res.w_plus));
  const double all = std::ldexp(1.0, static_cast<int>(res.n));
  double upper_tail = 0.0;
  double lower_tail = 0.0;
  for (std::size_t s = 0; s <= total; ++s) {
    if (s >= observed) upper_tail += count[s];
    if (s <= observed) lower_tail += count[s];
  }
  res.p_one_sided = upper_tail / all;
  res.p_two_sided = std::min(1.0, 2.0 * std::min(upper_tail, lower_tail) / all);
  return res;
}

}  // namespace srbo
