#include "srbo/kernel.hpp"

#include <cmath>
#include <sstream>

#include "srbo/error.hpp"

namespace srbo {

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw InputError("rbf kernel needs sigma > 0");
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  if (kind == KernelKind::linear) {
    os << "linear";
  } else {
    os << "rbf(sigma=" << sigma << ")";
  }
  if (augment_bias) os << "+1";
  return os.str();
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  throw ConfigError("unknown kernel '" + name + "' (expected linear or rbf)");
}

namespace {

inline double raw_kernel(const KernelSpec& spec, const double* a, const double* b, std::size_t p) {
  if (spec.kind == KernelKind::linear) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += a[k] * b[k];
    return s;
  }
  double d2 = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("kernel_eval: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  spec.validate();
  return raw_kernel(spec, a.data(), b.data(), a.size()) + (spec.augment_bias ? 1.0 : 0.0);
}

DenseSymmetric::DenseSymmetric(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw InputError("DenseSymmetric: expected n*n values");
}

DenseSymmetric materialize(const SymmetricOperator& op) {
  const std::size_t n = op.size();
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = op.row(i);
    std::copy(r.values.begin(), r.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  return DenseSymmetric(n, std::move(values));
}

SubmatrixView::SubmatrixView(const SymmetricOperator& parent, std::vector<std::size_t> indices)
    : parent_(parent), indices_(std::move(indices)), rows_(indices_.size()) {
  for (std::size_t i : indices_) {
    if (i >= parent_.size()) throw InputError("SubmatrixView: index out of range");
  }
}

RowView SubmatrixView::row(std::size_t i) const {
  std::lock_guard lock(mutex_);
  auto& slot = rows_[i];
  if (!slot) {
    const auto full = parent_.row(indices_[i]);
    auto gathered = std::make_shared<std::vector<double>>(indices_.size());
    for (std::size_t k = 0; k < indices_.size(); ++k) (*gathered)[k] = full[indices_[k]];
    slot = std::move(gathered);
  }
  return {*slot, slot};
}

GramOracle::GramOracle(std::shared_ptr<const Dataset> data, KernelSpec spec, GramMode mode,
                       CachePolicy policy)
    : data_(std::move(data)), spec_(spec), mode_(mode) {
  if (!data_) throw InputError("GramOracle: null dataset");
  spec_.validate();
  if (mode_ == GramMode::labeled && !data_->has_labels()) {
    throw InputError("GramOracle: labeled mode needs labels");
  }
  const std::size_t n = data_->rows();
  const std::size_t p = data_->cols();
  const double bias = spec_.augment_bias ? 1.0 : 0.0;

  diag_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = data_->sample(i).data();
    diag_[i] = raw_kernel(spec_, xi, xi, p) + bias;  // sign^2 = 1
    if (!std::isfinite(diag_[i])) throw NumericError("GramOracle: non-finite kernel value");
  }

  auto kind = policy.kind;
  if (kind == CachePolicy::Kind::automatic) {
    kind = n <= CachePolicy::full_matrix_limit ? CachePolicy::Kind::full : CachePolicy::Kind::lru;
  }
  if (kind == CachePolicy::Kind::full) {
    full_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = data_->sample(i).data();
      const double si = sign(i);
      full_[i * n + i] = diag_[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = si * sign(j) * (raw_kernel(spec_, xi, data_->sample(j).data(), p) + bias);
        full_[i * n + j] = v;
        full_[j * n + i] = v;
      }
    }
    for (double v : full_) {
      if (!std::isfinite(v)) throw NumericError("GramOracle: non-finite kernel value");
    }
  } else {
    capacity_ = policy.capacity_rows;
    if (capacity_ == 0) {
      capacity_ = std::max<std::size_t>(2, CachePolicy::lru_budget_bytes / (sizeof(double) * std::max<std::size_t>(n, 1)));
    }
    capacity_ = std::max<std::size_t>(capacity_, 2);
  }
}

void GramOracle::compute_row(std::size_t i, std::span<double> out) const {
  const std::size_t p = data_->cols();
  const double bias = spec_.augment_bias ? 1.0 : 0.0;
  const double* xi = data_->sample(i).data();
  const double si = sign(i);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = j == i ? diag_[i] : si * sign(j) * (raw_kernel(spec_, xi, data_->sample(j).data(), p) + bias);
  }
}

RowView GramOracle::row(std::size_t i) const {
  const std::size_t n = size();
  if (!full_.empty()) return {{full_.data() + i * n, n}, nullptr};

  std::lock_guard lock(mutex_);
  if (auto it = lru_.find(i); it != lru_.end()) {
    lru_order_.splice(lru_order_.begin(), lru_order_, it->second.position);
    return {*it->second.row, it->second.row};
  }
  auto values = std::make_shared<std::vector<double>>(n);
  compute_row(i, *values);
  for (double v : *values) {
    if (!std::isfinite(v)) throw NumericError("GramOracle: non-finite kernel value");
  }
  if (lru_.size() >= capacity_) {
    lru_.erase(lru_order_.back());
    lru_order_.pop_back();
  }
  lru_order_.push_front(i);
  std::shared_ptr<const std::vector<double>> shared = std::move(values);
  lru_.emplace(i, Entry{shared, lru_order_.begin()});
  return {*shared, shared};
}

std::vector<double> GramOracle::gram_row(std::size_t i) const {
  if (i >= size()) {
    throw InputError("gram_row: index " + std::to_string(i) + " out of range for " +
                     std::to_string(size()) + " samples");
  }
  const auto r = row(i);
  return {r.values.begin(), r.values.end()};
}

std::vector<double> multiply(const SymmetricOperator& m, std::span<const double> v) {
  const std::size_t n = m.size();
  if (v.size() != n) throw InputError("multiply: length mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (v[j] == 0.0) continue;
    const auto r = m.row(j);  // column j == row j
    const double vj = v[j];
    for (std::size_t i = 0; i < n; ++i) out[i] += r[i] * vj;
  }
  return out;
}

double quad_form(const SymmetricOperator& m, std::span<const double> a, std::span<const double> b) {
  const std::size_t n = m.size();
  if (a.size() != n || b.size() != n) throw InputError("quad_form: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    const auto r = m.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (b[j] != 0.0) s += r[j] * b[j];
    }
    total += a[i] * s;
  }
  return total;
}

}  // namespace srbo
