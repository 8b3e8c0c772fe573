#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "srbo/data.hpp"

namespace srbo {

enum class KernelKind { linear, rbf };

/**
 * Kernel function. With `augment_bias` every value gets +1, which realizes
 * the bias as an extra constant feature: no model in this library stores an
 * explicit intercept.
 */
struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;  // RBF bandwidth: exp(-|a-b|^2 / (2 sigma^2))
  bool augment_bias = true;

  static KernelSpec linear(bool augment = true) { return {KernelKind::linear, 1.0, augment}; }
  static KernelSpec rbf(double sigma, bool augment = true) { return {KernelKind::rbf, sigma, augment}; }

  void validate() const;
  std::string describe() const;
};

KernelKind parse_kernel_kind(const std::string& name);

/// Throws InputError on dimension mismatch.
double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

/// Row of a symmetric matrix; `owner` keeps cache-backed storage alive.
struct RowView {
  std::span<const double> values;
  std::shared_ptr<const void> owner;

  double operator[](std::size_t j) const { return values[j]; }
  std::size_t size() const noexcept { return values.size(); }
};

/// Read access to a symmetric PSD matrix, one row at a time.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  virtual std::size_t size() const = 0;
  virtual double diag(std::size_t i) const = 0;
  virtual RowView row(std::size_t i) const = 0;
};

/// Owning dense symmetric matrix (row-major).
class DenseSymmetric final : public SymmetricOperator {
 public:
  DenseSymmetric() = default;
  DenseSymmetric(std::size_t n, std::vector<double> values);

  std::size_t size() const override { return n_; }
  double diag(std::size_t i) const override { return values_[i * n_ + i]; }
  RowView row(std::size_t i) const override { return {{values_.data() + i * n_, n_}, nullptr}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Copies every entry of `op` into a dense matrix.
DenseSymmetric materialize(const SymmetricOperator& op);

/// Principal submatrix of `parent` restricted to `indices` (order preserved).
/// Gathered rows are cached on first use.
class SubmatrixView final : public SymmetricOperator {
 public:
  SubmatrixView(const SymmetricOperator& parent, std::vector<std::size_t> indices);

  std::size_t size() const override { return indices_.size(); }
  double diag(std::size_t i) const override { return parent_.diag(indices_[i]); }
  RowView row(std::size_t i) const override;
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  const SymmetricOperator& parent_;
  std::vector<std::size_t> indices_;
  mutable std::vector<std::shared_ptr<const std::vector<double>>> rows_;
  mutable std::mutex mutex_;
};

enum class GramMode {
  labeled,    // Q_ij = y_i y_j k~(x_i, x_j)
  unlabeled,  // H_ij = k~(x_i, x_j)
};

struct CachePolicy {
  enum class Kind { automatic, full, lru };
  Kind kind = Kind::automatic;
  std::size_t capacity_rows = 0;  // lru only; 0 means "derive from memory budget"

  static constexpr std::size_t full_matrix_limit = 8000;
  static constexpr std::size_t lru_budget_bytes = std::size_t{1} << 30;
};

/**
 * Kernel Gram matrix of a dataset, optionally signed by the labels.
 *
 * The full policy computes the upper triangle once at construction and
 * mirrors it, so symmetry is exact. The LRU policy computes rows on demand;
 * rows handed out stay valid while their RowView lives, even if evicted.
 * Read-only after construction except for the mutex-guarded LRU cache.
 */
class GramOracle final : public SymmetricOperator {
 public:
  GramOracle(std::shared_ptr<const Dataset> data, KernelSpec spec, GramMode mode,
             CachePolicy policy = {});

  std::size_t size() const override { return data_->rows(); }
  double diag(std::size_t i) const override { return diag_[i]; }
  RowView row(std::size_t i) const override;

  /// Throws InputError when i is out of range.
  std::vector<double> gram_row(std::size_t i) const;

  const KernelSpec& spec() const noexcept { return spec_; }
  GramMode mode() const noexcept { return mode_; }
  const Dataset& data() const noexcept { return *data_; }
  const std::shared_ptr<const Dataset>& data_handle() const noexcept { return data_; }
  bool is_full() const noexcept { return !full_.empty(); }
  std::size_t lru_capacity() const noexcept { return capacity_; }

 private:
  double sign(std::size_t i) const { return mode_ == GramMode::labeled ? data_->label(i) : 1.0; }
  void compute_row(std::size_t i, std::span<double> out) const;

  std::shared_ptr<const Dataset> data_;
  KernelSpec spec_;
  GramMode mode_;
  std::vector<double> diag_;
  std::vector<double> full_;

  std::size_t capacity_ = 0;
  mutable std::mutex mutex_;
  mutable std::list<std::size_t> lru_order_;
  struct Entry {
    std::shared_ptr<const std::vector<double>> row;
    std::list<std::size_t>::iterator position;
  };
  mutable std::unordered_map<std::size_t, Entry> lru_;
};

/// y = M v, touching only rows j with v_j != 0.
std::vector<double> multiply(const SymmetricOperator& m, std::span<const double> v);

/// a^T M b; coordinates where a_i = 0 are skipped, likewise b_j = 0.
double quad_form(const SymmetricOperator& m, std::span<const double> a, std::span<const double> b);

}  // namespace srbo
