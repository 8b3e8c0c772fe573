#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace srbo {

/**
 * Dense sample matrix (row-major, l x p) with optional +1/-1 labels.
 *
 * Construction validates that every feature is finite and that labels,
 * when present, are exactly +1 or -1. Instances are immutable afterwards.
 */
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t rows, std::size_t cols, std::vector<double> features,
          std::vector<int> labels = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }
  bool has_labels() const noexcept { return !labels_.empty(); }

  std::span<const double> sample(std::size_t i) const {
    return {features_.data() + i * cols_, cols_};
  }
  std::span<const double> features() const noexcept { return features_; }
  std::span<const int> labels() const noexcept { return labels_; }
  int label(std::size_t i) const { return labels_.at(i); }

  /// FNV-1a over the shape, the feature bytes and the labels.
  std::uint64_t checksum() const noexcept;

  /// Rows selected by `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Rows whose label equals `label`.
  Dataset with_label(int label) const;
  /// Same features, labels dropped.
  Dataset without_labels() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

enum class DataFormat { libsvm, csv };

DataFormat parse_data_format(const std::string& name);

struct LibsvmOptions {
  /// Accept label 0 as -1 (otherwise an error).
  bool map_zero_to_negative = false;
};

/// Parses LIBSVM sparse text: `<label> <idx>:<val> ...`, 1-based strictly
/// increasing indices, absent indices are zero. Throws ParseError.
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});

/// Shortest round-trip decimal rendering; zero entries are omitted.
std::string serialize_libsvm(const Dataset& data);

/**
 * Parses a numeric CSV (no quoted fields). A first line that does not parse
 * as numbers is treated as a header. When `label_column` is set the column is
 * removed from the features and mapped to +1/-1: exactly two distinct values
 * are required and the larger one becomes +1.
 */
Dataset parse_csv(std::istream& in, std::optional<std::size_t> label_column);

/// Features first, label (if any) as the last column.
std::string serialize_csv(const Dataset& data);

Dataset load_dataset(const std::string& path, DataFormat format,
                     std::optional<std::size_t> csv_label_column = std::nullopt);

/// splitmix64, used for every seeded shuffle in the library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Uniform double in [0, 1).
  double uniform() noexcept;

 private:
  std::uint64_t state_;
};

/// Seeded Fisher-Yates shuffle then prefix split; train gets
/// floor(fraction * l) rows. Throws InputError if either side is empty.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

enum class ScaleMethod { none, minmax01, zscore };

ScaleMethod parse_scale_method(const std::string& name);
std::string to_string(ScaleMethod method);

/// Per-feature affine map fitted on training data.
struct Scaler {
  ScaleMethod method = ScaleMethod::none;
  std::vector<double> offset;
  std::vector<double> divisor;  // 0 marks a constant feature left untouched

  static Scaler fit(const Dataset& train, ScaleMethod method);
  Dataset apply(const Dataset& data) const;
};

/// Convenience: fit on `fitted_on`, transform `data`.
Dataset scale(const Dataset& data, ScaleMethod method, const Dataset& fitted_on);

}  // namespace srbo
