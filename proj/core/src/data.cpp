#include "srbo/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include "srbo/error.hpp"

namespace srbo {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<std::size_t> to_index(std::string_view s) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

Dataset::Dataset(std::size_t rows, std::size_t cols, std::vector<double> features,
                 std::vector<int> labels)
    : rows_(rows), cols_(cols), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != rows_ * cols_) {
    throw InputError("dataset: feature buffer has " + std::to_string(features_.size()) +
                     " values, expected " + std::to_string(rows_ * cols_));
  }
  if (!labels_.empty() && labels_.size() != rows_) {
    throw InputError("dataset: label count does not match row count");
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
  }
  for (int y : labels_) {
    if (y != 1 && y != -1) throw DataError("dataset: labels must be +1 or -1");
  }
}

std::uint64_t Dataset::checksum() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t shape[2] = {rows_, cols_};
  mix(shape, sizeof(shape));
  mix(features_.data(), features_.size() * sizeof(double));
  mix(labels_.data(), labels_.size() * sizeof(int));
  return h;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> f;
  f.reserve(indices.size() * cols_);
  std::vector<int> y;
  if (has_labels()) y.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows_) throw InputError("dataset: subset index out of range");
    const auto row = sample(i);
    f.insert(f.end(), row.begin(), row.end());
    if (has_labels()) y.push_back(labels_[i]);
  }
  return Dataset(indices.size(), cols_, std::move(f), std::move(y));
}

Dataset Dataset::with_label(int label) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) keep.push_back(i);
  }
  return subset(keep);
}

Dataset Dataset::without_labels() const { return Dataset(rows_, cols_, features_); }

DataFormat parse_data_format(const std::string& name) {
  if (name == "libsvm") return DataFormat::libsvm;
  if (name == "csv") return DataFormat::csv;
  throw ConfigError("unknown data format '" + name + "' (expected libsvm or csv)");
}

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  struct Row {
    int label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < view.size()) {
      const auto start = view.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto end = view.find_first_of(" \t", start);
      if (end == std::string_view::npos) end = view.size();
      tokens.push_back(view.substr(start, end - start));
      pos = end;
    }

    Row row{};
    const auto label_value = to_double(tokens.front());
    if (!label_value) throw ParseError(line_no, "malformed label '" + std::string(tokens.front()) + "'");
    if (*label_value == 1.0) {
      row.label = 1;
    } else if (*label_value == -1.0) {
      row.label = -1;
    } else if (*label_value == 0.0 && options.map_zero_to_negative) {
      row.label = -1;
    } else {
      throw ParseError(line_no, "label '" + std::string(tokens.front()) + "' is not +1/-1");
    }

    std::size_t previous = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto token = tokens[t];
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected <index>:<value>, got '" + std::string(token) + "'");
      }
      const auto index = to_index(token.substr(0, colon));
      const auto value = to_double(token.substr(colon + 1));
      if (!index || *index == 0) throw ParseError(line_no, "bad feature index in '" + std::string(token) + "'");
      if (!value || !std::isfinite(*value)) {
        throw ParseError(line_no, "bad feature value in '" + std::string(token) + "'");
      }
      if (*index <= previous) throw ParseError(line_no, "feature indices must be strictly increasing");
      previous = *index;
      max_index = std::max(max_index, *index);
      row.entries.emplace_back(*index, *value);
    }
    rows.push_back(std::move(row));
  }

  std::vector<double> features(rows.size() * max_index, 0.0);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [index, value] : rows[i].entries) features[i * max_index + index - 1] = value;
    labels.push_back(rows[i].label);
  }
  return Dataset(rows.size(), max_index, std::move(features), std::move(labels));
}

std::string serialize_libsvm(const Dataset& data) {
  std::string out;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out += data.has_labels() ? (data.label(i) > 0 ? "+1" : "-1") : "+1";
    const auto row = data.sample(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0.0) continue;
      out += ' ';
      out += std::to_string(j + 1);
      out += ':';
      out += shortest(row[j]);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_csv(std::istream& in, std::optional<std::size_t> label_column) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_on(view, ',');
    std::vector<double> values;
    values.reserve(fields.size());
    bool numeric = true;
    for (const auto field : fields) {
      const auto v = to_double(field);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        width = fields.size();
        continue;  // header
      }
      throw ParseError(line_no, "non-numeric field");
    }
    if (width == 0) width = values.size();
    if (values.size() != width) {
      throw ParseError(line_no, "ragged row: expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value");
    }
    first = false;
    rows.push_back(std::move(values));
  }

  if (label_column && *label_column >= width && !rows.empty()) {
    throw DataError("csv: label column " + std::to_string(*label_column) + " out of range");
  }
  const std::size_t cols = label_column ? (width == 0 ? 0 : width - 1) : width;
  std::vector<double> features;
  features.reserve(rows.size() * cols);
  std::vector<double> raw_labels;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (label_column && j == *label_column) {
        raw_labels.push_back(row[j]);
      } else {
        features.push_back(row[j]);
      }
    }
  }

  std::vector<int> labels;
  if (label_column && !rows.empty()) {
    const std::set<double> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() != 2) {
      throw DataError("csv: label column must hold exactly two distinct values, found " +
                      std::to_string(distinct.size()));
    }
    const double positive = *distinct.rbegin();
    labels.reserve(raw_labels.size());
    for (double v : raw_labels) labels.push_back(v == positive ? 1 : -1);
  }
  return Dataset(rows.size(), cols, std::move(features), std::move(labels));
}

std::string serialize_csv(const Dataset& data) {
  std::string out;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.sample(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += shortest(row[j]);
    }
    if (data.has_labels()) {
      if (!row.empty()) out += ',';
      out += data.label(i) > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

Dataset load_dataset(const std::string& path, DataFormat format,
                     std::optional<std::size_t> csv_label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Dataset data = format == DataFormat::libsvm ? parse_libsvm(in) : parse_csv(in, csv_label_column);
  if (data.empty()) throw DataError("'" + path + "' contains no samples");
  return data;
}

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift; bias is below 2^-64 * bound.
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(next()) * bound) >> 64);
}

double SplitMix64::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("split: train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(data.rows())));
  if (n_train == 0 || n_train == data.rows()) throw InputError("split: one side would be empty");
  const std::span<const std::size_t> all(order);
  return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

ScaleMethod parse_scale_method(const std::string& name) {
  if (name == "none") return ScaleMethod::none;
  if (name == "minmax" || name == "minmax01") return ScaleMethod::minmax01;
  if (name == "zscore") return ScaleMethod::zscore;
  throw ConfigError("unknown scaling '" + name + "' (expected minmax, zscore or none)");
}

std::string to_string(ScaleMethod method) {
  switch (method) {
    case ScaleMethod::none: return "none";
    case ScaleMethod::minmax01: return "minmax01";
    case ScaleMethod::zscore: return "zscore";
  }
  return "none";
}

Scaler Scaler::fit(const Dataset& train, ScaleMethod method) {
  Scaler s;
  s.method = method;
  const std::size_t p = train.cols();
  s.offset.assign(p, 0.0);
  s.divisor.assign(p, 0.0);
  if (method == ScaleMethod::none || train.empty()) return s;

  for (std::size_t j = 0; j < p; ++j) {
    if (method == ScaleMethod::minmax01) {
      double lo = train.sample(0)[j];
      double hi = lo;
      for (std::size_t i = 1; i < train.rows(); ++i) {
        lo = std::min(lo, train.sample(i)[j]);
        hi = std::max(hi, train.sample(i)[j]);
      }
      s.offset[j] = lo;
      s.divisor[j] = hi > lo ? hi - lo : 0.0;
    } else {
      double mean = 0.0;
      for (std::size_t i = 0; i < train.rows(); ++i) mean += train.sample(i)[j];
      mean /= static_cast<double>(train.rows());
      double var = 0.0;
      for (std::size_t i = 0; i < train.rows(); ++i) {
        const double d = train.sample(i)[j] - mean;
        var += d * d;
      }
      var /= static_cast<double>(train.rows());
      s.offset[j] = mean;
      s.divisor[j] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
  }
  return s;
}

Dataset Scaler::apply(const Dataset& data) const {
  if (method == ScaleMethod::none) return data;
  if (data.cols() != offset.size()) throw InputError("scaler: feature count mismatch");
  std::vector<double> f(data.features().begin(), data.features().end());
  const std::size_t p = data.cols();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      if (divisor[j] == 0.0) continue;
      f[i * p + j] = (f[i * p + j] - offset[j]) / divisor[j];
    }
  }
  return Dataset(data.rows(), p, std::move(f),
                 std::vector<int>(data.labels().begin(), data.labels().end()));
}

Dataset scale(const Dataset& data, ScaleMethod method, const Dataset& fitted_on) {
  return Scaler::fit(fitted_on, method).apply(data);
}

}  // namespace srbo
