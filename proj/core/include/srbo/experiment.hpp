#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srbo/data.hpp"
#include "srbo/kernel.hpp"
#include "srbo/nusvm.hpp"
#include "srbo/screening.hpp"

namespace srbo {

inline constexpr const char* kRunReportSchema = "srbo.run_report/1";

enum class Task { nusvm, ocsvm };

Task parse_task(const std::string& name);
std::string to_string(Task task);

/// "start:step:end" (inclusive, tolerant to rounding) or a comma list.
/// Throws ConfigError on malformed or empty grids.
std::vector<double> parse_nu_grid(const std::string& text);

struct ExperimentConfig {
  Task task = Task::nusvm;

  // Either a file ...
  std::string data_path;
  DataFormat format = DataFormat::libsvm;
  std::optional<std::size_t> label_column;
  // ... or one of the built-in synthetic generators.
  std::string synthetic;
  std::size_t per_class = 200;
  double anomaly_fraction = 0.2;
  double anomaly_mu = -1.0;

  KernelKind kernel = KernelKind::rbf;
  std::vector<double> sigmas{1.0};
  std::vector<double> nu_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  SolverKind solver = SolverKind::dcdm;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  ScaleMethod scale = ScaleMethod::minmax01;
  double train_fraction = 0.8;
  std::size_t repeats = 3;
  DeltaStrategy delta = DeltaStrategy::warm;

  std::string out_path;
  std::string csv_path;

  /// Parses a JSON config; unknown keys are rejected. Throws ConfigError.
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
  /// Throws ConfigError for inconsistent settings.
  void validate() const;
};

struct CellRecord {
  double sigma = 0.0;
  double nu = 0.0;
  double baseline_metric = 0.0;
  double srbo_metric = 0.0;
  double screening_ratio = 0.0;
  std::size_t n_survivors = 0;
  double baseline_ms = 0.0;
  double srbo_ms = 0.0;
};

struct SigmaSummary {
  double sigma = 0.0;
  double mean_screening_ratio = 0.0;
  double baseline_ms = 0.0;
  double srbo_ms = 0.0;
  double speedup_ratio = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::string metric;  // "accuracy" (percent) or "auc"
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::string dataset_checksum;
  std::vector<CellRecord> records;
  std::vector<SigmaSummary> per_sigma;
  double mean_screening_ratio = 0.0;
  double speedup_ratio = 0.0;
  double best_metric = 0.0;
  double best_sigma = 0.0;
  double best_nu = 0.0;
  bool metrics_identical = true;
};

/// Loads or generates the data, splits, scales, and for every sigma runs the
/// nu path twice (plain full solves, then screened), timing each path as the
/// median of `repeats` runs. Gram construction is shared and not timed.
RunReport run_experiment(const ExperimentConfig& config);

std::string report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);
/// Writes the JSON (and the CSV when csv_path is nonempty).
void write_report(const RunReport& report, const std::string& json_path,
                  const std::string& csv_path);

/// Compiler, build type, library version, core count and UTC timestamp.
std::string environment_stamp_json();

std::string hex_checksum(std::uint64_t value);

}  // namespace srbo
