#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srbo/data.hpp"
#include "srbo/error.hpp"
#include "srbo/experiment.hpp"
#include "srbo/metrics.hpp"
#include "srbo/nusvm.hpp"
#include "srbo/ocsvm.hpp"
#include "srbo/screening.hpp"
#include "srbo/synthetic.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

constexpr const char* kPathReportSchema = "srbo.path_report/1";

// Options shared by train and path.
struct DataArgs {
  std::string data_path;
  std::string format = "libsvm";
  std::optional<std::size_t> label_column;
  std::string synthetic;
  std::size_t per_class = 200;
  double anomaly_fraction = 0.2;
  std::string task = "nusvm";
  std::string kernel = "rbf";
  double sigma = 1.0;
  std::string scale = "minmax";
  std::uint64_t seed = 0;
  double eps = 1e-8;
};

void add_data_options(CLI::App& cmd, DataArgs& a) {
  cmd.add_option("--data", a.data_path, "Training data file");
  cmd.add_option("--format", a.format, "Data format")->check(CLI::IsMember({"libsvm", "csv"}));
  cmd.add_option("--label-column", a.label_column, "CSV label column (0-based)");
  cmd.add_option("--synthetic", a.synthetic, "Built-in generator instead of --data")
      ->check(CLI::IsMember({"gauss1", "gauss2", "gauss5", "circle", "xor", "spiral"}));
  cmd.add_option("--per-class", a.per_class, "Samples per class for --synthetic");
  cmd.add_option("--anomaly-fraction", a.anomaly_fraction,
                 "Anomaly share for --synthetic with --task ocsvm");
  cmd.add_option("--task", a.task, "Model type")->check(CLI::IsMember({"nusvm", "ocsvm"}));
  cmd.add_option("--kernel", a.kernel, "Kernel")->check(CLI::IsMember({"linear", "rbf"}));
  cmd.add_option("--sigma", a.sigma, "RBF width");
  cmd.add_option("--scale", a.scale, "Feature scaling")
      ->check(CLI::IsMember({"minmax", "zscore", "none"}));
  cmd.add_option("--seed", a.seed, "Seed for synthetic data");
  cmd.add_option("--eps", a.eps, "Solver tolerance");
}

srbo::KernelSpec kernel_spec(const DataArgs& a) {
  const auto spec = a.kernel == "linear" ? srbo::KernelSpec::linear() : srbo::KernelSpec::rbf(a.sigma);
  spec.validate();
  return spec;
}

struct LoadedData {
  std::shared_ptr<const srbo::Dataset> data;
  std::string source;
};

LoadedData load(const DataArgs& a) {
  if (a.data_path.empty() == a.synthetic.empty()) {
    throw srbo::ConfigError("give exactly one of --data and --synthetic");
  }
  if (!(a.eps > 0.0)) throw srbo::ConfigError("--eps must be positive");
  srbo::Dataset raw;
  std::string source;
  if (!a.data_path.empty()) {
    raw = srbo::load_dataset(a.data_path, srbo::parse_data_format(a.format), a.label_column);
    source = a.data_path;
  } else {
    const auto kind = srbo::synthetic::parse_kind(a.synthetic);
    raw = a.task == "ocsvm"
              ? srbo::synthetic::generate_anomaly(kind, a.per_class, a.anomaly_fraction, a.seed)
              : srbo::synthetic::generate(kind, a.per_class, a.seed);
    source = "synthetic:" + a.synthetic;
  }
  auto scaled = srbo::scale(raw, srbo::parse_scale_method(a.scale), raw);
  return {std::make_shared<const srbo::Dataset>(std::move(scaled)), source};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw srbo::ConfigError("cannot write '" + path + "'");
  out << text << '\n';
  if (!out) throw srbo::ConfigError("write to '" + path + "' failed");
}

json dataset_json(const LoadedData& d) {
  return {{"source", d.source},
          {"samples", d.data->rows()},
          {"features", d.data->cols()},
          {"checksum", srbo::hex_checksum(d.data->checksum())}};
}

int cmd_train(const DataArgs& a, double nu, const std::string& out_path) {
  const auto d = load(a);
  const auto spec = kernel_spec(a);
  srbo::TrainOptions options;
  options.eps = a.eps;
  std::string model;
  std::string summary;
  if (a.task == "ocsvm") {
    const auto m = srbo::train_full_oc(d.data, spec, nu, options);
    model = srbo::model_to_json(m);
    summary = "one-class model: rho=" + std::to_string(m.rho);
    if (d.data->has_labels()) {
      const auto scores = srbo::decision_oc(m, *d.data);
      summary += ", training AUC=" + std::to_string(srbo::auc(scores, d.data->labels()));
    }
  } else {
    const auto m = srbo::train_full(d.data, spec, nu, options);
    model = srbo::model_to_json(m);
    const auto pred = srbo::predict(m, *d.data);
    summary = "nu-SVM model: rho=" + std::to_string(m.rho) +
              ", training accuracy=" + std::to_string(srbo::accuracy(pred, d.data->labels())) + "%";
    if (!m.converged) summary += " (solver hit the sweep limit)";
  }
  write_text(out_path, model);
  std::fprintf(stderr, "%s\n", summary.c_str());
  return kExitOk;
}

std::string path_csv(const srbo::PathResult& path) {
  std::ostringstream out;
  out << "nu,screening_ratio,objective,wall_ms,n_survivors,n_fixed_zero,n_fixed_upper\n";
  out.precision(17);
  for (const auto& s : path.steps) {
    out << s.nu << ',' << s.screening_ratio << ',' << s.objective << ',' << s.wall_ms << ','
        << s.n_survivors << ',' << s.n_fixed_zero << ',' << s.n_fixed_upper << '\n';
  }
  return out.str();
}

int cmd_path(const DataArgs& a, const std::string& grid_text, bool srbo_on, const std::string& out_path,
             const std::string& csv_path) {
  const auto grid = srbo::parse_nu_grid(grid_text);
  const auto d = load(a);
  const auto spec = kernel_spec(a);
  srbo::PathOptions options;
  options.screening = srbo_on;
  options.solver.eps = a.eps;
  const bool oc = a.task == "ocsvm";
  const srbo::GramOracle q(d.data, spec, oc ? srbo::GramMode::unlabeled : srbo::GramMode::labeled);
  const auto path = oc ? srbo::solve_path_oc(q, grid, options) : srbo::solve_path(q, grid, options);

  json report;
  report["schema_version"] = kPathReportSchema;
  report["task"] = a.task;
  report["kernel"] = {{"kind", a.kernel}, {"sigma", a.kernel == "rbf" ? a.sigma : 0.0}};
  report["screening"] = srbo_on;
  report["eps"] = a.eps;
  report["scale"] = a.scale;
  report["dataset"] = dataset_json(d);
  report["records"] = json::parse(srbo::path_to_json(path));
  report["summary"] = {{"mean_screening_ratio", path.mean_screening_ratio()},
                       {"total_wall_ms", path.total_wall_ms()},
                       {"points", path.steps.size()}};
  report["environment"] = json::parse(srbo::environment_stamp_json());
  write_text(out_path, report.dump(2));
  if (!csv_path.empty()) write_text(csv_path, path_csv(path));
  std::fprintf(stderr, "%zu grid points, mean screening ratio %.4f, %.1f ms\n", path.steps.size(),
               path.mean_screening_ratio(), path.total_wall_ms());
  return kExitOk;
}

int cmd_bench(const std::string& config_path, const std::string& out_path, const std::string& csv_path) {
  std::ifstream in(config_path);
  if (!in) throw srbo::ConfigError("cannot read config '" + config_path + "'");
  std::stringstream text;
  text << in.rdbuf();
  auto config = srbo::ExperimentConfig::from_json(text.str());
  if (!out_path.empty()) config.out_path = out_path;
  if (!csv_path.empty()) config.csv_path = csv_path;
  config.validate();
  const auto report = srbo::run_experiment(config);
  if (config.out_path.empty()) {
    std::cout << srbo::report_to_json(report) << '\n';
  } else {
    srbo::write_report(report, config.out_path, config.csv_path);
  }
  std::fprintf(stderr, "%zu records, mean screening ratio %.4f, speedup %.3f, metrics identical: %s\n",
               report.records.size(), report.mean_screening_ratio, report.speedup_ratio,
               report.metrics_identical ? "yes" : "no");
  return kExitOk;
}

int cmd_gen(const std::string& kind, std::size_t per_class, std::uint64_t seed, double anomaly_fraction,
            const std::string& format, const std::string& out_path) {
  const auto k = srbo::synthetic::parse_kind(kind);
  const auto data = anomaly_fraction > 0.0
                        ? srbo::synthetic::generate_anomaly(k, per_class, anomaly_fraction, seed)
                        : srbo::synthetic::generate(k, per_class, seed);
  const auto text = format == "csv" ? srbo::serialize_csv(data) : srbo::serialize_libsvm(data);
  std::ofstream out(out_path);
  if (!out) throw srbo::ConfigError("cannot write '" + out_path + "'");
  out << text;
  std::fprintf(stderr, "wrote %zu samples to %s\n", data.rows(), out_path.c_str());
  return kExitOk;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const srbo::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const srbo::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const srbo::Error& e) {
    // ConfigError and InputError: the request itself is unusable.
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nu-SVM and one-class SVM grid search with safe screening"};
  app.require_subcommand(1);

  DataArgs train_args;
  double train_nu = 0.5;
  std::string train_out;
  auto* train = app.add_subcommand("train", "Train one model and write it as JSON");
  add_data_options(*train, train_args);
  train->add_option("--nu", train_nu, "nu");
  train->add_option("--out", train_out, "Model JSON path (stdout if omitted)");

  DataArgs path_args;
  std::string grid = "0.1:0.1:0.9";
  bool srbo_on = false;
  std::string path_out;
  std::string path_csv_out;
  auto* path = app.add_subcommand("path", "Solve an ascending nu grid, optionally with screening");
  add_data_options(*path, path_args);
  path->add_option("--nu-grid", grid, "start:step:end or a comma list");
  path->add_flag("--srbo", srbo_on, "Screen with the safe ball rule between grid points");
  path->add_option("--out", path_out, "Path report JSON (stdout if omitted)");
  path->add_option("--csv", path_csv_out, "Also write the records as CSV");

  std::string bench_config;
  std::string bench_out;
  std::string bench_csv;
  auto* bench = app.add_subcommand("bench", "Run a baseline vs screened experiment from a JSON config");
  bench->add_option("config", bench_config, "Experiment config file")->required();
  bench->add_option("--out", bench_out, "Run report JSON (overrides the config)");
  bench->add_option("--csv", bench_csv, "Run report CSV (overrides the config)");

  std::string gen_kind;
  std::size_t gen_per_class = 200;
  std::uint64_t gen_seed = 0;
  double gen_anomaly = 0.0;
  std::string gen_format = "libsvm";
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a synthetic data set");
  gen->add_option("--kind", gen_kind, "Generator")
      ->required()
      ->check(CLI::IsMember({"gauss1", "gauss2", "gauss5", "circle", "xor", "spiral"}));
  gen->add_option("--per-class", gen_per_class, "Samples per class (normal samples with anomalies)");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--anomaly-fraction", gen_anomaly, "Append this share of anomalies (labeled -1)");
  gen->add_option("--format", gen_format, "Output format")->check(CLI::IsMember({"libsvm", "csv"}));
  gen->add_option("--out", gen_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*train) return guarded([&] { return cmd_train(train_args, train_nu, train_out); });
  if (*path) return guarded([&] { return cmd_path(path_args, grid, srbo_on, path_out, path_csv_out); });
  if (*bench) return guarded([&] { return cmd_bench(bench_config, bench_out, bench_csv); });
  return guarded([&] {
    return cmd_gen(gen_kind, gen_per_class, gen_seed, gen_anomaly, gen_format, gen_out);
  });
}
