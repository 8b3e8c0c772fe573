#include "srbo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "srbo/error.hpp"
#include "srbo/metrics.hpp"
#include "srbo/ocsvm.hpp"
#include "srbo/synthetic.hpp"

#ifndef SRBO_VERSION
#define SRBO_VERSION "unknown"
#endif
#ifndef SRBO_BUILD_TYPE
#define SRBO_BUILD_TYPE "unknown"
#endif

namespace srbo {

using nlohmann::json;

Task parse_task(const std::string& name) {
  if (name == "nusvm") return Task::nusvm;
  if (name == "ocsvm") return Task::ocsvm;
  throw ConfigError("unknown task '" + name + "' (expected nusvm or ocsvm)");
}

std::string to_string(Task task) { return task == Task::nusvm ? "nusvm" : "ocsvm"; }

namespace {

double parse_number(const std::string& token, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + token + "' in " + context);
  }
  if (used != token.size() || !std::isfinite(v)) {
    throw ConfigError("bad number '" + token + "' in " + context);
  }
  return v;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const char* delta_name(DeltaStrategy d) { return d == DeltaStrategy::warm ? "warm" : "full"; }

const char* format_name(DataFormat f) { return f == DataFormat::libsvm ? "libsvm" : "csv"; }

}  // namespace

std::vector<double> parse_nu_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    const auto parts = split_on(text, ':');
    if (parts.size() != 3) throw ConfigError("nu grid must look like start:step:end");
    const double start = parse_number(parts[0], "nu grid");
    const double step = parse_number(parts[1], "nu grid");
    const double end = parse_number(parts[2], "nu grid");
    if (!(step > 0.0)) throw ConfigError("nu grid step must be positive");
    if (end < start) throw ConfigError("nu grid end is below its start");
    const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
    if (count > 1'000'000) throw ConfigError("nu grid has too many points");
    for (std::size_t k = 0; k < count; ++k) {
      // Snap to 12 decimals so 0.1:0.1:0.9 yields 0.3 rather than 0.30000000000000004.
      grid.push_back(std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12);
    }
  } else {
    for (const auto& tok : split_on(text, ',')) grid.push_back(parse_number(tok, "nu grid"));
  }
  if (grid.empty()) throw ConfigError("nu grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ConfigError("nu grid must be strictly ascending");
  }
  return grid;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "task",  "data",   "format",         "label_column", "synthetic", "per_class",
      "anomaly_fraction", "anomaly_mu", "kernel", "sigma", "nu_grid", "solver",
      "eps",   "seed",   "scale",          "train_fraction", "repeats", "delta",
      "out",   "csv"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  ExperimentConfig c;
  try {
    if (j.contains("task")) c.task = parse_task(j["task"].get<std::string>());
    if (j.contains("data")) c.data_path = j["data"].get<std::string>();
    if (j.contains("format")) {
      try {
        c.format = parse_data_format(j["format"].get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    if (j.contains("label_column")) c.label_column = j["label_column"].get<std::size_t>();
    if (j.contains("synthetic")) c.synthetic = j["synthetic"].get<std::string>();
    if (j.contains("per_class")) c.per_class = j["per_class"].get<std::size_t>();
    if (j.contains("anomaly_fraction")) c.anomaly_fraction = j["anomaly_fraction"].get<double>();
    if (j.contains("anomaly_mu")) c.anomaly_mu = j["anomaly_mu"].get<double>();
    if (j.contains("kernel")) c.kernel = parse_kernel_kind(j["kernel"].get<std::string>());
    if (j.contains("sigma")) {
      const auto& s = j["sigma"];
      c.sigmas = s.is_array() ? s.get<std::vector<double>>() : std::vector<double>{s.get<double>()};
    }
    if (j.contains("nu_grid")) {
      const auto& g = j["nu_grid"];
      c.nu_grid = g.is_string() ? parse_nu_grid(g.get<std::string>()) : g.get<std::vector<double>>();
    }
    if (j.contains("solver")) c.solver = parse_solver_kind(j["solver"].get<std::string>());
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scale")) {
      try {
        c.scale = parse_scale_method(j["scale"].get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("repeats")) c.repeats = j["repeats"].get<std::size_t>();
    if (j.contains("delta")) {
      const auto d = j["delta"].get<std::string>();
      if (d == "warm") {
        c.delta = DeltaStrategy::warm;
      } else if (d == "full") {
        c.delta = DeltaStrategy::full;
      } else {
        throw ConfigError("delta must be warm or full");
      }
    }
    if (j.contains("out")) c.out_path = j["out"].get<std::string>();
    if (j.contains("csv")) c.csv_path = j["csv"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a wrongly typed value: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["task"] = to_string(task);
  if (!data_path.empty()) {
    j["data"] = data_path;
    j["format"] = format_name(format);
    if (label_column) j["label_column"] = *label_column;
  } else {
    j["synthetic"] = synthetic;
    j["per_class"] = per_class;
    if (task == Task::ocsvm) {
      j["anomaly_fraction"] = anomaly_fraction;
      j["anomaly_mu"] = anomaly_mu;
    }
  }
  j["kernel"] = kernel == KernelKind::linear ? "linear" : "rbf";
  j["sigma"] = sigmas;
  j["nu_grid"] = nu_grid;
  j["solver"] = srbo::to_string(solver);
  j["eps"] = eps;
  j["seed"] = seed;
  j["scale"] = srbo::to_string(scale);
  j["train_fraction"] = train_fraction;
  j["repeats"] = repeats;
  j["delta"] = delta_name(delta);
  return j.dump();
}

void ExperimentConfig::validate() const {
  if (data_path.empty() == synthetic.empty()) {
    throw ConfigError("exactly one of a data file and a synthetic generator must be given");
  }
  if (!synthetic.empty()) synthetic::parse_kind(synthetic);
  if (!synthetic.empty() && per_class < 2) throw ConfigError("per_class must be at least 2");
  if (kernel == KernelKind::rbf) {
    if (sigmas.empty()) throw ConfigError("rbf kernel needs at least one sigma");
    for (double s : sigmas) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sigma values must be positive");
    }
  }
  if (nu_grid.empty()) throw ConfigError("nu grid is empty");
  for (std::size_t k = 0; k < nu_grid.size(); ++k) {
    const double nu = nu_grid[k];
    const bool ok = task == Task::nusvm ? (nu > 0.0 && nu < 1.0) : (nu > 0.0 && nu <= 1.0);
    if (!ok) throw ConfigError("nu=" + std::to_string(nu) + " is outside the legal range");
    if (k > 0 && !(nu > nu_grid[k - 1])) throw ConfigError("nu grid must be strictly ascending");
  }
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  if (repeats == 0) throw ConfigError("repeats must be at least 1");
  if (anomaly_fraction < 0.0) throw ConfigError("anomaly_fraction must be non-negative");
}

std::string hex_checksum(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string environment_stamp_json() {
  json j;
  j["library_version"] = SRBO_VERSION;
  j["build_type"] = SRBO_BUILD_TYPE;
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  j["hardware_threads"] = std::thread::hardware_concurrency();
  j["timestamp_utc"] = utc_timestamp();
  return j.dump();
}

namespace {

struct Prepared {
  std::shared_ptr<const Dataset> train;
  Dataset test;
  std::string checksum;
};

Prepared prepare_data(const ExperimentConfig& cfg) {
  Dataset raw;
  if (!cfg.data_path.empty()) {
    raw = load_dataset(cfg.data_path, cfg.format, cfg.label_column);
  } else {
    const auto kind = synthetic::parse_kind(cfg.synthetic);
    raw = cfg.task == Task::nusvm
              ? synthetic::generate(kind, cfg.per_class, cfg.seed)
              : synthetic::generate_anomaly(kind, cfg.per_class, cfg.anomaly_fraction, cfg.seed,
                                            cfg.anomaly_mu);
  }
  if (!raw.has_labels()) throw DataError("the dataset has no labels to evaluate against");
  auto [train, test] = split(raw, cfg.train_fraction, cfg.seed);
  const auto scaler = Scaler::fit(train, cfg.scale);
  train = scaler.apply(train);
  test = scaler.apply(test);

  Prepared p;
  p.checksum = hex_checksum(raw.checksum());
  if (cfg.task == Task::ocsvm) {
    // Train on the normal class only; evaluate on the full held-out part.
    auto normal = train.with_label(1).without_labels();
    if (normal.rows() == 0) throw DataError("no normal (+1) samples in the training split");
    p.train = std::make_shared<const Dataset>(std::move(normal));
  } else {
    p.train = std::make_shared<const Dataset>(std::move(train));
  }
  p.test = std::move(test);
  return p;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto data = prepare_data(config);
  const std::size_t l = data.train->rows();

  if (config.task == Task::nusvm) {
    const double cap = 1.0 - 1.0 / static_cast<double>(l);
    if (config.nu_grid.back() > cap + 1e-12) {
      throw ConfigError("nu=" + std::to_string(config.nu_grid.back()) + " exceeds 1 - 1/l = " +
                        std::to_string(cap) + " for the training split");
    }
  }

  RunReport report;
  report.config = config;
  report.metric = config.task == Task::nusvm ? "accuracy" : "auc";
  report.train_size = l;
  report.test_size = data.test.rows();
  report.dataset_checksum = data.checksum;

  const auto sigmas =
      config.kernel == KernelKind::linear ? std::vector<double>{1.0} : config.sigmas;
  PathOptions base_opts;
  base_opts.screening = false;
  base_opts.solver = {config.eps, 10000};
  PathOptions srbo_opts = base_opts;
  srbo_opts.screening = true;
  srbo_opts.delta = config.delta;

  bool have_best = false;
  double ratio_sum = 0.0;
  double base_total = 0.0;
  double srbo_total = 0.0;
  for (double sigma : sigmas) {
    const KernelSpec spec{config.kernel, sigma, true};
    const GramMode mode = config.task == Task::nusvm ? GramMode::labeled : GramMode::unlabeled;
    const GramOracle q(data.train, spec, mode);

    auto run = [&](const PathOptions& opts) {
      std::vector<PathResult> runs;
      for (std::size_t r = 0; r < config.repeats; ++r) {
        runs.push_back(config.task == Task::nusvm ? solve_path(q, config.nu_grid, opts)
                                                  : solve_path_oc(q, config.nu_grid, opts));
      }
      PathResult out = runs.front();
      for (std::size_t k = 0; k < out.steps.size(); ++k) {
        std::vector<double> times;
        for (const auto& rr : runs) times.push_back(rr.steps[k].wall_ms);
        out.steps[k].wall_ms = median(times);
      }
      return out;
    };
    const auto baseline = run(base_opts);
    const auto srbo = run(srbo_opts);

    auto metric_of = [&](const PathStep& step) {
      if (config.task == Task::nusvm) {
        const auto model = model_at(q, step);
        const auto pred = predict(model, data.test);
        return accuracy(pred, data.test.labels());
      }
      const auto model = oc_model_at(q, step);
      return auc(decision_oc(model, data.test), data.test.labels());
    };

    SigmaSummary sum;
    sum.sigma = sigma;
    for (std::size_t k = 0; k < config.nu_grid.size(); ++k) {
      CellRecord rec;
      rec.sigma = sigma;
      rec.nu = config.nu_grid[k];
      rec.baseline_metric = metric_of(baseline.steps[k]);
      rec.srbo_metric = metric_of(srbo.steps[k]);
      rec.screening_ratio = srbo.steps[k].screening_ratio;
      rec.n_survivors = srbo.steps[k].n_survivors;
      rec.baseline_ms = baseline.steps[k].wall_ms;
      rec.srbo_ms = srbo.steps[k].wall_ms;
      if (rec.baseline_metric != rec.srbo_metric) report.metrics_identical = false;
      if (!have_best || rec.srbo_metric > report.best_metric) {
        have_best = true;
        report.best_metric = rec.srbo_metric;
        report.best_sigma = sigma;
        report.best_nu = rec.nu;
      }
      sum.baseline_ms += rec.baseline_ms;
      sum.srbo_ms += rec.srbo_ms;
      report.records.push_back(rec);
    }
    sum.mean_screening_ratio = srbo.mean_screening_ratio();
    sum.speedup_ratio = speedup_ratio(std::max(sum.baseline_ms, 1e-6), std::max(sum.srbo_ms, 1e-6));
    ratio_sum += sum.mean_screening_ratio;
    base_total += sum.baseline_ms;
    srbo_total += sum.srbo_ms;
    report.per_sigma.push_back(sum);
  }
  report.mean_screening_ratio = ratio_sum / static_cast<double>(sigmas.size());
  report.speedup_ratio = speedup_ratio(std::max(base_total, 1e-6), std::max(srbo_total, 1e-6));
  return report;
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["schema_version"] = kRunReportSchema;
  j["config"] = json::parse(report.config.to_json());
  j["environment"] = json::parse(environment_stamp_json());
  j["timing_protocol"] = {
      {"statistic", "median"},
      {"repeats", report.config.repeats},
      {"includes", "delta solve, screening, reduced solve"},
      {"excludes", "data loading, Gram matrix construction (shared by both arms)"}};
  j["dataset"] = {{"checksum", report.dataset_checksum},
                  {"train_size", report.train_size},
                  {"test_size", report.test_size}};
  j["metric"] = report.metric;
  auto recs = json::array();
  for (const auto& r : report.records) {
    recs.push_back({{"sigma", r.sigma},
                    {"nu", r.nu},
                    {"baseline_metric", r.baseline_metric},
                    {"srbo_metric", r.srbo_metric},
                    {"screening_ratio", r.screening_ratio},
                    {"n_survivors", r.n_survivors},
                    {"baseline_ms", r.baseline_ms},
                    {"srbo_ms", r.srbo_ms}});
  }
  j["records"] = recs;
  auto per_sigma = json::array();
  for (const auto& s : report.per_sigma) {
    per_sigma.push_back({{"sigma", s.sigma},
                         {"mean_screening_ratio", s.mean_screening_ratio},
                         {"baseline_ms", s.baseline_ms},
                         {"srbo_ms", s.srbo_ms},
                         {"speedup_ratio", s.speedup_ratio}});
  }
  j["per_sigma"] = per_sigma;
  j["aggregate"] = {{"mean_screening_ratio", report.mean_screening_ratio},
                    {"speedup_ratio", report.speedup_ratio},
                    {"best_metric", report.best_metric},
                    {"best_sigma", report.best_sigma},
                    {"best_nu", report.best_nu},
                    {"metrics_identical", report.metrics_identical}};
  return j.dump(2);
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "sigma,nu,metric,baseline_metric,srbo_metric,screening_ratio,n_survivors,baseline_ms,"
        "srbo_ms\n";
  for (const auto& r : report.records) {
    os << r.sigma << ',' << r.nu << ',' << report.metric << ',' << r.baseline_metric << ','
       << r.srbo_metric << ',' << r.screening_ratio << ',' << r.n_survivors << ','
       << r.baseline_ms << ',' << r.srbo_ms << '\n';
  }
  return os.str();
}

void write_report(const RunReport& report, const std::string& json_path,
                  const std::string& csv_path) {
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ConfigError("failed writing '" + path + "'");
  };
  if (!json_path.empty()) write(json_path, report_to_json(report) + "\n");
  if (!csv_path.empty()) write(csv_path, report_to_csv(report));
}

}  // namespace srbo
