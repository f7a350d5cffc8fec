#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sparrow/booster.hpp"
#include "sparrow/config.hpp"
#include "sparrow/dataset.hpp"
#include "sparrow/eval.hpp"
#include "sparrow/ingest.hpp"
#include "sparrow/model_format.hpp"
#include "sparrow/synthetic.hpp"

namespace sparrow::cli {

namespace fs = std::filesystem;

namespace {

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string describe(const SplitRule& rule) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "f%zu<=%.9g->%+d",
                static_cast<std::size_t>(rule.feature), rule.threshold, rule.polarity);
  std::string scope = format_scope(rule.scope);
  return scope == "-" ? std::string(buf) : scope + ":" + buf;
}

struct IngestArgs {
  std::string input;
  std::string output;
  std::string format = "csv";
  std::size_t dimension = 0;
  std::uint64_t seed = 1;
  std::size_t chunk_records = 1 << 20;
};

struct TrainArgs {
  std::string data;
  std::string config;
  std::string model;
  std::string log;
  std::string test;
  double memory_budget = 0.0;
  std::optional<std::uint64_t> seed;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string output;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string log;
  std::string csv;
};

struct BenchArgs {
  std::string data;
  std::size_t synthetic = 0;
  std::size_t dimension = 8;
  std::size_t planted_feature = 3;
  double edge = 0.3;
  std::size_t sample_size = 0;
  double gamma = 0.25;
  double memory_budget = 0.0;
  std::string config;
  std::uint64_t seed = 1;
};

int do_ingest(const IngestArgs& a, std::ostream& out) {
  IngestOptions options;
  options.format = parse_input_format(a.format);
  options.dimension = a.dimension;
  options.seed = a.seed;
  options.chunk_records = a.chunk_records;
  const DatasetManifest m = ingest(a.input, a.output, options);
  out << "path=" << m.path << "\ncount=" << m.count << "\ndimension=" << m.dimension
      << "\nformat=" << m.format << "\nseed=" << m.seed << '\n';
  return kExitOk;
}

class LogObserver : public TrainObserver {
 public:
  LogObserver(std::ostream* log, const DatasetFile* test, std::ostream& out)
      : log_(log), test_(test), out_(out) {}

  void on_rule(const RuleRecord& record, const Ensemble&) override {
    if (log_ != nullptr) *log_ << format_rule_record(record) << '\n';
  }

  void on_swap(std::size_t epoch, const SampleSet&, const Ensemble& ensemble) override {
    if (test_ == nullptr) return;
    out_ << "epoch=" << epoch << " rules=" << ensemble.version()
         << " test_exp_loss=" << real(exp_loss(ensemble, *test_)) << '\n';
  }

 private:
  std::ostream* log_;
  const DatasetFile* test_;
  std::ostream& out_;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  const DatasetFile data(a.data);
  const ConfigEntries entries = read_config(a.config);
  if (!has_key(entries, "max_rules")) {
    throw UsageError("config must set max_rules");
  }
  if (!has_key(entries, "sample_size") && !(a.memory_budget > 0.0)) {
    throw UsageError("config must set sample_size unless --memory-budget is given");
  }
  BoostConfig cfg = apply_config(entries);
  if (a.seed) cfg.seed = *a.seed;
  if (a.memory_budget > 0.0) {
    const std::size_t cap = sample_size_for_budget(a.memory_budget, data.dimension());
    cfg.sample_size = has_key(entries, "sample_size") ? std::min(cfg.sample_size, cap)
                                                      : cap;
  }

  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log);
    if (!log_file) throw StorageError("cannot write training log " + a.log);
  }
  std::optional<DatasetFile> test;
  if (!a.test.empty()) test.emplace(a.test);
  LogObserver observer(a.log.empty() ? nullptr : &log_file, test ? &*test : nullptr, out);

  Booster booster(data, cfg);
  Model model;
  model.dimension = data.dimension();
  model.bins = cfg.bins;
  model.config = config_entries(cfg);
  model.ensemble = booster.train(&observer);
  save_model(a.model, model);

  const BoostStats& s = booster.stats();
  out << "rules=" << model.ensemble.version() << "\nstop_reason=" << to_string(s.reason)
      << "\nsample_size=" << cfg.sample_size << "\nsample_bytes="
      << cfg.sample_size * record_size(data.dimension()) << "\nswaps=" << s.swaps
      << "\nexamples_scanned=" << s.examples_scanned << "\nseconds=" << real(s.seconds)
      << '\n';
  if (test) out << "test_exp_loss=" << real(exp_loss(model.ensemble, *test)) << '\n';
  return kExitOk;
}

void check_dimension(const Model& model, const DatasetFile& data) {
  if (model.dimension != data.dimension()) {
    throw InvalidInput("model dimension " + std::to_string(model.dimension) +
                       " does not match data dimension " +
                       std::to_string(data.dimension()));
  }
}

int do_predict(const PredictArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  const DatasetFile data(a.data);
  check_dimension(model, data);
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw StorageError("cannot write " + a.output);
  }
  std::ostream& sink = a.output.empty() ? out : file;
  std::vector<float> x(data.dimension());
  char buf[64];
  data.for_each([&](const RecordRef& rec) {
    rec.read_features(x);
    std::snprintf(buf, sizeof buf, "%.17g\n", model.ensemble.score(x));
    sink << buf;
  });
  return kExitOk;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  const DatasetFile data(a.data);
  check_dimension(model, data);
  write_report(out, evaluate(model.ensemble, data));
  if (!a.log.empty()) {
    std::ifstream log(a.log);
    if (!log) throw StorageError("cannot open training log " + a.log);
    if (a.csv.empty()) {
      training_log_to_csv(log, out);
    } else {
      std::ofstream csv(a.csv);
      if (!csv) throw StorageError("cannot write " + a.csv);
      training_log_to_csv(log, csv);
    }
  }
  return kExitOk;
}

int do_bench_scan(const BenchArgs& a, std::ostream& out) {
  if (a.data.empty() == (a.synthetic == 0)) {
    throw UsageError("bench-scan needs exactly one of --data or --synthetic");
  }
  BenchScanOptions options;
  options.gamma_init = a.gamma;
  options.seed = a.seed;
  options.sample_size = a.sample_size;
  if (!a.config.empty()) {
    const BoostConfig cfg = apply_config(read_config(a.config));
    options.bins = cfg.bins;
    options.stop_c = cfg.stop_c;
    options.stop_sigma = cfg.stop_sigma;
    options.stop_t0 = cfg.stop_t0;
    options.stop_check_interval = cfg.stop_check_interval;
  }

  fs::path path = a.data;
  fs::path temp_dir;
  PlantedStump planted;
  if (a.synthetic > 0) {
    planted.dimension = a.dimension;
    planted.feature = a.planted_feature;
    planted.edge = a.edge;
    std::string pattern = (fs::temp_directory_path() / "sparrow-bench-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw StorageError("cannot create a temporary directory");
    }
    temp_dir = pattern;
    path = temp_dir / "synthetic.bin";
    write_planted_dataset(path, planted, a.synthetic, a.seed);
  }
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      if (!dir.empty()) fs::remove_all(dir, ec);
    }
  } cleanup{temp_dir};

  const DatasetFile data(path);
  if (a.memory_budget > 0.0) {
    const std::size_t cap = sample_size_for_budget(a.memory_budget, data.dimension());
    const std::size_t wanted =
        options.sample_size == 0 ? static_cast<std::size_t>(data.size()) : options.sample_size;
    options.sample_size = std::min(wanted, cap);
  }
  const BenchScanResult r = bench_scan(data, options);
  out << "early_scanned=" << r.early_scanned << "\nfull_scanned=" << r.full_scanned
      << "\nratio=" << real(r.ratio()) << "\nsearches=" << r.searches
      << "\nfired=" << (r.fired ? 1 : 0);
  if (r.fired) {
    out << "\nfired_rule=" << describe(r.fired_rule)
        << "\nfired_gamma=" << real(r.fired_gamma) << "\nfired_edge=" << real(r.fired_edge);
  }
  out << "\nfull_rule=" << describe(r.full_rule) << "\nfull_edge=" << real(r.full_edge);
  if (a.synthetic > 0) {
    const bool match = r.fired && r.fired_rule.feature == planted.feature &&
                       r.fired_rule.polarity == (planted.edge >= 0 ? 1 : -1);
    out << "\nplanted_match=" << (match ? 1 : 0);
  }
  out << '\n';
  return kExitOk;
}

}  // namespace

std::size_t sample_size_for_budget(double megabytes, std::size_t dimension) {
  if (!(megabytes > 0.0)) throw UsageError("--memory-budget must be positive");
  const double bytes = std::floor(megabytes * 1024.0 * 1024.0);
  const auto n = static_cast<std::size_t>(bytes / static_cast<double>(record_size(dimension)));
  if (n == 0) throw UsageError("--memory-budget is smaller than one record");
  return n;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boosted trees trained from a disk-resident weighted sample"};
  app.name("sparrow");
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert text data into a shuffled binary store");
  ingest_cmd->add_option("--input", ingest_args.input, "Input text file")->required();
  ingest_cmd->add_option("--output", ingest_args.output, "Output binary store")->required();
  ingest_cmd->add_option("--format", ingest_args.format, "csv or sparse-text")
      ->check(CLI::IsMember({"csv", "sparse-text"}));
  ingest_cmd->add_option("--dim", ingest_args.dimension, "Feature count (0 infers it)");
  ingest_cmd->add_option("--seed", ingest_args.seed, "Shuffle seed");
  ingest_cmd->add_option("--chunk-records", ingest_args.chunk_records,
                         "Records per in-memory shuffle run")
      ->check(CLI::PositiveNumber);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train an ensemble");
  train_cmd->add_option("--data", train_args.data, "Shuffled binary store")->required();
  train_cmd->add_option("--config", train_args.config, "key = value config file")->required();
  train_cmd->add_option("--model", train_args.model, "Output model file")->required();
  train_cmd->add_option("--log", train_args.log, "Training log, one line per rule");
  train_cmd->add_option("--test", train_args.test, "Binary store evaluated at each resample");
  train_cmd->add_option("--memory-budget", train_args.memory_budget,
                        "MiB available to the in-memory sample")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_args.seed, "Overrides the config seed");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Score a binary store");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required();
  predict_cmd->add_option("--data", predict_args.data, "Binary store")->required();
  predict_cmd->add_option("--output", predict_args.output, "Scores file (default stdout)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Report exp_loss, AUROC and accuracy");
  eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
  eval_cmd->add_option("--data", eval_args.data, "Binary store")->required();
  eval_cmd->add_option("--log", eval_args.log, "Training log to convert to CSV");
  eval_cmd->add_option("--csv", eval_args.csv, "CSV output (default stdout)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand(
      "bench-scan", "Examples read before the first fire versus a full scan");
  bench_cmd->add_option("--data", bench_args.data, "Binary store");
  bench_cmd->add_option("--synthetic", bench_args.synthetic,
                        "Generate this many planted-stump examples instead");
  bench_cmd->add_option("--dim", bench_args.dimension, "Synthetic feature count");
  bench_cmd->add_option("--planted-feature", bench_args.planted_feature,
                        "Feature carrying the planted stump");
  bench_cmd->add_option("--edge", bench_args.edge, "Edge of the planted stump");
  bench_cmd->add_option("--sample-size", bench_args.sample_size,
                        "In-memory sample size (default: whole dataset)");
  bench_cmd->add_option("--gamma", bench_args.gamma, "Initial gamma");
  bench_cmd->add_option("--memory-budget", bench_args.memory_budget,
                        "MiB available to the in-memory sample")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--config", bench_args.config, "Config file for stop.* and bins");
  bench_cmd->add_option("--seed", bench_args.seed, "Sampling and generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "sparrow: usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (ingest_cmd->parsed()) return do_ingest(ingest_args, out);
    if (train_cmd->parsed()) return do_train(train_args, out);
    if (predict_cmd->parsed()) return do_predict(predict_args, out);
    if (eval_cmd->parsed()) return do_eval(eval_args, out);
    if (bench_cmd->parsed()) return do_bench_scan(bench_args, out);
  } catch (const UsageError& e) {
    err << "sparrow: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "sparrow: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sparrow::cli
