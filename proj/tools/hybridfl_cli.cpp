#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridfl/errors.hpp"
#include "hybridfl/experiment.hpp"
#include "hybridfl/metrics.hpp"

namespace fs = std::filesystem;
using namespace hybridfl;

namespace {

enum ExitCode { kOk = 0, kConfigFailure = 2, kMissingData = 3, kTrainingFailure = 4,
                kPartialComparison = 5 };

ExperimentConfig resolve_config(const std::string& path) {
  if (path.empty()) return ExperimentConfig::for_preset(Preset::kAmlsim);
  return load_experiment_config(path);
}

fs::path resolve_out(const std::string& out, const ExperimentConfig& config) {
  return out.empty() ? fs::path(config.output_dir) : fs::path(out);
}

std::string eval_split_name(const SplitIndex& split) {
  return split.test.empty() ? "validation" : "test";
}

const std::vector<std::string>& eval_ids(const SplitIndex& split) {
  return split.test.empty() ? split.validation : split.test;
}

int cmd_generate(const ExperimentConfig& config, const fs::path& out) {
  PreparedData data = prepare_data(config, generate(config.generator));
  write_prepared_data(data, out, config.provenance());
  std::size_t positives = 0;
  for (const auto& tx : data.raw.transactions) positives += tx.label;
  const auto n = data.raw.transactions.size();
  std::printf("generated %zu accounts in %d banks, %zu transactions, %zu positive (rate %.6f)\n",
              data.raw.accounts.size(), config.generator.n_banks, n, positives,
              static_cast<double>(positives) / static_cast<double>(n));
  return kOk;
}

// Trains one mode and writes history.csv, metrics.csv and the checkpoint
// under `run_dir`. Returns the evaluation-split report.
MetricsReport train_and_record(const ExperimentConfig& config, Mode mode,
                               const LoadedViews& views, const fs::path& run_dir,
                               std::vector<MetricsRow>* rows) {
  fs::create_directories(run_dir);
  const TrainResult result = run_mode(config, mode, views);
  const Provenance prov = config.provenance();
  write_history_csv(result.history, run_dir / "history.csv", prov);
  result.bundle.save(run_dir / "checkpoint", prov.config_hash);
  const BankViews* banks = mode == Mode::kLocal ? nullptr : &views.bank_views;
  std::vector<MetricsRow> local_rows;
  const double thr = config.train.threshold;
  local_rows.push_back({mode_name(mode), "validation",
                        evaluate(result.bundle, views.tx_view, views.split.validation, banks, thr)});
  if (!views.split.test.empty()) {
    local_rows.push_back(
        {mode_name(mode), "test", evaluate(result.bundle, views.tx_view, views.split.test, banks, thr)});
  }
  write_metrics_csv(local_rows, run_dir / "metrics.csv", prov);
  if (rows != nullptr) rows->insert(rows->end(), local_rows.begin(), local_rows.end());
  return local_rows.back().report;
}

int cmd_train(const ExperimentConfig& config, Mode mode, const fs::path& out) {
  LoadedViews views;
  try {
    views = load_views(out, mode);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << " (run `hybridfl generate` first)\n";
    return kMissingData;
  }
  const fs::path run_dir = out / mode_name(mode);
  const MetricsReport r = train_and_record(config, mode, views, run_dir, nullptr);
  std::printf("%s: %s auprc=%s precision=%s recall=%s f1=%s\n", mode_name(mode),
              eval_split_name(views.split).c_str(), format_real(r.auprc).c_str(),
              format_real(r.precision).c_str(), format_real(r.recall).c_str(),
              format_real(r.f1).c_str());
  return kOk;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text, std::uint64_t fallback) {
  std::vector<std::uint64_t> seeds;
  if (text.empty()) return {fallback};
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size() || item.front() == '-') throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--seeds: not an unsigned integer: \"" + item + "\"");
    }
  }
  if (seeds.empty()) throw ConfigError("--seeds: empty list");
  return seeds;
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

Summary summarise(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_compare(ExperimentConfig config, const fs::path& out,
                const std::vector<std::uint64_t>& seeds) {
  struct ModelRow {
    Mode mode;
    const char* label;
    std::vector<double> precision, recall, f1, auprc;
  };
  std::vector<ModelRow> models = {{Mode::kCentral, "Centralised", {}, {}, {}, {}},
                                  {Mode::kHybrid, "HybridFL", {}, {}, {}, {}},
                                  {Mode::kLocal, "Transaction-only", {}, {}, {}, {}}};
  fs::create_directories(out);
  const std::uint64_t base_seed = config.seed;
  std::vector<MetricsRow> all_rows;
  bool failed = false;
  std::string split_name = "test";

  for (std::uint64_t seed : seeds) {
    config.set_seed(seed);
    const fs::path seed_dir = out / ("seed_" + std::to_string(seed));
    std::optional<LoadedViews> views;
    try {
      PreparedData data = prepare_data(config, generate(config.generator));
      write_prepared_data(data, seed_dir / "data", config.provenance());
      views = LoadedViews{std::move(data.views.tx_view), std::move(data.views.bank_views),
                          std::move(data.split)};
      split_name = eval_split_name(views->split);
    } catch (const Error& e) {
      std::cerr << "seed " << seed << ": data preparation failed: " << e.what() << '\n';
      failed = true;
      continue;
    }
    for (auto& m : models) {
      try {
        std::vector<MetricsRow> rows;
        const MetricsReport r =
            train_and_record(config, m.mode, *views, seed_dir / mode_name(m.mode), &rows);
        m.precision.push_back(r.precision);
        m.recall.push_back(r.recall);
        m.f1.push_back(r.f1);
        m.auprc.push_back(r.auprc);
        for (auto& row : rows) {
          if (row.split != split_name) continue;
          row.split += "[seed=" + std::to_string(seed) + "]";
          all_rows.push_back(row);
        }
        std::fprintf(stderr, "seed %llu %-7s %s auprc=%.4f p=%.4f r=%.4f f1=%.4f\n",
                     static_cast<unsigned long long>(seed), mode_name(m.mode), split_name.c_str(),
                     r.auprc, r.precision, r.recall, r.f1);
      } catch (const Error& e) {
        std::cerr << "seed " << seed << " " << mode_name(m.mode) << " failed: " << e.what() << '\n';
        failed = true;
      }
    }
  }

  config.set_seed(base_seed);
  std::string seed_list;
  for (auto s : seeds) seed_list += (seed_list.empty() ? "" : ",") + std::to_string(s);
  const Provenance prov = config.provenance();
  write_metrics_csv(all_rows, out / "metrics.csv", prov);

  CsvWriter csv(out / "comparison.csv",
                {"model", "precision_mean", "precision_std", "recall_mean", "recall_std",
                 "f1_mean", "f1_std", "auprc_mean", "auprc_std", "runs"},
                prov);
  std::ostringstream table;
  table << "# config_hash=" << prov.config_hash << " seeds=" << seed_list << " split=" << split_name
        << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %-16s %-16s %-16s %-16s\n", "Model", "Precision",
                "Recall", "F1 Score", "AUPRC");
  table << line;
  for (const auto& m : models) {
    const Summary p = summarise(m.precision), r = summarise(m.recall), f = summarise(m.f1),
                  a = summarise(m.auprc);
    csv.write_row({m.label, format_real(p.mean), format_real(p.std), format_real(r.mean),
                   format_real(r.std), format_real(f.mean), format_real(f.std),
                   format_real(a.mean), format_real(a.std), std::to_string(m.auprc.size())});
    auto cell = [&](const Summary& s) {
      return m.auprc.empty() ? std::string("n/a") : fixed(s.mean, 3) + " ± " + fixed(s.std, 3);
    };
    std::snprintf(line, sizeof line, "%-18s %-17s %-17s %-17s %-17s\n", m.label, cell(p).c_str(),
                  cell(r).c_str(), cell(f).c_str(), cell(a).c_str());
    table << line;
  }
  std::ofstream(out / "comparison.txt") << table.str();
  std::cout << table.str();
  return failed ? kPartialComparison : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid federated fraud detection experiments"};
  app.require_subcommand(1);
  std::string config_path, out, mode_text = "hybrid", seeds_text;

  auto* gen = app.add_subcommand("generate", "Generate synthetic data and per-party views");
  auto* train = app.add_subcommand("train", "Train one model on generated data");
  auto* compare = app.add_subcommand("compare", "Train all three models over seeds");
  for (auto* sub : {gen, train, compare}) {
    sub->add_option("--config", config_path, "Experiment config (JSON with comments)");
    sub->add_option("--out", out, "Output directory (defaults to the config's output_dir)");
  }
  train->add_option("--mode", mode_text, "hybrid, central or local")
      ->check(CLI::IsMember({"hybrid", "central", "local"}));
  compare->add_option("--seeds", seeds_text, "Comma-separated seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigFailure;
  }

  ExperimentConfig config;
  try {
    config = resolve_config(config_path);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  }
  const fs::path out_dir = resolve_out(out, config);

  try {
    if (gen->parsed()) return cmd_generate(config, out_dir);
    if (train->parsed()) return cmd_train(config, parse_mode(mode_text), out_dir);
    return cmd_compare(config, out_dir, parse_seeds(seeds_text, config.seed));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const TrainingError& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return kTrainingFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gen->parsed() ? kConfigFailure : kTrainingFailure;
  }
}
