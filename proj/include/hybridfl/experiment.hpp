#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hybridfl/datagen.hpp"
#include "hybridfl/partition.hpp"
#include "hybridfl/training.hpp"

namespace hybridfl {

struct PartitionConfig {
  std::vector<double> ratios = {0.7, 0.15, 0.15};
  SplitStrategy strategy = SplitStrategy::kStratified;
};

// One seed drives generation, splitting, initialisation, shuffling and
// dropout (each through its own derived stream).
struct ExperimentConfig {
  Preset preset = Preset::kAmlsim;
  std::uint64_t seed = 7;
  GeneratorConfig generator;
  PartitionConfig partition;
  TrainConfig train;
  std::string output_dir = "runs/amlsim";

  static ExperimentConfig for_preset(Preset preset);
  void set_seed(std::uint64_t value);
  void validate() const;

  // Fully resolved config as compact JSON with a fixed key order.
  std::string canonical_json() const;
  // FNV-1a 64 of canonical_json(), 16 hex digits.
  std::string hash() const;
  Provenance provenance() const;
};

// JSON with // and /* */ comments. Sections override the preset's values;
// preset "custom" requires every key. Throws ConfigError naming the field.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& source = "<config>");
// Reads the file and applies the HYBRIDFL_SEED override.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Split over the transaction party's rows; role features use
// as_of = latest training timestamp.
SplitIndex make_split(const ExperimentConfig& config, const TransactionPartyView& tx_view);
std::int64_t training_cutoff(const TransactionPartyView& tx_view, const SplitIndex& split);

struct PreparedData {
  GeneratedData raw;
  RoleFeatureMap role_features;
  HybridPartition views;
  SplitIndex split;
};

PreparedData prepare_data(const ExperimentConfig& config, GeneratedData raw);

// accounts.csv, transactions.csv, role_features.csv and the per-party view
// files txparty.csv, bank_<id>.csv, splits.csv.
void write_prepared_data(const PreparedData& data, const std::filesystem::path& dir,
                         const Provenance& provenance);

enum class Mode { kHybrid, kCentral, kLocal };
const char* mode_name(Mode mode);
Mode parse_mode(const std::string& text);

// What a mode may read from a data directory: local mode never touches
// bank files.
struct LoadedViews {
  TransactionPartyView tx_view;
  BankViews bank_views;
  SplitIndex split;
};
LoadedViews load_views(const std::filesystem::path& dir, Mode mode);

TrainResult run_mode(const ExperimentConfig& config, Mode mode, const LoadedViews& views);

}  // namespace hybridfl
