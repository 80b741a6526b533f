#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridfl/federation.hpp"
#include "hybridfl/loss.hpp"
#include "hybridfl/metrics.hpp"
#include "hybridfl/optimizer.hpp"
#include "hybridfl/partition.hpp"
#include "hybridfl/transport.hpp"

namespace hybridfl {

enum class Preset { kAmlsim, kSwift, kCustom };
const char* preset_name(Preset preset);

// kComposite trains the hybrid encoder layout on pooled data (one party
// holding every account) instead of a flat MLP.
enum class CentralArchitecture { kFlat, kComposite };

struct TrainConfig {
  Preset preset = Preset::kAmlsim;
  std::size_t batch_size = 128;
  double learning_rate = 5e-5;
  LossConfig loss = LossConfig::bce();
  std::uint32_t max_rounds = 50;
  std::uint32_t fedavg_every_n_rounds = 1;
  std::uint32_t patience = 5;
  double dropout_rate = 0.0;
  std::size_t embedding_dim = 16;
  std::vector<std::size_t> encoder_hidden = {64, 32};
  std::vector<std::size_t> fusion_hidden = {64, 32};
  std::vector<std::size_t> central_hidden = {128, 64};
  CentralArchitecture central_architecture = CentralArchitecture::kComposite;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamConfig adam;
  FedAvgWeighting fedavg_weighting = FedAvgWeighting::kUsageWeighted;
  double threshold = kDefaultThreshold;
  // Output bias starts at the log-odds of the training positive rate.
  bool prior_bias = true;
  std::uint64_t seed = 7;

  static TrainConfig amlsim();
  static TrainConfig swift();
  void validate() const;
};

struct RoundRecord {
  std::uint32_t round = 0;
  double train_loss = 0.0;
  double val_auprc = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
  double val_f1 = 0.0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<RoundRecord> rounds;
  std::uint32_t best_round = 0;
  double best_val_auprc = 0.0;
  std::uint64_t sync_events = 0;
};

// round,train_loss,val_auprc,val_precision,val_recall,val_f1,messages,bytes
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path,
                       const std::optional<Provenance>& provenance = std::nullopt);

enum class ModelTag { kHybrid, kCentralized, kLocal };
const char* model_tag_name(ModelTag tag);

// Network names: hybrid uses "tx_encoder", "fusion_head" and
// "<bank>/sender", "<bank>/receiver"; local uses "tx_encoder", "head";
// flat centralised uses "central". Scalers are keyed by party.
struct ModelBundle {
  ModelTag tag = ModelTag::kLocal;
  CentralArchitecture central_architecture = CentralArchitecture::kComposite;
  std::map<std::string, MlpParams> networks;
  std::map<std::string, FeatureScaler> scalers;
  std::uint32_t round = 0;
  double val_auprc = 0.0;

  bool needs_banks() const;
  // One HYFL file per network plus manifest.json.
  void save(const std::filesystem::path& dir, const std::string& config_hash) const;
};

struct TrainResult {
  ModelBundle bundle;
  TrainHistory history;
};

TrainResult train_hybridfl(const TrainConfig& config, const TransactionPartyView& tx_view,
                           const BankViews& bank_views, const SplitIndex& split,
                           const TransportConfig& transport = {});

// Composite encoder layout over pooled accounts; a flat MLP over the merged
// table when configured.
TrainResult train_centralized(const TrainConfig& config, const TransactionPartyView& tx_view,
                              const BankViews& bank_views, const SplitIndex& split);

TrainResult train_local_only(const TrainConfig& config, const TransactionPartyView& tx_view,
                             const SplitIndex& split);

// Scores `tx_ids` with dropout off. Hybrid and centralised bundles need the
// bank views; local bundles ignore them.
std::vector<double> score(const ModelBundle& bundle, const TransactionPartyView& tx_view,
                          std::span<const std::string> tx_ids, const BankViews* bank_views);

MetricsReport evaluate(const ModelBundle& bundle, const TransactionPartyView& tx_view,
                       std::span<const std::string> tx_ids, const BankViews* bank_views,
                       double threshold = kDefaultThreshold);

// Bank scaler rows: the bank's accounts referenced by training
// transactions, or every account when none are.
FeatureScaler fit_bank_scaler(const BankView& bank, const TransactionPartyView& tx_view,
                              std::span<const std::string> train_ids);

std::vector<int> labels_for(const TransactionPartyView& view, std::span<const std::string> ids);

}  // namespace hybridfl
