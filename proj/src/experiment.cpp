#include "hybridfl/experiment.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

using json = nlohmann::ordered_json;

// Reads keys out of one config object, tracking which ones were used so
// unknown keys can be reported.
class Section {
 public:
  Section(const json& node, std::string path, bool require_all)
      : node_(node), path_(std::move(path)), require_all_(require_all) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& field) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) {
      if (require_all_) throw ConfigError(where(key) + ": required by preset \"custom\"");
      return;
    }
    try {
      field = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where(key) + ": wrong type (" + std::string(it->type_name()) + ")");
    }
  }

  template <typename E>
  void read_enum(const std::string& key, E& field,
                 std::initializer_list<std::pair<const char*, E>> names) {
    std::string text;
    bool present = node_.contains(key);
    read(key, text);
    if (!present) return;
    for (const auto& [name, value] : names) {
      if (text == name) {
        field = value;
        return;
      }
    }
    std::string options;
    for (const auto& [name, value] : names) options += std::string(options.empty() ? "" : ", ") + name;
    throw ConfigError(where(key) + ": unknown value \"" + text + "\" (expected " + options + ")");
  }

  std::optional<Section> child(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) {
      if (require_all_) throw ConfigError(where(key) + ": required by preset \"custom\"");
      return std::nullopt;
    }
    return Section(*it, where(key), require_all_);
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

 private:
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& node_;
  std::string path_;
  bool require_all_;
  std::set<std::string> seen_;
};

void read_generator(Section& s, GeneratorConfig& g) {
  s.read("n_banks", g.n_banks);
  s.read("accounts_per_bank", g.accounts_per_bank);
  s.read("n_transactions", g.n_transactions);
  s.read("fraud_ratio", g.fraud_ratio);
  if (auto t = s.child("typologies")) {
    t->read("fan_out", g.typologies.fan_out);
    t->read("fan_in", g.typologies.fan_in);
    t->read("high_amount_burst", g.typologies.high_amount_burst);
    t->finish();
  }
  if (auto c = s.child("categories")) {
    c->read("account_type", g.categories.account_type);
    c->read("account_status", g.categories.account_status);
    c->read("country", g.categories.country);
    c->read("gender", g.categories.gender);
    c->read("tx_type", g.categories.tx_type);
    c->finish();
  }
  s.read("bad_account_fraction", g.bad_account_fraction);
  s.read("mule_bad_probability", g.mule_bad_probability);
  s.read("bank_deposit_shift", g.bank_deposit_shift);
  s.read("bad_prior_sar_rate", g.bad_prior_sar_rate);
  s.read("digital_bank_profile", g.digital_bank_profile);
  s.read("digital_deposit_offset", g.digital_deposit_offset);
  s.read("amount_log_mean", g.amount_log_mean);
  s.read("amount_log_sigma", g.amount_log_sigma);
  s.read("personal_amount_sigma", g.personal_amount_sigma);
  s.read("deposit_amount_gap", g.deposit_amount_gap);
  s.read("fraud_amount_log_shift", g.fraud_amount_log_shift);
  s.read("burst_amount_log_shift", g.burst_amount_log_shift);
  s.read("fraud_night_probability", g.fraud_night_probability);
  s.read("legit_night_probability", g.legit_night_probability);
  s.read("time_horizon_days", g.time_horizon_days);
  s.read("epoch_start", g.epoch_start);
  s.finish();
}

void read_partition(Section& s, PartitionConfig& p) {
  s.read("ratios", p.ratios);
  s.read_enum("strategy", p.strategy,
              {{"stratified", SplitStrategy::kStratified}, {"temporal", SplitStrategy::kTemporal}});
  s.finish();
}

void read_train(Section& s, TrainConfig& t) {
  s.read("batch_size", t.batch_size);
  s.read("learning_rate", t.learning_rate);
  if (auto l = s.child("loss")) {
    l->read_enum("kind", t.loss.kind, {{"bce", LossKind::kBce}, {"focal", LossKind::kFocal}});
    l->read("alpha", t.loss.alpha);
    l->read("gamma", t.loss.gamma);
    l->finish();
  }
  s.read("max_rounds", t.max_rounds);
  s.read("fedavg_every_n_rounds", t.fedavg_every_n_rounds);
  s.read("patience", t.patience);
  s.read("dropout_rate", t.dropout_rate);
  s.read("embedding_dim", t.embedding_dim);
  s.read("encoder_hidden", t.encoder_hidden);
  s.read("fusion_hidden", t.fusion_hidden);
  s.read("central_hidden", t.central_hidden);
  s.read_enum("central_architecture", t.central_architecture,
              {{"flat", CentralArchitecture::kFlat}, {"composite", CentralArchitecture::kComposite}});
  s.read_enum("optimizer", t.optimizer, {{"adam", OptimizerKind::kAdam}, {"sgd", OptimizerKind::kSgd}});
  s.read("adam_beta1", t.adam.beta1);
  s.read("adam_beta2", t.adam.beta2);
  s.read("adam_epsilon", t.adam.epsilon);
  s.read_enum("fedavg_weighting", t.fedavg_weighting,
              {{"usage_weighted", FedAvgWeighting::kUsageWeighted},
               {"uniform", FedAvgWeighting::kUniform}});
  s.read("threshold", t.threshold);
  s.read("prior_bias", t.prior_bias);
  s.finish();
}

json to_json(const ExperimentConfig& c) {
  const auto& g = c.generator;
  const auto& t = c.train;
  json j;
  j["preset"] = preset_name(c.preset);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["generator"] = {
      {"n_banks", g.n_banks},
      {"accounts_per_bank", g.accounts_per_bank},
      {"n_transactions", g.n_transactions},
      {"fraud_ratio", g.fraud_ratio},
      {"typologies",
       {{"fan_out", g.typologies.fan_out},
        {"fan_in", g.typologies.fan_in},
        {"high_amount_burst", g.typologies.high_amount_burst}}},
      {"categories",
       {{"account_type", g.categories.account_type},
        {"account_status", g.categories.account_status},
        {"country", g.categories.country},
        {"gender", g.categories.gender},
        {"tx_type", g.categories.tx_type}}},
      {"bad_account_fraction", g.bad_account_fraction},
      {"mule_bad_probability", g.mule_bad_probability},
      {"bank_deposit_shift", g.bank_deposit_shift},
      {"bad_prior_sar_rate", g.bad_prior_sar_rate},
      {"digital_bank_profile", g.digital_bank_profile},
      {"digital_deposit_offset", g.digital_deposit_offset},
      {"amount_log_mean", g.amount_log_mean},
      {"amount_log_sigma", g.amount_log_sigma},
      {"personal_amount_sigma", g.personal_amount_sigma},
      {"deposit_amount_gap", g.deposit_amount_gap},
      {"fraud_amount_log_shift", g.fraud_amount_log_shift},
      {"burst_amount_log_shift", g.burst_amount_log_shift},
      {"fraud_night_probability", g.fraud_night_probability},
      {"legit_night_probability", g.legit_night_probability},
      {"time_horizon_days", g.time_horizon_days},
      {"epoch_start", g.epoch_start},
  };
  j["partition"] = {
      {"ratios", c.partition.ratios},
      {"strategy", c.partition.strategy == SplitStrategy::kStratified ? "stratified" : "temporal"},
  };
  j["train"] = {
      {"batch_size", t.batch_size},
      {"learning_rate", t.learning_rate},
      {"loss",
       {{"kind", t.loss.kind == LossKind::kBce ? "bce" : "focal"},
        {"alpha", t.loss.alpha},
        {"gamma", t.loss.gamma}}},
      {"max_rounds", t.max_rounds},
      {"fedavg_every_n_rounds", t.fedavg_every_n_rounds},
      {"patience", t.patience},
      {"dropout_rate", t.dropout_rate},
      {"embedding_dim", t.embedding_dim},
      {"encoder_hidden", t.encoder_hidden},
      {"fusion_hidden", t.fusion_hidden},
      {"central_hidden", t.central_hidden},
      {"central_architecture",
       t.central_architecture == CentralArchitecture::kFlat ? "flat" : "composite"},
      {"optimizer", t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
      {"adam_beta1", t.adam.beta1},
      {"adam_beta2", t.adam.beta2},
      {"adam_epsilon", t.adam.epsilon},
      {"fedavg_weighting",
       t.fedavg_weighting == FedAvgWeighting::kUniform ? "uniform" : "usage_weighted"},
      {"threshold", t.threshold},
      {"prior_bias", t.prior_bias},
  };
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::for_preset(Preset preset) {
  ExperimentConfig c;
  c.preset = preset;
  if (preset == Preset::kSwift) {
    c.generator = GeneratorConfig::swift();
    c.train = TrainConfig::swift();
    c.partition.ratios = {0.6, 0.2, 0.2};
    c.output_dir = "runs/swift";
  } else {
    c.generator = GeneratorConfig::amlsim();
    c.train = TrainConfig::amlsim();
    if (preset == Preset::kCustom) c.output_dir = "runs/custom";
  }
  c.train.preset = preset;
  c.set_seed(c.seed);
  return c;
}

void ExperimentConfig::set_seed(std::uint64_t value) {
  seed = value;
  generator.seed = value;
  train.seed = value;
}

void ExperimentConfig::validate() const {
  generator.validate();
  train.validate();
  const auto& r = partition.ratios;
  if (r.size() != 2 && r.size() != 3) {
    throw ConfigError("partition.ratios: expected 2 or 3 entries");
  }
  double sum = 0.0;
  for (double x : r) {
    if (!(x > 0.0)) throw ConfigError("partition.ratios: entries must be positive");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("partition.ratios: must sum to 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

std::string ExperimentConfig::canonical_json() const { return to_json(*this).dump(); }

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_json()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Provenance ExperimentConfig::provenance() const { return {hash(), seed}; }

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(source + ": top level must be an object");
  Preset preset = Preset::kAmlsim;
  {
    Section top(root, "", false);
    top.read_enum("preset", preset,
                  {{"amlsim", Preset::kAmlsim}, {"swift", Preset::kSwift}, {"custom", Preset::kCustom}});
  }
  ExperimentConfig c = ExperimentConfig::for_preset(preset);
  const bool full = preset == Preset::kCustom;
  Section top(root, "", full);
  std::string preset_text;
  top.read("preset", preset_text);
  std::uint64_t seed = c.seed;
  top.read("seed", seed);
  top.read("output_dir", c.output_dir);
  if (auto g = top.child("generator")) read_generator(*g, c.generator);
  if (auto p = top.child("partition")) read_partition(*p, c.partition);
  if (auto t = top.child("train")) read_train(*t, c.train);
  top.finish();
  c.set_seed(seed);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = parse_experiment_config(buf.str(), path.string());
  if (const char* env = std::getenv("HYBRIDFL_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || *env == '-') {
      throw ConfigError(std::string("HYBRIDFL_SEED: not an unsigned integer: ") + env);
    }
    c.set_seed(v);
  }
  return c;
}

SplitIndex make_split(const ExperimentConfig& config, const TransactionPartyView& tx_view) {
  return split_train_val_test(tx_view, config.partition.ratios, config.seed,
                              config.partition.strategy);
}

std::int64_t training_cutoff(const TransactionPartyView& tx_view, const SplitIndex& split) {
  if (split.train.empty()) throw DataError("training split is empty");
  std::int64_t as_of = std::numeric_limits<std::int64_t>::min();
  for (const auto& id : split.train) {
    as_of = std::max(as_of, tx_view.rows[tx_view.row_index(id)].timestamp);
  }
  return as_of;
}

PreparedData prepare_data(const ExperimentConfig& config, GeneratedData raw) {
  PreparedData out;
  out.raw = std::move(raw);
  std::vector<std::string> bank_ids;
  for (int b = 0; b < config.generator.n_banks; ++b) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "BANK%02d", b);
    bank_ids.push_back(buf);
  }
  const auto& cats = config.generator.categories;
  TransactionPartyView tx = build_transaction_view(out.raw.accounts, out.raw.transactions, cats);
  out.split = make_split(config, tx);
  out.role_features = derive_role_features(out.raw.transactions, out.raw.accounts,
                                           training_cutoff(tx, out.split));
  out.views.bank_views = build_bank_views(out.raw.accounts, out.role_features, cats, bank_ids);
  out.views.tx_view = std::move(tx);
  return out;
}

void write_prepared_data(const PreparedData& data, const std::filesystem::path& dir,
                         const Provenance& provenance) {
  std::filesystem::create_directories(dir);
  write_csv(data.raw.accounts, dir / "accounts.csv", provenance);
  write_csv(data.raw.transactions, dir / "transactions.csv", provenance);
  write_role_features_csv(data.role_features, data.raw.accounts, dir / "role_features.csv",
                          provenance);
  write_transaction_view_csv(data.views.tx_view, dir / "txparty.csv", provenance);
  for (const auto& [id, view] : data.views.bank_views) {
    write_bank_view_csv(view, dir / bank_view_filename(id), provenance);
  }
  write_splits_csv(data.split, data.views.tx_view, dir / "splits.csv", provenance);
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kHybrid: return "hybrid";
    case Mode::kCentral: return "central";
    case Mode::kLocal: return "local";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "hybrid") return Mode::kHybrid;
  if (text == "central") return Mode::kCentral;
  if (text == "local") return Mode::kLocal;
  throw UsageError("unknown mode \"" + text + "\" (expected hybrid, central or local)");
}

LoadedViews load_views(const std::filesystem::path& dir, Mode mode) {
  auto need = [&](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw DataError("missing data file " + p.string());
    return p;
  };
  LoadedViews out;
  out.tx_view = read_transaction_view_csv(need(dir / "txparty.csv"));
  out.split = read_splits_csv(need(dir / "splits.csv"));
  if (mode != Mode::kLocal) {
    for (const auto& id : out.tx_view.bank_ids()) {
      out.bank_views.emplace(id, read_bank_view_csv(need(dir / bank_view_filename(id)), id));
    }
  }
  return out;
}

TrainResult run_mode(const ExperimentConfig& config, Mode mode, const LoadedViews& views) {
  switch (mode) {
    case Mode::kHybrid:
      return train_hybridfl(config.train, views.tx_view, views.bank_views, views.split);
    case Mode::kCentral:
      return train_centralized(config.train, views.tx_view, views.bank_views, views.split);
    case Mode::kLocal:
      return train_local_only(config.train, views.tx_view, views.split);
  }
  throw UsageError("unknown mode");
}

}  // namespace hybridfl
