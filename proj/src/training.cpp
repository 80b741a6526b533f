#include "hybridfl/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <utility>

#include <nlohmann/json.hpp>

#include "hybridfl/errors.hpp"
#include "hybridfl/param_io.hpp"
#include "hybridfl/random.hpp"

namespace hybridfl {
namespace {

constexpr const char* kTxScaler = "txparty";
constexpr const char* kCentralScaler = "central";
constexpr const char* kPooledBank = "central";

std::vector<std::size_t> rows_of(const TransactionPartyView& view,
                                 std::span<const std::string> ids) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) rows.push_back(view.row_index(id));
  return rows;
}

MlpParams make_net(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                   OutputActivation act, double dropout, Rng& rng) {
  return init_mlp(MlpSpec{in, hidden, out, act, dropout}, rng);
}

// No-op when the option is off or the train split has a single class.
void apply_prior_bias(MlpParams& head, const TrainConfig& cfg, const TransactionPartyView& view,
                      std::span<const std::string> train_ids) {
  if (!cfg.prior_bias || train_ids.empty()) return;
  std::size_t pos = 0;
  for (int y : labels_for(view, train_ids)) pos += y == 1;
  if (pos == 0 || pos == train_ids.size()) return;
  const double rate = static_cast<double>(pos) / static_cast<double>(train_ids.size());
  head.layers.back().bias.assign(head.layers.back().bias.size(), std::log(rate / (1.0 - rate)));
}

std::vector<double> chain_predict(const std::vector<const MlpParams*>& nets, Matrix x) {
  for (const auto* net : nets) x = mlp_forward(*net, x, false, nullptr).output;
  return std::move(x.data());
}

// Networks trained end to end at a single party; the last one ends in a
// sigmoid with one output.
class Stack {
 public:
  Stack(std::vector<MlpParams> nets, const TrainConfig& cfg, std::uint64_t dropout_seed)
      : nets_(std::move(nets)), loss_(cfg.loss), lr_(cfg.learning_rate), rng_(dropout_seed) {
    for (const auto& net : nets_) opts_.emplace_back(cfg.optimizer, net, cfg.adam);
  }

  double train_step(const Matrix& x, std::span<const int> labels) {
    std::vector<ForwardCache> caches;
    Matrix out = x;
    for (const auto& net : nets_) {
      auto fwd = mlp_forward(net, out, true, &rng_);
      out = std::move(fwd.output);
      caches.push_back(std::move(fwd.cache));
    }
    const LossResult loss = compute_loss(loss_, out.data(), labels);
    Matrix grad(out.rows(), 1, loss.grad_wrt_logits);
    std::vector<MlpGrads> grads(nets_.size());
    for (std::size_t k = nets_.size(); k-- > 0;) {
      auto back = mlp_backward(nets_[k], caches[k], grad,
                               k + 1 == nets_.size() ? GradientOf::kLogits : GradientOf::kOutput);
      grads[k] = std::move(back.param_grads);
      grad = std::move(back.input_grad);
    }
    for (std::size_t k = 0; k < nets_.size(); ++k) opts_[k].step(nets_[k], grads[k], lr_);
    return loss.mean_loss;
  }

  std::vector<double> predict(const Matrix& x) const {
    std::vector<const MlpParams*> ptrs;
    for (const auto& net : nets_) ptrs.push_back(&net);
    return chain_predict(ptrs, x);
  }

  const std::vector<MlpParams>& nets() const { return nets_; }

 private:
  std::vector<MlpParams> nets_;
  std::vector<Optimizer> opts_;
  LossConfig loss_;
  double lr_;
  Rng rng_;
};

struct LoopHooks {
  std::function<double(std::span<const std::string>, std::uint32_t, std::uint32_t)> train_batch;
  std::function<std::vector<double>(std::span<const std::string>)> score;
  std::function<void(std::uint32_t)> end_of_round;
  std::function<ModelBundle()> snapshot;
  std::function<TransportStats()> traffic;
};

TrainResult run_loop(const TrainConfig& cfg, const TransactionPartyView& view,
                     const SplitIndex& split, const LoopHooks& hooks) {
  if (split.train.empty()) throw DataError("training split is empty");
  if (split.validation.empty()) throw DataError("validation split is empty");
  const std::vector<int> val_labels = labels_for(view, split.validation);
  Rng shuffler(derive_seed(cfg.seed, kShuffleStream));
  std::vector<std::string> order = split.train;
  TrainResult result;
  std::uint32_t since_best = 0;
  bool have_best = false;

  for (std::uint32_t round = 1; round <= cfg.max_rounds; ++round) {
    const auto started = std::chrono::steady_clock::now();
    const TransportStats before = hooks.traffic ? hooks.traffic() : TransportStats{};
    std::shuffle(order.begin(), order.end(), shuffler);
    double loss_sum = 0.0;
    std::uint32_t batch = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch) {
      const std::span<const std::string> part(order.data() + begin,
                                              std::min(cfg.batch_size, order.size() - begin));
      double loss = 0.0;
      try {
        loss = hooks.train_batch(part, round, batch);
      } catch (const TrainingError&) {
        throw;
      } catch (const Error& e) {
        throw TrainingError(e.what(), static_cast<int>(round), static_cast<int>(batch));
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("loss is not finite", static_cast<int>(round),
                            static_cast<int>(batch));
      }
      loss_sum += loss * static_cast<double>(part.size());
    }
    if (hooks.end_of_round) {
      try {
        hooks.end_of_round(round);
      } catch (const Error& e) {
        throw TrainingError(e.what(), static_cast<int>(round), static_cast<int>(batch));
      }
    }
    const TransportStats after = hooks.traffic ? hooks.traffic() : TransportStats{};

    const MetricsReport report =
        make_report(hooks.score(split.validation), val_labels, cfg.threshold);
    RoundRecord rec;
    rec.round = round;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_auprc = report.auprc;
    rec.val_precision = report.precision;
    rec.val_recall = report.recall;
    rec.val_f1 = report.f1;
    rec.messages = after.messages - before.messages;
    rec.bytes = after.bytes - before.bytes;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.rounds.push_back(rec);

    if (!have_best || report.auprc > result.history.best_val_auprc) {
      have_best = true;
      since_best = 0;
      result.history.best_round = round;
      result.history.best_val_auprc = report.auprc;
      result.bundle = hooks.snapshot();
      result.bundle.round = round;
      result.bundle.val_auprc = report.auprc;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

BankView pool_banks(const BankViews& banks) {
  if (banks.empty()) throw ConfigError("no bank views");
  const BankView& first = banks.begin()->second;
  BankView pooled;
  pooled.bank_id = kPooledBank;
  pooled.layout = first.layout;
  pooled.general_width = first.general_width;
  pooled.role_width = first.role_width;
  std::size_t total = 0;
  for (const auto& [id, b] : banks) {
    if (b.layout.names != first.layout.names) {
      throw SchemaError("bank " + id + " has a different feature layout");
    }
    total += b.account_ids.size();
  }
  pooled.features = Matrix(total, first.features.cols());
  std::size_t r = 0;
  for (const auto& [id, b] : banks) {
    for (std::size_t i = 0; i < b.account_ids.size(); ++i, ++r) {
      pooled.account_ids.push_back(b.account_ids[i]);
      pooled.row_of[b.account_ids[i]] = r;
      auto src = b.features.row(i);
      std::copy(src.begin(), src.end(), pooled.features.row(r).begin());
    }
  }
  return pooled;
}

TransactionPartyView reroute_to_pool(TransactionPartyView view) {
  for (auto& [account, bank] : view.routing) bank = kPooledBank;
  for (auto& row : view.rows) {
    row.sender_bank_id = kPooledBank;
    row.receiver_bank_id = kPooledBank;
  }
  return view;
}

struct HybridNets {
  MlpParams tx_encoder;
  MlpParams fusion_head;
  MlpParams sender;
  MlpParams receiver;
};

HybridNets init_hybrid(const TrainConfig& cfg, std::size_t tx_width, std::size_t role_width) {
  Rng rng(derive_seed(cfg.seed, kInitStream));
  const std::size_t p = cfg.embedding_dim;
  const double d = cfg.dropout_rate;
  HybridNets n;
  n.tx_encoder = make_net(tx_width, cfg.encoder_hidden, p, OutputActivation::kNone, d, rng);
  n.fusion_head = make_net(3 * p, cfg.fusion_hidden, 1, OutputActivation::kSigmoid, d, rng);
  n.sender = make_net(role_width, cfg.encoder_hidden, p, OutputActivation::kNone, d, rng);
  n.receiver = make_net(role_width, cfg.encoder_hidden, p, OutputActivation::kNone, d, rng);
  return n;
}

HybridFederation build_federation(const ModelBundle& bundle, const TrainConfig* cfg,
                                  const TransactionPartyView& tx_view, const BankViews& banks,
                                  const TransportConfig& transport) {
  OptimizerSettings settings;
  LossConfig loss;
  std::uint64_t dropout_base = 0;
  FedAvgWeighting weighting = FedAvgWeighting::kUsageWeighted;
  if (cfg != nullptr) {
    settings = {cfg->optimizer, cfg->adam, cfg->learning_rate};
    loss = cfg->loss;
    dropout_base = derive_seed(cfg->seed, kDropoutStream);
    weighting = cfg->fedavg_weighting;
  }
  auto net = [&](const std::string& name) -> const MlpParams& {
    auto it = bundle.networks.find(name);
    if (it == bundle.networks.end()) throw UsageError("bundle has no network " + name);
    return it->second;
  };
  auto scaler = [&](const std::string& name) -> const FeatureScaler& {
    auto it = bundle.scalers.find(name);
    if (it == bundle.scalers.end()) throw UsageError("bundle has no scaler " + name);
    return it->second;
  };
  ActiveParty active(tx_view, scaler(kTxScaler), net("tx_encoder"), net("fusion_head"), loss,
                     settings, derive_seed(dropout_base, 0));
  std::vector<BankParty> parties;
  std::uint64_t stream = 1;
  for (const auto& [id, view] : banks) {
    parties.emplace_back(view, scaler(id), net(id + "/sender"), net(id + "/receiver"), settings,
                         derive_seed(dropout_base, stream++));
  }
  return HybridFederation(std::move(active), std::move(parties), Transport(transport), weighting);
}

TrainResult train_federated(const TrainConfig& cfg, const TransactionPartyView& tx_view,
                            const BankViews& bank_views, const SplitIndex& split,
                            const TransportConfig& transport, ModelTag tag) {
  cfg.validate();
  if (bank_views.empty()) throw ConfigError("hybrid training needs at least one bank view");
  const std::size_t role_width = bank_views.begin()->second.role_input_width();
  for (const auto& [id, b] : bank_views) {
    if (b.role_input_width() != role_width) {
      throw ConfigError("bank " + id + " role features differ in width");
    }
  }
  HybridNets nets = init_hybrid(cfg, tx_view.features.cols(), role_width);
  apply_prior_bias(nets.fusion_head, cfg, tx_view, split.train);

  ModelBundle initial;
  initial.tag = tag;
  initial.central_architecture = CentralArchitecture::kComposite;
  initial.networks["tx_encoder"] = nets.tx_encoder;
  initial.networks["fusion_head"] = nets.fusion_head;
  const auto train_rows = rows_of(tx_view, split.train);
  initial.scalers[kTxScaler] = fit_scaler(tx_view.features, train_rows, tx_view.layout);
  for (const auto& [id, b] : bank_views) {
    initial.networks[id + "/sender"] = nets.sender;
    initial.networks[id + "/receiver"] = nets.receiver;
    initial.scalers[id] = fit_bank_scaler(b, tx_view, split.train);
  }
  HybridFederation fed = build_federation(initial, &cfg, tx_view, bank_views, transport);

  LoopHooks hooks;
  hooks.train_batch = [&](std::span<const std::string> ids, std::uint32_t round,
                          std::uint32_t batch) { return fed.train_batch(ids, round, batch).loss; };
  hooks.score = [&](std::span<const std::string> ids) { return fed.predict(ids); };
  hooks.end_of_round = [&](std::uint32_t round) {
    if (round % cfg.fedavg_every_n_rounds == 0) fed.synchronize(round);
  };
  // The pooled centralised run has no parties to talk between.
  if (tag == ModelTag::kHybrid) hooks.traffic = [&] { return fed.transport().stats(); };
  hooks.snapshot = [&] {
    ModelBundle b;
    b.tag = tag;
    b.central_architecture = CentralArchitecture::kComposite;
    b.scalers = initial.scalers;
    b.networks["tx_encoder"] = fed.active().tx_encoder();
    b.networks["fusion_head"] = fed.active().fusion_head();
    for (const auto& bank : fed.banks()) {
      b.networks[bank.bank_id() + "/sender"] = bank.encoder(Role::kSender);
      b.networks[bank.bank_id() + "/receiver"] = bank.encoder(Role::kReceiver);
    }
    return b;
  };
  TrainResult result = run_loop(cfg, tx_view, split, hooks);
  if (tag == ModelTag::kHybrid) result.history.sync_events = fed.sync_events();
  return result;
}

}  // namespace

const char* preset_name(Preset preset) {
  switch (preset) {
    case Preset::kAmlsim: return "amlsim";
    case Preset::kSwift: return "swift";
    case Preset::kCustom: return "custom";
  }
  return "?";
}

const char* model_tag_name(ModelTag tag) {
  switch (tag) {
    case ModelTag::kHybrid: return "hybrid";
    case ModelTag::kCentralized: return "centralized";
    case ModelTag::kLocal: return "local";
  }
  return "?";
}

TrainConfig TrainConfig::amlsim() { return {}; }

TrainConfig TrainConfig::swift() {
  TrainConfig c;
  c.preset = Preset::kSwift;
  c.learning_rate = 1e-5;
  c.loss = LossConfig::focal(0.99, 2.0);
  c.embedding_dim = 64;
  c.dropout_rate = 0.2;
  return c;
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& field, const std::string& why) {
    throw ConfigError("train." + field + ": " + why);
  };
  if (batch_size == 0) bad("batch_size", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    bad("learning_rate", "must be a positive number");
  }
  if (max_rounds == 0) bad("max_rounds", "must be positive");
  if (fedavg_every_n_rounds == 0) bad("fedavg_every_n_rounds", "must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate", "must lie in [0, 1)");
  if (embedding_dim == 0) bad("embedding_dim", "must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) bad("threshold", "must lie in [0, 1]");
  for (auto h : encoder_hidden) if (h == 0) bad("encoder_hidden", "layer sizes must be positive");
  for (auto h : fusion_hidden) if (h == 0) bad("fusion_hidden", "layer sizes must be positive");
  for (auto h : central_hidden) if (h == 0) bad("central_hidden", "layer sizes must be positive");
  if (loss.kind == LossKind::kFocal) {
    if (!(loss.alpha > 0.0 && loss.alpha < 1.0)) bad("loss.alpha", "must lie in (0, 1)");
    if (!(loss.gamma >= 0.0)) bad("loss.gamma", "must be non-negative");
  }
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path,
                       const std::optional<Provenance>& provenance) {
  CsvWriter out(path,
                {"round", "train_loss", "val_auprc", "val_precision", "val_recall", "val_f1",
                 "messages", "bytes"},
                provenance);
  for (const auto& r : history.rounds) {
    out.write_row({std::to_string(r.round), format_real(r.train_loss), format_real(r.val_auprc),
                   format_real(r.val_precision), format_real(r.val_recall),
                   format_real(r.val_f1), std::to_string(r.messages), std::to_string(r.bytes)});
  }
}

bool ModelBundle::needs_banks() const { return tag != ModelTag::kLocal; }

void ModelBundle::save(const std::filesystem::path& dir, const std::string& config_hash) const {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["tag"] = model_tag_name(tag);
  if (tag == ModelTag::kCentralized) {
    manifest["central_architecture"] =
        central_architecture == CentralArchitecture::kFlat ? "flat" : "composite";
  }
  manifest["config_hash"] = config_hash;
  manifest["round"] = round;
  manifest["val_auprc"] = format_real(val_auprc);
  auto& nets = manifest["networks"] = nlohmann::ordered_json::array();
  for (const auto& [name, params] : networks) {
    std::string file = name;
    std::replace(file.begin(), file.end(), '/', '.');
    file += ".hyfl";
    save_params(params, dir / file);
    nets.push_back({{"name", name},
                    {"file", file},
                    {"output", params.output_activation == OutputActivation::kSigmoid
                                   ? "sigmoid"
                                   : "linear"},
                    {"dropout", params.dropout_rate}});
  }
  auto& sc = manifest["scalers"] = nlohmann::ordered_json::object();
  for (const auto& [name, s] : scalers) {
    std::vector<bool> pass(s.pass_through.begin(), s.pass_through.end());
    sc[name] = {{"mean", s.mean}, {"std", s.std}, {"pass_through", pass}};
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

std::vector<int> labels_for(const TransactionPartyView& view, std::span<const std::string> ids) {
  std::vector<int> labels;
  labels.reserve(ids.size());
  for (const auto& id : ids) labels.push_back(view.rows[view.row_index(id)].label);
  return labels;
}

FeatureScaler fit_bank_scaler(const BankView& bank, const TransactionPartyView& tx_view,
                              std::span<const std::string> train_ids) {
  std::vector<std::size_t> rows;
  for (const auto& id : accounts_referenced(tx_view, train_ids, bank.bank_id)) {
    auto it = bank.row_of.find(id);
    if (it == bank.row_of.end()) {
      throw IntegrityError("account " + id + " is routed to " + bank.bank_id +
                           " but missing from its view");
    }
    rows.push_back(it->second);
  }
  if (rows.empty()) {
    rows.resize(bank.features.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  std::sort(rows.begin(), rows.end());
  return fit_scaler(bank.features, rows, bank.layout);
}

TrainResult train_hybridfl(const TrainConfig& config, const TransactionPartyView& tx_view,
                           const BankViews& bank_views, const SplitIndex& split,
                           const TransportConfig& transport) {
  return train_federated(config, tx_view, bank_views, split, transport, ModelTag::kHybrid);
}

TrainResult train_centralized(const TrainConfig& config, const TransactionPartyView& tx_view,
                              const BankViews& bank_views, const SplitIndex& split) {
  config.validate();
  if (config.central_architecture == CentralArchitecture::kComposite) {
    BankViews pooled{{kPooledBank, pool_banks(bank_views)}};
    return train_federated(config, reroute_to_pool(tx_view), pooled, split, {},
                           ModelTag::kCentralized);
  }
  const MergedTable merged = build_merged_table(tx_view, bank_views);
  std::vector<std::size_t> train_rows;
  for (const auto& id : split.train) train_rows.push_back(merged.row_of.at(id));
  std::sort(train_rows.begin(), train_rows.end());
  const FeatureScaler scaler = fit_scaler(merged.features, train_rows, merged.layout);
  const Matrix inputs = apply_scaler(scaler, merged.features);

  Rng init(derive_seed(config.seed, kInitStream));
  MlpParams net = make_net(inputs.cols(), config.central_hidden, 1, OutputActivation::kSigmoid,
                           config.dropout_rate, init);
  apply_prior_bias(net, config, tx_view, split.train);
  Stack model({std::move(net)}, config, derive_seed(derive_seed(config.seed, kDropoutStream), 0));
  auto rows = [&](std::span<const std::string> ids) {
    std::vector<std::size_t> r;
    r.reserve(ids.size());
    for (const auto& id : ids) r.push_back(merged.row_of.at(id));
    return r;
  };
  LoopHooks hooks;
  hooks.train_batch = [&](std::span<const std::string> ids, std::uint32_t, std::uint32_t) {
    const auto r = rows(ids);
    std::vector<int> y;
    for (auto i : r) y.push_back(merged.labels[i]);
    return model.train_step(inputs.gather_rows(r), y);
  };
  hooks.score = [&](std::span<const std::string> ids) {
    return model.predict(inputs.gather_rows(rows(ids)));
  };
  hooks.snapshot = [&] {
    ModelBundle b;
    b.tag = ModelTag::kCentralized;
    b.central_architecture = CentralArchitecture::kFlat;
    b.networks["central"] = model.nets().front();
    b.scalers[kCentralScaler] = scaler;
    return b;
  };
  return run_loop(config, tx_view, split, hooks);
}

TrainResult train_local_only(const TrainConfig& config, const TransactionPartyView& tx_view,
                             const SplitIndex& split) {
  config.validate();
  const auto train_rows = rows_of(tx_view, split.train);
  const FeatureScaler scaler = fit_scaler(tx_view.features, train_rows, tx_view.layout);
  const Matrix inputs = apply_scaler(scaler, tx_view.features);

  Rng init(derive_seed(config.seed, kInitStream));
  const std::size_t p = config.embedding_dim;
  MlpParams encoder = make_net(inputs.cols(), config.encoder_hidden, p, OutputActivation::kNone,
                               config.dropout_rate, init);
  MlpParams head = make_net(p, config.fusion_hidden, 1, OutputActivation::kSigmoid,
                            config.dropout_rate, init);
  apply_prior_bias(head, config, tx_view, split.train);
  Stack model({std::move(encoder), std::move(head)}, config,
              derive_seed(derive_seed(config.seed, kDropoutStream), 0));

  LoopHooks hooks;
  hooks.train_batch = [&](std::span<const std::string> ids, std::uint32_t, std::uint32_t) {
    const auto r = rows_of(tx_view, ids);
    std::vector<int> y;
    for (auto i : r) y.push_back(tx_view.rows[i].label);
    return model.train_step(inputs.gather_rows(r), y);
  };
  hooks.score = [&](std::span<const std::string> ids) {
    return model.predict(inputs.gather_rows(rows_of(tx_view, ids)));
  };
  hooks.snapshot = [&] {
    ModelBundle b;
    b.tag = ModelTag::kLocal;
    b.networks["tx_encoder"] = model.nets()[0];
    b.networks["head"] = model.nets()[1];
    b.scalers[kTxScaler] = scaler;
    return b;
  };
  return run_loop(config, tx_view, split, hooks);
}

std::vector<double> score(const ModelBundle& bundle, const TransactionPartyView& tx_view,
                          std::span<const std::string> tx_ids, const BankViews* bank_views) {
  if (bundle.needs_banks() && bank_views == nullptr) {
    throw UsageError(std::string(model_tag_name(bundle.tag)) +
                     " model needs the bank views to score transactions");
  }
  if (bundle.tag == ModelTag::kLocal) {
    const Matrix x = apply_scaler(bundle.scalers.at(kTxScaler),
                                  tx_view.features.gather_rows(rows_of(tx_view, tx_ids)));
    return chain_predict({&bundle.networks.at("tx_encoder"), &bundle.networks.at("head")}, x);
  }
  if (bundle.tag == ModelTag::kCentralized &&
      bundle.central_architecture == CentralArchitecture::kFlat) {
    const MergedTable merged = build_merged_table(tx_view, *bank_views);
    std::vector<std::size_t> r;
    for (const auto& id : tx_ids) r.push_back(merged.row_of.at(id));
    const Matrix x = apply_scaler(bundle.scalers.at(kCentralScaler), merged.features.gather_rows(r));
    return chain_predict({&bundle.networks.at("central")}, x);
  }
  if (bundle.tag == ModelTag::kCentralized) {
    BankViews pooled{{kPooledBank, pool_banks(*bank_views)}};
    HybridFederation fed =
        build_federation(bundle, nullptr, reroute_to_pool(tx_view), pooled, {});
    return fed.predict(tx_ids);
  }
  HybridFederation fed = build_federation(bundle, nullptr, tx_view, *bank_views, {});
  return fed.predict(tx_ids);
}

MetricsReport evaluate(const ModelBundle& bundle, const TransactionPartyView& tx_view,
                       std::span<const std::string> tx_ids, const BankViews* bank_views,
                       double threshold) {
  return make_report(score(bundle, tx_view, tx_ids, bank_views), labels_for(tx_view, tx_ids),
                     threshold);
}

}  // namespace hybridfl
