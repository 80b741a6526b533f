#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfl/loss.hpp"
#include "hybridfl/messages.hpp"
#include "hybridfl/optimizer.hpp"
#include "hybridfl/partition.hpp"

namespace hybridfl {

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::kAdam;
  AdamConfig adam;
  double learning_rate = 5e-5;
};

// Passive party. Holds one bank's account features and its sender and
// receiver encoders; never sees labels or transaction rows.
class BankParty {
 public:
  BankParty(BankView view, FeatureScaler scaler, MlpParams sender_encoder,
            MlpParams receiver_encoder, OptimizerSettings optimizer, std::uint64_t dropout_seed);

  // Embeddings row-aligned with req.account_ids. Training requests keep
  // their forward cache until the matching GradPush arrives.
  EmbedResponse handle_embed(const EmbedRequest& req);

  // Backprop through the cached forward pass and one optimiser step on
  // the role's encoder. Consumes the cache.
  void apply_grads(const GradPush& grad);

  // Encoders plus per-role usage counts since the last broadcast.
  ParamsUpload make_upload() const;
  // Replaces both encoders; optimiser moments are kept.
  void apply_broadcast(const ParamsBroadcast& broadcast);

  const std::string& bank_id() const { return view_.bank_id; }
  const BankView& view() const { return view_; }
  const FeatureScaler& scaler() const { return scaler_; }
  const MlpParams& encoder(Role role) const;
  std::size_t pending_requests() const { return pending_.size(); }
  bool has_pending(const RequestId& id) const { return pending_.count(id) > 0; }

 private:
  struct Pending {
    Role role;
    ForwardCache cache;
  };

  BankView view_;
  FeatureScaler scaler_;
  Matrix sender_inputs_;    // scaled general ++ outgoing, one row per account
  Matrix receiver_inputs_;  // scaled general ++ incoming
  MlpParams sender_;
  MlpParams receiver_;
  Optimizer sender_opt_;
  Optimizer receiver_opt_;
  OptimizerSettings settings_;
  Rng rng_;
  std::map<RequestId, Pending> pending_;
  std::uint64_t sender_usage_ = 0;
  std::uint64_t receiver_usage_ = 0;
};

// One embedding request the active party must issue for a batch.
struct RouteEntry {
  std::string bank_id;
  Role role = Role::kSender;
  RequestId request_id;
  std::vector<std::string> account_ids;
  std::vector<std::size_t> positions;  // row of each account in the batch
};

struct RoutingPlan {
  std::vector<std::size_t> tx_rows;  // rows of the batch in the transaction view
  std::vector<RouteEntry> requests;  // ordered by (bank_id, role)
};

struct ActiveForward {
  RoutingPlan plan;
  std::vector<int> labels;
  ForwardCache tx_cache;
  ForwardCache fusion_cache;
  std::vector<double> predictions;
};

struct ActiveBackward {
  double loss = 0.0;
  std::vector<GradPush> pushes;  // one per plan entry, same order
  MlpGrads fusion_grads;
  MlpGrads tx_grads;
};

// Active party: transaction features, labels, routing map, transaction
// encoder and fusion head.
class ActiveParty {
 public:
  ActiveParty(TransactionPartyView view, FeatureScaler scaler, MlpParams tx_encoder,
              MlpParams fusion_head, LossConfig loss, OptimizerSettings optimizer,
              std::uint64_t dropout_seed);

  // Groups the batch's accounts per (bank, role). Every transaction adds
  // one sender entry and one receiver entry.
  RoutingPlan route_batch(std::span<const std::string> tx_ids, std::uint32_t round,
                          std::uint32_t batch);

  // Fusion input per row is [e_T | e_S | e_R].
  ActiveForward active_forward(const RoutingPlan& plan,
                               const std::vector<EmbedResponse>& responses, bool training);

  // Mean loss over the batch, one optimiser step on the fusion head and the
  // transaction encoder, and the embedding gradients for the banks.
  ActiveBackward active_backward(const ActiveForward& forward);

  const TransactionPartyView& view() const { return view_; }
  const FeatureScaler& scaler() const { return scaler_; }
  const MlpParams& tx_encoder() const { return tx_encoder_; }
  const MlpParams& fusion_head() const { return fusion_head_; }
  std::size_t embedding_dim() const { return embedding_dim_; }
  const LossConfig& loss() const { return loss_; }

 private:
  TransactionPartyView view_;
  FeatureScaler scaler_;
  Matrix tx_inputs_;  // scaled x^T
  MlpParams tx_encoder_;
  MlpParams fusion_head_;
  Optimizer tx_opt_;
  Optimizer fusion_opt_;
  LossConfig loss_;
  OptimizerSettings settings_;
  Rng rng_;
  std::size_t embedding_dim_ = 0;
  std::uint64_t next_sequence_ = 0;
};

enum class FedAvgWeighting { kUsageWeighted, kUniform };

// Per-role weighted average of the uploaded encoders. Weights are the
// role's usage counts (uniform when all are zero or when asked for).
ParamsBroadcast fedavg_sync(std::span<const ParamsUpload> uploads,
                            FedAvgWeighting weighting = FedAvgWeighting::kUsageWeighted);

}  // namespace hybridfl
