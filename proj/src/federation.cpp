#include "hybridfl/federation.hpp"

#include <algorithm>
#include <utility>

#include "hybridfl/errors.hpp"

namespace hybridfl {

HybridFederation::HybridFederation(ActiveParty active, std::vector<BankParty> banks,
                                   Transport transport, FedAvgWeighting weighting)
    : active_(std::move(active)),
      banks_(std::move(banks)),
      transport_(std::move(transport)),
      weighting_(weighting) {
  if (banks_.empty()) throw ConfigError("federation needs at least one bank");
  for (std::size_t i = 0; i < banks_.size(); ++i) {
    if (!bank_index_.emplace(banks_[i].bank_id(), i).second) {
      throw ConfigError("duplicate bank id " + banks_[i].bank_id());
    }
    for (Role role : {Role::kSender, Role::kReceiver}) {
      if (!same_shape(banks_[i].encoder(role), banks_.front().encoder(role))) {
        throw ConfigError("bank " + banks_[i].bank_id() + " has a different " +
                          role_name(role) + " encoder architecture");
      }
      if (banks_[i].encoder(role).output_dim() != active_.embedding_dim()) {
        throw ConfigError("bank " + banks_[i].bank_id() + " embedding size differs from P");
      }
    }
  }
}

BankParty& HybridFederation::bank(const std::string& bank_id) {
  auto it = bank_index_.find(bank_id);
  if (it == bank_index_.end()) throw IntegrityError("unknown bank " + bank_id);
  return banks_[it->second];
}

std::vector<EmbedResponse> HybridFederation::exchange_embeddings(const RoutingPlan& plan,
                                                                 bool training,
                                                                 std::uint32_t round,
                                                                 std::uint32_t batch) {
  for (const auto& entry : plan.requests) {
    bank(entry.bank_id);
    transport_.send({kActivePartyName, entry.bank_id, round, batch,
                     EmbedRequest{entry.request_id, entry.role, entry.account_ids, training}});
  }
  for (auto& b : banks_) {
    for (auto& env : transport_.drain(b.bank_id())) {
      const auto* req = std::get_if<EmbedRequest>(&env.payload);
      if (req == nullptr) throw ProtocolError(b.bank_id() + " received an unexpected message");
      transport_.send({b.bank_id(), kActivePartyName, round, batch, b.handle_embed(*req)});
    }
  }
  std::vector<EmbedResponse> responses;
  for (auto& env : transport_.drain(kActivePartyName)) {
    auto* resp = std::get_if<EmbedResponse>(&env.payload);
    if (resp == nullptr) throw ProtocolError("active party received an unexpected message");
    responses.push_back(std::move(*resp));
  }
  return responses;
}

BatchOutcome HybridFederation::train_batch(std::span<const std::string> tx_ids,
                                           std::uint32_t round, std::uint32_t batch) {
  const RoutingPlan plan = active_.route_batch(tx_ids, round, batch);
  auto responses = exchange_embeddings(plan, true, round, batch);
  const ActiveForward fwd = active_.active_forward(plan, responses, true);
  ActiveBackward back = active_.active_backward(fwd);
  for (std::size_t i = 0; i < back.pushes.size(); ++i) {
    transport_.send({kActivePartyName, plan.requests[i].bank_id, round, batch,
                     std::move(back.pushes[i])});
  }
  for (auto& b : banks_) {
    for (auto& env : transport_.drain(b.bank_id())) {
      const auto* push = std::get_if<GradPush>(&env.payload);
      if (push == nullptr) throw ProtocolError(b.bank_id() + " received an unexpected message");
      b.apply_grads(*push);
    }
  }
  for (const auto& b : banks_) {
    if (b.pending_requests() > 0) {
      throw ProtocolTimeoutError("gradient for " + b.bank_id() + " never arrived (round " +
                                 std::to_string(round) + ", batch " + std::to_string(batch) + ")");
    }
  }
  return {back.loss, plan.requests.size()};
}

std::vector<double> HybridFederation::predict(std::span<const std::string> tx_ids,
                                              std::size_t chunk) {
  if (chunk == 0) throw UsageError("predict: chunk must be positive");
  std::vector<double> out;
  out.reserve(tx_ids.size());
  // Scoring messages are tagged with an out-of-band round so they never
  // collide with training request ids.
  constexpr std::uint32_t kScoringRound = 0xFFFFFFFFu;
  for (std::size_t begin = 0; begin < tx_ids.size(); begin += chunk) {
    const auto part = tx_ids.subspan(begin, std::min(chunk, tx_ids.size() - begin));
    const std::uint32_t tag = predict_counter_++;
    const RoutingPlan plan = active_.route_batch(part, kScoringRound, tag);
    auto responses = exchange_embeddings(plan, false, kScoringRound, tag);
    const ActiveForward fwd = active_.active_forward(plan, responses, false);
    out.insert(out.end(), fwd.predictions.begin(), fwd.predictions.end());
  }
  return out;
}

void HybridFederation::synchronize(std::uint32_t round) {
  for (const auto& b : banks_) {
    transport_.send({b.bank_id(), kAggregatorName, round, 0, b.make_upload()});
  }
  std::vector<ParamsUpload> uploads;
  for (auto& env : transport_.drain(kAggregatorName)) {
    auto* up = std::get_if<ParamsUpload>(&env.payload);
    if (up == nullptr) throw ProtocolError("aggregator received an unexpected message");
    uploads.push_back(std::move(*up));
  }
  if (uploads.size() != banks_.size()) {
    throw ProtocolTimeoutError("aggregator got " + std::to_string(uploads.size()) + " of " +
                               std::to_string(banks_.size()) + " uploads in round " +
                               std::to_string(round));
  }
  const ParamsBroadcast avg = fedavg_sync(uploads, weighting_);
  for (const auto& b : banks_) transport_.send({kAggregatorName, b.bank_id(), round, 0, avg});
  for (auto& b : banks_) {
    auto inbox = transport_.drain(b.bank_id());
    if (inbox.size() != 1) throw ProtocolTimeoutError(b.bank_id() + " missed the broadcast");
    const auto* bc = std::get_if<ParamsBroadcast>(&inbox.front().payload);
    if (bc == nullptr) throw ProtocolError(b.bank_id() + " received an unexpected message");
    b.apply_broadcast(*bc);
  }
  ++sync_events_;
}

}  // namespace hybridfl
