#include "hybridfl/parties.hpp"

#include <algorithm>
#include <utility>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), cols.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    auto dst = out.row(r);
    for (std::size_t k = 0; k < cols.size(); ++k) dst[k] = src[cols[k]];
  }
  return out;
}

void check_encoder(const MlpParams& encoder, std::size_t input_width, const char* what) {
  encoder.validate();
  if (encoder.input_dim() != input_width) {
    throw ShapeError(std::string(what) + " expects " + std::to_string(encoder.input_dim()) +
                     " inputs, party provides " + std::to_string(input_width));
  }
}

}  // namespace

BankParty::BankParty(BankView view, FeatureScaler scaler, MlpParams sender_encoder,
                     MlpParams receiver_encoder, OptimizerSettings optimizer,
                     std::uint64_t dropout_seed)
    : view_(std::move(view)),
      scaler_(std::move(scaler)),
      sender_(std::move(sender_encoder)),
      receiver_(std::move(receiver_encoder)),
      settings_(optimizer),
      rng_(dropout_seed) {
  const Matrix scaled = apply_scaler(scaler_, view_.features);
  sender_inputs_ = select_columns(scaled, view_.role_columns(Role::kSender));
  receiver_inputs_ = select_columns(scaled, view_.role_columns(Role::kReceiver));
  check_encoder(sender_, view_.role_input_width(), "sender encoder");
  check_encoder(receiver_, view_.role_input_width(), "receiver encoder");
  if (sender_.output_dim() != receiver_.output_dim()) {
    throw ShapeError("sender and receiver encoders must share the embedding size");
  }
  sender_opt_ = Optimizer(settings_.kind, sender_, settings_.adam);
  receiver_opt_ = Optimizer(settings_.kind, receiver_, settings_.adam);
}

const MlpParams& BankParty::encoder(Role role) const {
  return role == Role::kSender ? sender_ : receiver_;
}

EmbedResponse BankParty::handle_embed(const EmbedRequest& req) {
  if (req.training && pending_.count(req.request_id)) {
    throw ProtocolError(view_.bank_id + ": duplicate request id " + req.request_id.str());
  }
  std::vector<std::size_t> rows;
  rows.reserve(req.account_ids.size());
  for (const auto& id : req.account_ids) {
    auto it = view_.row_of.find(id);
    if (it == view_.row_of.end()) {
      throw OwnershipError(view_.bank_id + " does not hold account " + id);
    }
    rows.push_back(it->second);
  }
  const bool sender = req.role == Role::kSender;
  const Matrix& table = sender ? sender_inputs_ : receiver_inputs_;
  auto fwd = mlp_forward(sender ? sender_ : receiver_, table.gather_rows(rows), req.training,
                         &rng_);
  if (req.training) {
    (sender ? sender_usage_ : receiver_usage_) += rows.size();
    pending_.emplace(req.request_id, Pending{req.role, std::move(fwd.cache)});
  }
  return {req.request_id, std::move(fwd.output)};
}

void BankParty::apply_grads(const GradPush& grad) {
  auto it = pending_.find(grad.request_id);
  if (it == pending_.end()) {
    throw ProtocolError(view_.bank_id + ": no live forward cache for request " +
                        grad.request_id.str());
  }
  const bool sender = it->second.role == Role::kSender;
  MlpParams& encoder = sender ? sender_ : receiver_;
  if (grad.embedding_grads.rows() != it->second.cache.input.rows() ||
      grad.embedding_grads.cols() != encoder.output_dim()) {
    throw ProtocolError(view_.bank_id + ": gradient for request " + grad.request_id.str() +
                        " does not match the embedding shape");
  }
  require_finite(grad.embedding_grads, "embedding gradient");
  auto back = mlp_backward(encoder, it->second.cache, grad.embedding_grads);
  (sender ? sender_opt_ : receiver_opt_).step(encoder, back.param_grads, settings_.learning_rate);
  pending_.erase(it);
}

ParamsUpload BankParty::make_upload() const {
  return {view_.bank_id, sender_, receiver_, sender_usage_, receiver_usage_};
}

void BankParty::apply_broadcast(const ParamsBroadcast& broadcast) {
  if (!same_shape(broadcast.sender, sender_) || !same_shape(broadcast.receiver, receiver_)) {
    throw ProtocolError(view_.bank_id + ": broadcast encoders differ in shape");
  }
  sender_ = broadcast.sender;
  receiver_ = broadcast.receiver;
  sender_usage_ = 0;
  receiver_usage_ = 0;
}

ActiveParty::ActiveParty(TransactionPartyView view, FeatureScaler scaler, MlpParams tx_encoder,
                         MlpParams fusion_head, LossConfig loss, OptimizerSettings optimizer,
                         std::uint64_t dropout_seed)
    : view_(std::move(view)),
      scaler_(std::move(scaler)),
      tx_encoder_(std::move(tx_encoder)),
      fusion_head_(std::move(fusion_head)),
      loss_(loss),
      settings_(optimizer),
      rng_(dropout_seed) {
  tx_inputs_ = apply_scaler(scaler_, view_.features);
  check_encoder(tx_encoder_, tx_inputs_.cols(), "transaction encoder");
  embedding_dim_ = tx_encoder_.output_dim();
  check_encoder(fusion_head_, 3 * embedding_dim_, "fusion head");
  if (fusion_head_.output_dim() != 1) throw ShapeError("fusion head must have one output");
  tx_opt_ = Optimizer(settings_.kind, tx_encoder_, settings_.adam);
  fusion_opt_ = Optimizer(settings_.kind, fusion_head_, settings_.adam);
}

RoutingPlan ActiveParty::route_batch(std::span<const std::string> tx_ids, std::uint32_t round,
                                     std::uint32_t batch) {
  RoutingPlan plan;
  std::map<std::pair<std::string, Role>, RouteEntry> grouped;
  auto bank_of = [&](const std::string& account) -> const std::string& {
    auto it = view_.routing.find(account);
    if (it == view_.routing.end()) throw IntegrityError("cannot route account " + account);
    return it->second;
  };
  for (std::size_t pos = 0; pos < tx_ids.size(); ++pos) {
    const std::size_t row = view_.row_index(tx_ids[pos]);
    plan.tx_rows.push_back(row);
    const auto& tx = view_.rows[row];
    for (Role role : {Role::kSender, Role::kReceiver}) {
      const std::string& account = role == Role::kSender ? tx.sender_id : tx.receiver_id;
      auto& entry = grouped[{bank_of(account), role}];
      entry.account_ids.push_back(account);
      entry.positions.push_back(pos);
    }
  }
  for (auto& [key, entry] : grouped) {
    entry.bank_id = key.first;
    entry.role = key.second;
    entry.request_id = {round, batch, next_sequence_++};
    plan.requests.push_back(std::move(entry));
  }
  return plan;
}

ActiveForward ActiveParty::active_forward(const RoutingPlan& plan,
                                          const std::vector<EmbedResponse>& responses,
                                          bool training) {
  std::map<RequestId, const EmbedResponse*> by_id;
  for (const auto& r : responses) {
    if (!by_id.emplace(r.request_id, &r).second) {
      throw ProtocolError("duplicate response for request " + r.request_id.str());
    }
  }
  const std::size_t n = plan.tx_rows.size();
  const std::size_t p = embedding_dim_;
  Matrix e_sender(n, p);
  Matrix e_receiver(n, p);
  for (const auto& entry : plan.requests) {
    auto it = by_id.find(entry.request_id);
    if (it == by_id.end()) {
      throw ProtocolTimeoutError("no embedding response from " + entry.bank_id + " for request " +
                                 entry.request_id.str());
    }
    const Matrix& emb = it->second->embeddings;
    if (emb.rows() != entry.account_ids.size() || emb.cols() != p) {
      throw ProtocolError("response " + entry.request_id.str() + " has shape " +
                          std::to_string(emb.rows()) + "x" + std::to_string(emb.cols()) +
                          ", expected " + std::to_string(entry.account_ids.size()) + "x" +
                          std::to_string(p));
    }
    Matrix& dst = entry.role == Role::kSender ? e_sender : e_receiver;
    for (std::size_t k = 0; k < entry.positions.size(); ++k) {
      auto src = emb.row(k);
      std::copy(src.begin(), src.end(), dst.row(entry.positions[k]).begin());
    }
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw ProtocolError("unexpected response " + by_id.begin()->first.str());
  }

  ActiveForward out;
  out.plan = plan;
  out.labels.reserve(n);
  for (std::size_t row : plan.tx_rows) out.labels.push_back(view_.rows[row].label);
  auto tx = mlp_forward(tx_encoder_, tx_inputs_.gather_rows(plan.tx_rows), training, &rng_);
  const Matrix* parts[] = {&tx.output, &e_sender, &e_receiver};
  auto fused = mlp_forward(fusion_head_, hconcat(parts), training, &rng_);
  out.tx_cache = std::move(tx.cache);
  out.fusion_cache = std::move(fused.cache);
  out.predictions = std::move(fused.output.data());
  return out;
}

ActiveBackward ActiveParty::active_backward(const ActiveForward& forward) {
  const std::size_t n = forward.predictions.size();
  if (forward.labels.size() != n) throw DataError("labels missing for part of the batch");
  if (forward.fusion_cache.input.rows() != n || forward.tx_cache.input.rows() != n) {
    throw ShapeError("active_backward: cache does not match the batch");
  }
  const LossResult loss = compute_loss(loss_, forward.predictions, forward.labels);
  Matrix logit_grad(n, 1, loss.grad_wrt_logits);
  auto fusion_back =
      mlp_backward(fusion_head_, forward.fusion_cache, logit_grad, GradientOf::kLogits);
  const std::size_t p = embedding_dim_;
  auto tx_back = mlp_backward(tx_encoder_, forward.tx_cache,
                              fusion_back.input_grad.slice_cols(0, p));

  ActiveBackward out;
  out.loss = loss.mean_loss;
  for (const auto& entry : forward.plan.requests) {
    const std::size_t offset = entry.role == Role::kSender ? p : 2 * p;
    GradPush push{entry.request_id, Matrix(entry.positions.size(), p)};
    for (std::size_t k = 0; k < entry.positions.size(); ++k) {
      auto src = fusion_back.input_grad.row(entry.positions[k]).subspan(offset, p);
      std::copy(src.begin(), src.end(), push.embedding_grads.row(k).begin());
    }
    out.pushes.push_back(std::move(push));
  }
  fusion_opt_.step(fusion_head_, fusion_back.param_grads, settings_.learning_rate);
  tx_opt_.step(tx_encoder_, tx_back.param_grads, settings_.learning_rate);
  out.fusion_grads = std::move(fusion_back.param_grads);
  out.tx_grads = std::move(tx_back.param_grads);
  return out;
}

namespace {

MlpParams weighted_average(const std::vector<const MlpParams*>& params,
                           const std::vector<double>& weights) {
  // base + sum_b w_b (theta_b - base) is exact when all uploads agree;
  // clamping keeps rounding inside the per-coordinate hull.
  MlpParams out = *params.front();
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    auto blend = [&](auto&& get, std::size_t n) {
      for (std::size_t k = 0; k < n; ++k) {
        const double base = get(*params.front(), l, k);
        double lo = base;
        double hi = base;
        double delta = 0.0;
        for (std::size_t b = 0; b < params.size(); ++b) {
          const double v = get(*params[b], l, k);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          delta += weights[b] * (v - base);
        }
        get(out, l, k) = std::clamp(base + delta, lo, hi);
      }
    };
    blend([](auto& m, std::size_t li, std::size_t k) -> auto& {
      return m.layers[li].weights.data()[k];
    }, out.layers[l].weights.size());
    blend([](auto& m, std::size_t li, std::size_t k) -> auto& { return m.layers[li].bias[k]; },
          out.layers[l].bias.size());
  }
  return out;
}

std::vector<double> normalise(const std::vector<std::uint64_t>& counts, FedAvgWeighting w) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = (w == FedAvgWeighting::kUniform || total == 0)
                 ? 1.0 / static_cast<double>(counts.size())
                 : static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

}  // namespace

ParamsBroadcast fedavg_sync(std::span<const ParamsUpload> uploads, FedAvgWeighting weighting) {
  if (uploads.empty()) throw ProtocolError("fedavg_sync: no uploads");
  std::vector<const MlpParams*> senders, receivers;
  std::vector<std::uint64_t> sender_counts, receiver_counts;
  for (const auto& u : uploads) {
    if (!same_shape(u.sender, uploads.front().sender) ||
        !same_shape(u.receiver, uploads.front().receiver)) {
      throw ProtocolError("fedavg_sync: encoders from " + u.bank_id +
                          " differ in layer shapes");
    }
    senders.push_back(&u.sender);
    receivers.push_back(&u.receiver);
    sender_counts.push_back(u.sender_usage_count);
    receiver_counts.push_back(u.receiver_usage_count);
  }
  return {weighted_average(senders, normalise(sender_counts, weighting)),
          weighted_average(receivers, normalise(receiver_counts, weighting))};
}

}  // namespace hybridfl
