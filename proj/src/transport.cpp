#include "hybridfl/transport.hpp"

#include <algorithm>

#include "hybridfl/csv.hpp"
#include "hybridfl/errors.hpp"

namespace hybridfl {

Transport::Transport(TransportConfig config) : config_(config), rng_(config.seed) {
  if (!(config_.drop_probability >= 0.0 && config_.drop_probability <= 1.0)) {
    throw ConfigError("transport.drop_probability must lie in [0, 1]");
  }
  if (config_.latency_ms < 0.0 || config_.latency_jitter_ms < 0.0) {
    throw ConfigError("transport latency must be non-negative");
  }
}

void Transport::send(Envelope envelope) {
  if (config_.drop_probability > 0.0 &&
      std::bernoulli_distribution(config_.drop_probability)(rng_)) {
    ++stats_.dropped;
    return;
  }
  const std::size_t bytes = wire_size(envelope.payload);
  ++stats_.messages;
  stats_.bytes += bytes;
  double latency = config_.latency_ms;
  if (config_.latency_jitter_ms > 0.0) {
    latency += std::uniform_real_distribution<double>(0.0, config_.latency_jitter_ms)(rng_);
  }
  stats_.simulated_latency_ms += latency;
  if (config_.keep_trace) {
    trace_.push_back({envelope.round, envelope.batch, message_type(envelope.payload),
                      envelope.src, envelope.dst, message_rows(envelope.payload), bytes});
  }
  inboxes_[envelope.dst].push_back(std::move(envelope));
}

std::vector<Envelope> Transport::drain(const std::string& dst) {
  std::vector<Envelope> out;
  auto it = inboxes_.find(dst);
  if (it == inboxes_.end()) return out;
  out.assign(std::make_move_iterator(it->second.begin()),
             std::make_move_iterator(it->second.end()));
  it->second.clear();
  if (config_.order == DeliveryOrder::kShuffled) std::shuffle(out.begin(), out.end(), rng_);
  if (observer_) {
    for (const auto& e : out) observer_(e);
  }
  return out;
}

std::size_t Transport::pending(const std::string& dst) const {
  auto it = inboxes_.find(dst);
  return it == inboxes_.end() ? 0 : it->second.size();
}

void Transport::set_observer(std::function<void(const Envelope&)> observer) {
  observer_ = std::move(observer);
}

void Transport::write_trace_csv(const std::filesystem::path& path) const {
  CsvWriter w(path, {"round", "batch", "msg_type", "src", "dst", "rows", "bytes"});
  for (const auto& t : trace_) {
    w.write_row({std::to_string(t.round), std::to_string(t.batch), t.msg_type, t.src, t.dst,
                 std::to_string(t.rows), std::to_string(t.bytes)});
  }
}

}  // namespace hybridfl
