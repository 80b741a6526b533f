#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hybridfl/messages.hpp"
#include "hybridfl/random.hpp"

namespace hybridfl {

enum class DeliveryOrder { kFifo, kShuffled };

// Defaults give zero latency, no drops and FIFO delivery, which keeps
// training deterministic.
struct TransportConfig {
  double latency_ms = 0.0;
  double latency_jitter_ms = 0.0;
  double drop_probability = 0.0;
  DeliveryOrder order = DeliveryOrder::kFifo;
  std::uint64_t seed = 0;
  bool keep_trace = false;
};

struct TraceEntry {
  std::uint32_t round = 0;
  std::uint32_t batch = 0;
  std::string msg_type;
  std::string src;
  std::string dst;
  std::size_t rows = 0;
  std::size_t bytes = 0;
};

struct TransportStats {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t dropped = 0;
  double simulated_latency_ms = 0.0;
};

// In-process message bus with one inbox per party.
class Transport {
 public:
  explicit Transport(TransportConfig config = {});

  void send(Envelope envelope);
  // Removes and returns everything queued for `dst`.
  std::vector<Envelope> drain(const std::string& dst);
  std::size_t pending(const std::string& dst) const;

  // Called for every delivered envelope (after drops).
  void set_observer(std::function<void(const Envelope&)> observer);

  const TransportStats& stats() const { return stats_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  const TransportConfig& config() const { return config_; }

  // round,batch,msg_type,src,dst,rows,bytes
  void write_trace_csv(const std::filesystem::path& path) const;

 private:
  TransportConfig config_;
  Rng rng_;
  std::map<std::string, std::deque<Envelope>> inboxes_;
  std::function<void(const Envelope&)> observer_;
  TransportStats stats_;
  std::vector<TraceEntry> trace_;
};

}  // namespace hybridfl
