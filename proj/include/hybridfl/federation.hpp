#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hybridfl/parties.hpp"
#include "hybridfl/transport.hpp"

namespace hybridfl {

struct BatchOutcome {
  double loss = 0.0;
  std::size_t requests = 0;
};

// Wires one active party and its banks to a transport and runs the
// per-batch protocol with barriers before active_forward and after the
// gradient pushes.
class HybridFederation {
 public:
  HybridFederation(ActiveParty active, std::vector<BankParty> banks, Transport transport,
                   FedAvgWeighting weighting = FedAvgWeighting::kUsageWeighted);

  BatchOutcome train_batch(std::span<const std::string> tx_ids, std::uint32_t round,
                           std::uint32_t batch);

  // Fraud probabilities with dropout off; nothing is cached at the banks.
  std::vector<double> predict(std::span<const std::string> tx_ids, std::size_t chunk = 4096);

  // Uploads to the aggregator, averages, broadcasts back.
  void synchronize(std::uint32_t round);

  ActiveParty& active() { return active_; }
  const ActiveParty& active() const { return active_; }
  const std::vector<BankParty>& banks() const { return banks_; }
  BankParty& bank(const std::string& bank_id);
  Transport& transport() { return transport_; }
  const Transport& transport() const { return transport_; }
  std::uint64_t sync_events() const { return sync_events_; }

 private:
  std::vector<EmbedResponse> exchange_embeddings(const RoutingPlan& plan, bool training,
                                                 std::uint32_t round, std::uint32_t batch);

  ActiveParty active_;
  std::vector<BankParty> banks_;
  std::map<std::string, std::size_t> bank_index_;
  Transport transport_;
  FedAvgWeighting weighting_;
  std::uint64_t sync_events_ = 0;
  std::uint32_t predict_counter_ = 0;
};

}  // namespace hybridfl
