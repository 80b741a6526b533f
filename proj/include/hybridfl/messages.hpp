#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hybridfl/matrix.hpp"
#include "hybridfl/mlp.hpp"
#include "hybridfl/partition.hpp"

namespace hybridfl {

// (round, batch, sequence); sequence increases monotonically per sender.
struct RequestId {
  std::uint32_t round = 0;
  std::uint32_t batch = 0;
  std::uint64_t sequence = 0;

  auto operator<=>(const RequestId&) const = default;
  std::string str() const;
};

// What a message field carries. The last three kinds must never appear in
// any message type.
enum class FieldKind {
  kRequestId,
  kIdentifier,
  kRoutingTag,
  kFlag,
  kEmbedding,
  kEmbeddingGradient,
  kEncoderParameters,
  kCount,
  kRawFeature,
  kLabel,
  kAccountAttribute,
};

struct FieldInfo {
  const char* name;
  FieldKind kind;
};

bool is_private_kind(FieldKind kind);

struct EmbedRequest {
  RequestId request_id;
  Role role = Role::kSender;
  std::vector<std::string> account_ids;
  bool training = true;

  static std::span<const FieldInfo> fields();
};

struct EmbedResponse {
  RequestId request_id;
  Matrix embeddings;  // [k x P], rows in request order

  static std::span<const FieldInfo> fields();
};

struct GradPush {
  RequestId request_id;
  Matrix embedding_grads;  // [k x P], rows in request order

  static std::span<const FieldInfo> fields();
};

struct ParamsUpload {
  std::string bank_id;
  MlpParams sender;
  MlpParams receiver;
  std::uint64_t sender_usage_count = 0;
  std::uint64_t receiver_usage_count = 0;

  static std::span<const FieldInfo> fields();
};

struct ParamsBroadcast {
  MlpParams sender;
  MlpParams receiver;

  static std::span<const FieldInfo> fields();
};

using FedMessage =
    std::variant<EmbedRequest, EmbedResponse, GradPush, ParamsUpload, ParamsBroadcast>;

const char* message_type(const FedMessage& message);
std::span<const FieldInfo> field_inventory(const FedMessage& message);
// Row count for the trace log: accounts, embedding rows or layers.
std::size_t message_rows(const FedMessage& message);
// Size of the message on a wire: ids as length-prefixed strings, matrices
// as f64, parameters in the HYFL format.
std::size_t wire_size(const FedMessage& message);

struct Envelope {
  std::string src;
  std::string dst;
  std::uint32_t round = 0;
  std::uint32_t batch = 0;
  FedMessage payload;
};

inline constexpr const char* kActivePartyName = "txparty";
inline constexpr const char* kAggregatorName = "aggregator";

}  // namespace hybridfl
