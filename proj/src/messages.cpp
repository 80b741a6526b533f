#include "hybridfl/messages.hpp"

#include <array>

#include "hybridfl/param_io.hpp"

namespace hybridfl {
namespace {

constexpr std::array kEmbedRequestFields{
    FieldInfo{"request_id", FieldKind::kRequestId},
    FieldInfo{"role", FieldKind::kRoutingTag},
    FieldInfo{"account_ids", FieldKind::kIdentifier},
    FieldInfo{"training", FieldKind::kFlag},
};
constexpr std::array kEmbedResponseFields{
    FieldInfo{"request_id", FieldKind::kRequestId},
    FieldInfo{"embeddings", FieldKind::kEmbedding},
};
constexpr std::array kGradPushFields{
    FieldInfo{"request_id", FieldKind::kRequestId},
    FieldInfo{"embedding_grads", FieldKind::kEmbeddingGradient},
};
constexpr std::array kParamsUploadFields{
    FieldInfo{"bank_id", FieldKind::kIdentifier},
    FieldInfo{"sender", FieldKind::kEncoderParameters},
    FieldInfo{"receiver", FieldKind::kEncoderParameters},
    FieldInfo{"sender_usage_count", FieldKind::kCount},
    FieldInfo{"receiver_usage_count", FieldKind::kCount},
};
constexpr std::array kParamsBroadcastFields{
    FieldInfo{"sender", FieldKind::kEncoderParameters},
    FieldInfo{"receiver", FieldKind::kEncoderParameters},
};

constexpr std::size_t kRequestIdBytes = 4 + 4 + 8;
constexpr std::size_t kMatrixHeaderBytes = 4 + 4;

std::size_t matrix_bytes(const Matrix& m) { return kMatrixHeaderBytes + 8 * m.size(); }

}  // namespace

std::string RequestId::str() const {
  return std::to_string(round) + "/" + std::to_string(batch) + "/" + std::to_string(sequence);
}

bool is_private_kind(FieldKind kind) {
  return kind == FieldKind::kRawFeature || kind == FieldKind::kLabel ||
         kind == FieldKind::kAccountAttribute;
}

std::span<const FieldInfo> EmbedRequest::fields() { return kEmbedRequestFields; }
std::span<const FieldInfo> EmbedResponse::fields() { return kEmbedResponseFields; }
std::span<const FieldInfo> GradPush::fields() { return kGradPushFields; }
std::span<const FieldInfo> ParamsUpload::fields() { return kParamsUploadFields; }
std::span<const FieldInfo> ParamsBroadcast::fields() { return kParamsBroadcastFields; }

const char* message_type(const FedMessage& message) {
  static constexpr const char* kNames[] = {"EmbedRequest", "EmbedResponse", "GradPush",
                                           "ParamsUpload", "ParamsBroadcast"};
  return kNames[message.index()];
}

std::span<const FieldInfo> field_inventory(const FedMessage& message) {
  return std::visit([](const auto& m) { return std::decay_t<decltype(m)>::fields(); }, message);
}

std::size_t message_rows(const FedMessage& message) {
  struct Visitor {
    std::size_t operator()(const EmbedRequest& m) const { return m.account_ids.size(); }
    std::size_t operator()(const EmbedResponse& m) const { return m.embeddings.rows(); }
    std::size_t operator()(const GradPush& m) const { return m.embedding_grads.rows(); }
    std::size_t operator()(const ParamsUpload& m) const {
      return m.sender.layers.size() + m.receiver.layers.size();
    }
    std::size_t operator()(const ParamsBroadcast& m) const {
      return m.sender.layers.size() + m.receiver.layers.size();
    }
  };
  return std::visit(Visitor{}, message);
}

std::size_t wire_size(const FedMessage& message) {
  struct Visitor {
    std::size_t operator()(const EmbedRequest& m) const {
      std::size_t n = kRequestIdBytes + 1 + 1 + 4;
      for (const auto& id : m.account_ids) n += 4 + id.size();
      return n;
    }
    std::size_t operator()(const EmbedResponse& m) const {
      return kRequestIdBytes + matrix_bytes(m.embeddings);
    }
    std::size_t operator()(const GradPush& m) const {
      return kRequestIdBytes + matrix_bytes(m.embedding_grads);
    }
    std::size_t operator()(const ParamsUpload& m) const {
      return 4 + m.bank_id.size() + serialized_size(m.sender) + serialized_size(m.receiver) + 16;
    }
    std::size_t operator()(const ParamsBroadcast& m) const {
      return serialized_size(m.sender) + serialized_size(m.receiver);
    }
  };
  return std::visit(Visitor{}, message);
}

}  // namespace hybridfl
