#include "hybridfl/param_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

constexpr char kMagic[4] = {'H', 'Y', 'F', 'L'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void put_f32(std::vector<std::uint8_t>& out, double value) {
  put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  double get_f32() { return static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>())); }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ParseError("HYFL: truncated parameter blob");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t serialized_size(const MlpParams& params) {
  std::size_t n = 4 + 2 + 2;
  for (const auto& l : params.layers) n += 8 + 4 * (l.weights.size() + l.bias.size());
  return n;
}

std::vector<std::uint8_t> serialize_params(const MlpParams& params) {
  if (params.layers.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ShapeError("HYFL: too many layers");
  }
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(params));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, kParamFormatVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(params.layers.size()));
  for (const auto& l : params.layers) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.cols()));
    for (double w : l.weights.data()) put_f32(out, w);
    for (double b : l.bias) put_f32(out, b);
  }
  return out;
}

MlpParams deserialize_params(std::span<const std::uint8_t> bytes,
                             OutputActivation output_activation, double dropout_rate) {
  Reader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw ParseError("HYFL: bad magic");
  const auto version = in.get_le<std::uint16_t>();
  if (version != kParamFormatVersion) {
    throw ParseError("HYFL: unsupported version " + std::to_string(version));
  }
  const auto n_layers = in.get_le<std::uint16_t>();
  MlpParams params;
  params.output_activation = output_activation;
  params.dropout_rate = dropout_rate;
  for (std::uint16_t i = 0; i < n_layers; ++i) {
    const std::size_t rows = in.get_le<std::uint32_t>();
    const std::size_t cols = in.get_le<std::uint32_t>();
    LayerParams layer{Matrix(rows, cols), std::vector<double>(rows)};
    for (double& w : layer.weights.data()) w = in.get_f32();
    for (double& b : layer.bias) b = in.get_f32();
    params.layers.push_back(std::move(layer));
  }
  if (!in.done()) throw ParseError("HYFL: trailing bytes after last layer");
  params.validate();
  return params;
}

void save_params(const MlpParams& params, const std::filesystem::path& path) {
  const auto bytes = serialize_params(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

MlpParams load_params(const std::filesystem::path& path, OutputActivation output_activation,
                      double dropout_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_params(bytes, output_activation, dropout_rate);
}

}  // namespace hybridfl
