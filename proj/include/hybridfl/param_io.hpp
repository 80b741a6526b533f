#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hybridfl/mlp.hpp"

namespace hybridfl {

inline constexpr std::uint16_t kParamFormatVersion = 1;

// Little-endian layout: "HYFL", version u16, layer count u16, then per
// layer rows u32, cols u32, weights f32[rows * cols], bias f32[rows].
std::vector<std::uint8_t> serialize_params(const MlpParams& params);

// The format carries weights only; activation and dropout come from the
// caller's architecture.
MlpParams deserialize_params(std::span<const std::uint8_t> bytes,
                             OutputActivation output_activation = OutputActivation::kNone,
                             double dropout_rate = 0.0);

std::size_t serialized_size(const MlpParams& params);

void save_params(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_params(const std::filesystem::path& path,
                      OutputActivation output_activation = OutputActivation::kNone,
                      double dropout_rate = 0.0);

}  // namespace hybridfl
