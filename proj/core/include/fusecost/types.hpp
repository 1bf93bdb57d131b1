// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fusecost {

enum class Operand : std::uint8_t { W = 0, I = 1, O = 2 };
inline constexpr std::array<Operand, 3> kOperands{Operand::W, Operand::I, Operand::O};

constexpr std::size_t index(Operand op) { return static_cast<std::size_t>(op); }

constexpr std::string_view to_string(Operand op) {
  switch (op) {
    case Operand::W: return "W";
    case Operand::I: return "I";
    case Operand::O: return "O";
  }
  return "?";
}

std::optional<Operand> operand_from_string(std::string_view s);

enum class LoopDim : std::uint8_t { K = 0, C, OX, OY, FX, FY };
inline constexpr std::size_t kNumDims = 6;
inline constexpr std::array<LoopDim, kNumDims> kLoopDims{
    LoopDim::K, LoopDim::C, LoopDim::OX, LoopDim::OY, LoopDim::FX, LoopDim::FY};

constexpr std::size_t index(LoopDim d) { return static_cast<std::size_t>(d); }

constexpr std::string_view to_string(LoopDim d) {
  switch (d) {
    case LoopDim::K: return "K";
    case LoopDim::C: return "C";
    case LoopDim::OX: return "OX";
    case LoopDim::OY: return "OY";
    case LoopDim::FX: return "FX";
    case LoopDim::FY: return "FY";
  }
  return "?";
}

std::optional<LoopDim> loop_dim_from_string(std::string_view s);

using DimArray = std::array<std::int64_t, kNumDims>;

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace fusecost
