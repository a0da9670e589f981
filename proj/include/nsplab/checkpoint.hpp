#pragma once
// Binary checkpoints of fluid states. Doubles are stored as raw IEEE bytes so a
// save/load cycle reproduces the state bit for bit.

#include <string>
#include <vector>

#include "nsplab/solver.hpp"

namespace nsplab {

inline constexpr char kCheckpointMagic[8] = {'N', 'S', 'P', 'L', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<unsigned char> encode_checkpoint(const std::vector<FluidState>& states);
std::vector<FluidState> decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const std::string& path, const std::vector<FluidState>& states);
std::vector<FluidState> load_checkpoint(const std::string& path);

bool bit_equal(const FluidState& a, const FluidState& b);

}  // namespace nsplab
