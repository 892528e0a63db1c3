#pragma once

#include "hardhank/nn/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hardhank::nn {

// Binary layout, little endian:
//   "HHANKNN\0"  u32 version  u64 seed  u32 activation
//   u32 n_nets { u32 n_widths  u32 widths[n_widths] }*
//   u64 n_params  f64 params[n_params]
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::uint64_t seed = 0;
    Activation activation = Activation::Tanh;
    std::vector<std::vector<int>> widths;
    ParamVector params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string describe_shapes(const std::vector<std::vector<int>>& widths);

// Throws std::runtime_error naming both shapes when the checkpoint does not
// fit the expected networks.
void check_compatible(const Checkpoint& ckpt, const std::vector<std::vector<int>>& expected, Activation activation);

}  // namespace hardhank::nn
