#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "b2w/optim.hpp"
#include "b2w/tensor.hpp"

namespace b2w {

// Two files: <path>.manifest (text: version line, config echo, one
// `tensor <name> <rank> <dims...> <offset>` line per tensor, `end`) and
// <path>.blob (little-endian IEEE-754 doubles, packed in manifest order).
// Writing the same tensors twice produces identical bytes.
struct CheckpointData {
    std::vector<std::string> order;  // manifest tensor order
    std::unordered_map<std::string, Tensor> tensors;
    std::vector<std::pair<std::string, std::string>> config;
};

void save_checkpoint(const std::vector<std::pair<std::string, Tensor>>& tensors,
                     const std::vector<std::pair<std::string, std::string>>& config,
                     const std::string& path);

CheckpointData load_checkpoint(const std::string& path);

// Copies checkpoint tensors into the named destination tensors; every
// name must match on both sides with equal shapes.
void restore_params(const CheckpointData& data,
                    const std::vector<std::pair<std::string, Tensor>>& dest);

// Optimizer moments/step ride along as opt.* tensors.
std::vector<std::pair<std::string, Tensor>> optimizer_tensors(
    const AdamWState& state, const std::vector<std::pair<std::string, Tensor>>& params);
void restore_optimizer(const CheckpointData& data, AdamWState& state,
                       const std::vector<std::pair<std::string, Tensor>>& params);
bool has_optimizer_state(const CheckpointData& data);

}  // namespace b2w
