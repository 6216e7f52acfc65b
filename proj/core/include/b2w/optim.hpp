#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "b2w/tensor.hpp"

namespace b2w {

// AdamW with decoupled weight decay. Moments are lazily sized to the
// parameter list on the first step and must match it afterwards.
struct AdamWState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-6;
    double weight_decay = 0.01;
    std::uint64_t t = 0;

    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// One bias-corrected update over `params`, reading each parameter's grad
// buffer. Any non-finite gradient rejects the whole step: parameters,
// moments and t stay untouched, the offending entry is described in
// `diagnostic`, and the call returns false.
bool adamw_step(std::vector<Tensor>& params, AdamWState& state, std::string* diagnostic = nullptr);

// Scales grads in place so their global L2 norm is at most `max_norm`.
// Returns the pre-clip norm. No-op (besides the norm) when max_norm <= 0.
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

}  // namespace b2w
