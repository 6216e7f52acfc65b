#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "b2w/tensor.hpp"

namespace b2w {

struct HeadConfig {
    std::size_t d_encoder = 128;
    std::size_t j_max = 16;      // subword positions per word
    std::size_t vocab_size = 0;  // prediction dictionary size

    void validate() const;
};

// Word vector -> per-subword vectors -> vocabulary logits. The output
// matrix shares nothing with the byte embedding table: input granularity
// is bytes, prediction granularity is subwords.
struct HeadParams {
    Tensor P;         // j_max x d_encoder subword positional queries
    Tensor W_t, b_t;  // d_encoder x d_encoder transform
    Tensor gamma, beta;
    Tensor W_o, b_o;  // d_encoder x V, V
};

HeadParams init_head(const HeadConfig& config, Rng& rng);

std::vector<std::pair<std::string, Tensor>> named_params(HeadParams& p);

// H_ij = H_i + P[j]; 1 x d_encoder in, 1 x d_encoder out.
Tensor upsample(const Tensor& H_i, std::size_t j, const HeadParams& params, const HeadConfig& config);

// logits = LN(GELU(H*W_t + b_t)) * W_o + b_o over t stacked rows.
Tensor predict_subwords(const Tensor& H_ij_rows, const HeadParams& params);

}  // namespace b2w
