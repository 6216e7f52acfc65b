#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "b2w/tensor.hpp"

namespace b2w {

// 1 = real word, 0 = padding. Padding keys get exactly zero attention
// weight, so garbage in padded rows never reaches real positions.
using AttentionMask = std::vector<std::uint8_t>;

struct BackboneConfig {
    std::size_t layers = 2;
    std::size_t d_encoder = 128;
    std::size_t heads = 4;
    std::size_t head_dim = 32;
    std::size_t d_ffn = 512;
    double dropout = 0.1;
    double attn_dropout = 0.1;
    bool final_ln = true;  // norm after the last block, pre-LN convention

    void validate() const;
};

struct BackboneLayerParams {
    Tensor ln1_gamma, ln1_beta;
    Tensor W_q, b_q, W_k, b_k, W_v, b_v;
    Tensor W_o, b_o;
    Tensor ln2_gamma, ln2_beta;
    Tensor W_f1, b_f1, W_f2, b_f2;
};

struct BackboneParams {
    std::vector<BackboneLayerParams> layers;
    Tensor lnf_gamma, lnf_beta;  // defined only when final_ln
};

BackboneParams init_backbone(const BackboneConfig& config, Rng& rng);

std::vector<std::pair<std::string, Tensor>> named_params(BackboneParams& p);

// Pre-LN blocks: x += MHSA(LN(x)); x += FFN(LN(x)); optional final LN.
// dropout_rng == nullptr means eval mode (no dropout). attn_probs, when
// given, collects one heads-stacked probability matrix per layer
// ((heads*n) x n) for inspection.
Tensor encode(const Tensor& H, const AttentionMask& mask, const BackboneParams& params,
              const BackboneConfig& config, Rng* dropout_rng = nullptr,
              std::vector<Tensor>* attn_probs = nullptr);

}  // namespace b2w
