#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "b2w/segmenter.hpp"
#include "b2w/tensor.hpp"

namespace b2w {

struct EmbedderConfig {
    std::size_t d = 192;         // byte/word embedding width
    std::size_t d_ff = 768;      // embedder FFN width, conventionally 4*d
    std::size_t d_encoder = 128; // backbone width the projection targets
    std::size_t max_words = 128;

    void validate() const;
};

// One cross-attention pooling stack: bytes -> word vector -> projected
// word hidden state.
struct EmbedderParams {
    Tensor E;       // 256 x d byte embeddings
    Tensor W_k, b_k;  // d x d, d
    Tensor W_v, b_v;  // d x d, d
    Tensor Q;       // max_words x d per-position word queries
    Tensor W_f1, b_f1;  // d x d_ff, d_ff
    Tensor W_f2, b_f2;  // d_ff x d, d
    Tensor gamma, beta;  // layer norm affine, d
    Tensor E_pos;   // max_words x d
    Tensor E_type;  // 2 x d
    Tensor W_proj;  // d x d_encoder
};

EmbedderParams init_embedder(const EmbedderConfig& config, Rng& rng);

std::vector<std::pair<std::string, Tensor>> named_params(EmbedderParams& p);

// Single attention row over the word's bytes:
//   K = E[bytes]*W_k + b_k, V likewise, e_W = softmax(Q[pos]*K^T/sqrt(d))*V.
// Returns a 1 x d row.
Tensor pool_word(const Word& word, std::size_t position, const EmbedderParams& params,
                 const EmbedderConfig& config);

// Per word i: H_W[i] = LN(FFN(e_W_i) + e_W_i + E_pos[i] + E_type[type_i]) * W_proj.
// The norm runs before the projection. Returns n x d_encoder.
Tensor embed_sequence(const SegmentedSequence& seq, const EmbedderParams& params,
                      const EmbedderConfig& config);

struct ParamCounts {
    std::vector<std::pair<std::string, std::size_t>> per_tensor;
    std::size_t total = 0;
};

// Closed-form parameter counts for the embedder stack.
ParamCounts count_params(const EmbedderConfig& config);

}  // namespace b2w
