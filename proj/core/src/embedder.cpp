#include "b2w/embedder.hpp"

#include <cmath>

#include "b2w/errors.hpp"

namespace b2w {

void EmbedderConfig::validate() const {
    if (d == 0 || d_ff == 0 || d_encoder == 0) {
        throw ConfigError("embedder widths must be positive");
    }
    if (max_words == 0) {
        throw ConfigError("max_words must be positive");
    }
}

EmbedderParams init_embedder(const EmbedderConfig& config, Rng& rng) {
    config.validate();
    const double std = 0.02;
    EmbedderParams p;
    p.E = Tensor::randn({256, config.d}, rng, std, true);
    p.W_k = Tensor::randn({config.d, config.d}, rng, std, true);
    p.b_k = Tensor::zeros({config.d}, true);
    p.W_v = Tensor::randn({config.d, config.d}, rng, std, true);
    p.b_v = Tensor::zeros({config.d}, true);
    p.Q = Tensor::randn({config.max_words, config.d}, rng, std, true);
    p.W_f1 = Tensor::randn({config.d, config.d_ff}, rng, std, true);
    p.b_f1 = Tensor::zeros({config.d_ff}, true);
    p.W_f2 = Tensor::randn({config.d_ff, config.d}, rng, std, true);
    p.b_f2 = Tensor::zeros({config.d}, true);
    p.gamma = Tensor::full({config.d}, 1.0, true);
    p.beta = Tensor::zeros({config.d}, true);
    p.E_pos = Tensor::randn({config.max_words, config.d}, rng, std, true);
    p.E_type = Tensor::randn({2, config.d}, rng, std, true);
    p.W_proj = Tensor::randn({config.d, config.d_encoder}, rng, std, true);
    return p;
}

std::vector<std::pair<std::string, Tensor>> named_params(EmbedderParams& p) {
    return {
        {"embedder.E", p.E},         {"embedder.W_k", p.W_k},     {"embedder.b_k", p.b_k},
        {"embedder.W_v", p.W_v},     {"embedder.b_v", p.b_v},     {"embedder.Q", p.Q},
        {"embedder.W_f1", p.W_f1},   {"embedder.b_f1", p.b_f1},   {"embedder.W_f2", p.W_f2},
        {"embedder.b_f2", p.b_f2},   {"embedder.gamma", p.gamma}, {"embedder.beta", p.beta},
        {"embedder.E_pos", p.E_pos}, {"embedder.E_type", p.E_type}, {"embedder.W_proj", p.W_proj},
    };
}

Tensor pool_word(const Word& word, std::size_t position, const EmbedderParams& params,
                 const EmbedderConfig& config) {
    if (word.bytes.empty()) {
        throw ContractError("pool_word: empty word");
    }
    if (position >= config.max_words) {
        throw IndexError("pool_word: position " + std::to_string(position) + " outside max_words " +
                         std::to_string(config.max_words));
    }
    std::vector<std::size_t> ids(word.bytes.begin(), word.bytes.end());
    Tensor bytes = gather_rows(params.E, ids);                      // L x d
    Tensor K = add_rowwise(matmul(bytes, params.W_k), params.b_k);  // L x d
    Tensor V = add_rowwise(matmul(bytes, params.W_v), params.b_v);
    Tensor q = gather_rows(params.Q, {position});                   // 1 x d
    Tensor scores = scale(matmul_bt(q, K), 1.0 / std::sqrt(static_cast<double>(config.d)));
    return matmul(softmax_rows(scores), V);  // 1 x d
}

Tensor embed_sequence(const SegmentedSequence& seq, const EmbedderParams& params,
                      const EmbedderConfig& config) {
    const std::size_t n = seq.words.size();
    if (n == 0) {
        throw ContractError("embed_sequence: empty sequence");
    }
    if (n > config.max_words) {
        throw ContractError("embed_sequence: " + std::to_string(n) + " words exceed max_words " +
                            std::to_string(config.max_words));
    }
    std::vector<Tensor> pooled;
    pooled.reserve(n);
    std::vector<std::size_t> positions(n), types(n);
    for (std::size_t i = 0; i < n; ++i) {
        positions[i] = seq.positions[i];
        types[i] = static_cast<std::size_t>(seq.token_types[i]);
        pooled.push_back(pool_word(seq.words[i], seq.positions[i], params, config));
    }
    Tensor e_W = concat_rows(pooled);  // n x d
    Tensor ffn = add_rowwise(
        matmul(gelu(add_rowwise(matmul(e_W, params.W_f1), params.b_f1)), params.W_f2), params.b_f2);
    Tensor summed = add(add(ffn, e_W),
                        add(gather_rows(params.E_pos, positions), gather_rows(params.E_type, types)));
    return matmul(layer_norm(summed, params.gamma, params.beta), params.W_proj);
}

ParamCounts count_params(const EmbedderConfig& config) {
    config.validate();
    const std::size_t d = config.d, d_ff = config.d_ff;
    ParamCounts c;
    auto push = [&c](const std::string& name, std::size_t count) {
        c.per_tensor.emplace_back(name, count);
        c.total += count;
    };
    push("embedder.E", 256 * d);
    push("embedder.W_k", d * d);
    push("embedder.b_k", d);
    push("embedder.W_v", d * d);
    push("embedder.b_v", d);
    push("embedder.Q", config.max_words * d);
    push("embedder.W_f1", d * d_ff);
    push("embedder.b_f1", d_ff);
    push("embedder.W_f2", d_ff * d);
    push("embedder.b_f2", d);
    push("embedder.gamma", d);
    push("embedder.beta", d);
    push("embedder.E_pos", config.max_words * d);
    push("embedder.E_type", 2 * d);
    push("embedder.W_proj", d * config.d_encoder);
    return c;
}

}  // namespace b2w
