#include "b2w/head.hpp"

#include "b2w/errors.hpp"

namespace b2w {

void HeadConfig::validate() const {
    if (d_encoder == 0 || j_max == 0) {
        throw ConfigError("head dimensions must be positive");
    }
    if (vocab_size == 0) {
        throw ConfigError("head needs a non-empty prediction vocabulary");
    }
}

HeadParams init_head(const HeadConfig& config, Rng& rng) {
    config.validate();
    const double std = 0.02;
    const std::size_t d = config.d_encoder;
    HeadParams p;
    p.P = Tensor::randn({config.j_max, d}, rng, std, true);
    p.W_t = Tensor::randn({d, d}, rng, std, true);
    p.b_t = Tensor::zeros({d}, true);
    p.gamma = Tensor::full({d}, 1.0, true);
    p.beta = Tensor::zeros({d}, true);
    p.W_o = Tensor::randn({d, config.vocab_size}, rng, std, true);
    p.b_o = Tensor::zeros({config.vocab_size}, true);
    return p;
}

std::vector<std::pair<std::string, Tensor>> named_params(HeadParams& p) {
    return {
        {"head.P", p.P},       {"head.W_t", p.W_t},     {"head.b_t", p.b_t}, {"head.gamma", p.gamma},
        {"head.beta", p.beta}, {"head.W_o", p.W_o},     {"head.b_o", p.b_o},
    };
}

Tensor upsample(const Tensor& H_i, std::size_t j, const HeadParams& params, const HeadConfig& config) {
    if (j >= config.j_max) {
        throw IndexError("upsample: subword position " + std::to_string(j) + " outside j_max " +
                         std::to_string(config.j_max));
    }
    return add(H_i, gather_rows(params.P, {j}));
}

Tensor predict_subwords(const Tensor& H_ij_rows, const HeadParams& params) {
    Tensor t = gelu(add_rowwise(matmul(H_ij_rows, params.W_t), params.b_t));
    return add_rowwise(matmul(layer_norm(t, params.gamma, params.beta), params.W_o), params.b_o);
}

}  // namespace b2w
