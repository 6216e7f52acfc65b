#include "b2w/encoder.hpp"

#include <cmath>

#include "b2w/errors.hpp"

namespace b2w {

void BackboneConfig::validate() const {
    if (d_encoder == 0 || heads == 0 || head_dim == 0 || d_ffn == 0) {
        throw ConfigError("backbone dimensions must be positive");
    }
    if (heads * head_dim != d_encoder) {
        throw ConfigError("heads*head_dim must equal d_encoder: " + std::to_string(heads) + "*" +
                          std::to_string(head_dim) + " != " + std::to_string(d_encoder));
    }
    if (dropout < 0.0 || dropout >= 1.0 || attn_dropout < 0.0 || attn_dropout >= 1.0) {
        throw ConfigError("dropout rates must lie in [0,1)");
    }
}

BackboneParams init_backbone(const BackboneConfig& config, Rng& rng) {
    config.validate();
    const double std = 0.02;
    const std::size_t d = config.d_encoder;
    BackboneParams p;
    p.layers.resize(config.layers);
    for (BackboneLayerParams& l : p.layers) {
        l.ln1_gamma = Tensor::full({d}, 1.0, true);
        l.ln1_beta = Tensor::zeros({d}, true);
        l.W_q = Tensor::randn({d, d}, rng, std, true);
        l.b_q = Tensor::zeros({d}, true);
        l.W_k = Tensor::randn({d, d}, rng, std, true);
        l.b_k = Tensor::zeros({d}, true);
        l.W_v = Tensor::randn({d, d}, rng, std, true);
        l.b_v = Tensor::zeros({d}, true);
        l.W_o = Tensor::randn({d, d}, rng, std, true);
        l.b_o = Tensor::zeros({d}, true);
        l.ln2_gamma = Tensor::full({d}, 1.0, true);
        l.ln2_beta = Tensor::zeros({d}, true);
        l.W_f1 = Tensor::randn({d, config.d_ffn}, rng, std, true);
        l.b_f1 = Tensor::zeros({config.d_ffn}, true);
        l.W_f2 = Tensor::randn({config.d_ffn, d}, rng, std, true);
        l.b_f2 = Tensor::zeros({d}, true);
    }
    if (config.final_ln) {
        p.lnf_gamma = Tensor::full({d}, 1.0, true);
        p.lnf_beta = Tensor::zeros({d}, true);
    }
    return p;
}

std::vector<std::pair<std::string, Tensor>> named_params(BackboneParams& p) {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        BackboneLayerParams& l = p.layers[i];
        const std::string pre = "encoder.layer" + std::to_string(i) + ".";
        out.emplace_back(pre + "ln1_gamma", l.ln1_gamma);
        out.emplace_back(pre + "ln1_beta", l.ln1_beta);
        out.emplace_back(pre + "W_q", l.W_q);
        out.emplace_back(pre + "b_q", l.b_q);
        out.emplace_back(pre + "W_k", l.W_k);
        out.emplace_back(pre + "b_k", l.b_k);
        out.emplace_back(pre + "W_v", l.W_v);
        out.emplace_back(pre + "b_v", l.b_v);
        out.emplace_back(pre + "W_o", l.W_o);
        out.emplace_back(pre + "b_o", l.b_o);
        out.emplace_back(pre + "ln2_gamma", l.ln2_gamma);
        out.emplace_back(pre + "ln2_beta", l.ln2_beta);
        out.emplace_back(pre + "W_f1", l.W_f1);
        out.emplace_back(pre + "b_f1", l.b_f1);
        out.emplace_back(pre + "W_f2", l.W_f2);
        out.emplace_back(pre + "b_f2", l.b_f2);
    }
    if (p.lnf_gamma.defined()) {
        out.emplace_back("encoder.lnf_gamma", p.lnf_gamma);
        out.emplace_back("encoder.lnf_beta", p.lnf_beta);
    }
    return out;
}

namespace {

// −1e30 on padded keys underflows to exactly 0 after the softmax's
// max subtraction, which is what makes padding invariance bitwise.
Tensor mask_bias(const AttentionMask& mask) {
    Tensor bias = Tensor::zeros({mask.size()});
    auto bv = bias.data();
    for (std::size_t j = 0; j < mask.size(); ++j) {
        bv[j] = mask[j] ? 0.0 : -1e30;
    }
    return bias;
}

Tensor mhsa(const Tensor& y, const Tensor& bias, const BackboneLayerParams& l,
            const BackboneConfig& config, Rng* dropout_rng, std::vector<Tensor>* attn_probs) {
    const std::size_t hd = config.head_dim;
    Tensor Q = add_rowwise(matmul(y, l.W_q), l.b_q);
    Tensor K = add_rowwise(matmul(y, l.W_k), l.b_k);
    Tensor V = add_rowwise(matmul(y, l.W_v), l.b_v);
    std::vector<Tensor> heads;
    std::vector<Tensor> probs_per_head;
    heads.reserve(config.heads);
    for (std::size_t h = 0; h < config.heads; ++h) {
        Tensor Qh = slice_cols(Q, h * hd, hd);
        Tensor Kh = slice_cols(K, h * hd, hd);
        Tensor Vh = slice_cols(V, h * hd, hd);
        Tensor scores = scale(matmul_bt(Qh, Kh), 1.0 / std::sqrt(static_cast<double>(hd)));
        Tensor probs = softmax_rows(add_rowwise(scores, bias));
        if (attn_probs != nullptr) {
            probs_per_head.push_back(probs);
        }
        if (dropout_rng != nullptr && config.attn_dropout > 0.0) {
            probs = dropout(probs, config.attn_dropout, *dropout_rng);
        }
        heads.push_back(matmul(probs, Vh));
    }
    if (attn_probs != nullptr) {
        attn_probs->push_back(concat_rows(probs_per_head));
    }
    return add_rowwise(matmul(concat_cols(heads), l.W_o), l.b_o);
}

Tensor ffn(const Tensor& y, const BackboneLayerParams& l) {
    return add_rowwise(matmul(gelu(add_rowwise(matmul(y, l.W_f1), l.b_f1)), l.W_f2), l.b_f2);
}

}  // namespace

Tensor encode(const Tensor& H, const AttentionMask& mask, const BackboneParams& params,
              const BackboneConfig& config, Rng* dropout_rng, std::vector<Tensor>* attn_probs) {
    config.validate();
    if (mask.size() != H.rows()) {
        throw ShapeError("encode: mask length " + std::to_string(mask.size()) + " vs " +
                         std::to_string(H.rows()) + " rows");
    }
    if (H.cols() != config.d_encoder) {
        throw ShapeError("encode: input width " + std::to_string(H.cols()) + " vs d_encoder " +
                         std::to_string(config.d_encoder));
    }
    bool any_real = false;
    for (std::uint8_t m : mask) {
        any_real = any_real || m != 0;
    }
    if (!any_real) {
        throw ContractError("encode: all positions are padding");
    }
    if (params.layers.size() != config.layers) {
        throw ShapeError("encode: " + std::to_string(params.layers.size()) + " layer params for " +
                         std::to_string(config.layers) + " configured layers");
    }

    const Tensor bias = mask_bias(mask);
    Tensor x = H;
    for (const BackboneLayerParams& l : params.layers) {
        Tensor a = mhsa(layer_norm(x, l.ln1_gamma, l.ln1_beta), bias, l, config, dropout_rng, attn_probs);
        if (dropout_rng != nullptr && config.dropout > 0.0) {
            a = dropout(a, config.dropout, *dropout_rng);
        }
        x = add(x, a);
        Tensor f = ffn(layer_norm(x, l.ln2_gamma, l.ln2_beta), l);
        if (dropout_rng != nullptr && config.dropout > 0.0) {
            f = dropout(f, config.dropout, *dropout_rng);
        }
        x = add(x, f);
    }
    if (config.final_ln) {
        x = layer_norm(x, params.lnf_gamma, params.lnf_beta);
    }
    return x;
}

}  // namespace b2w
