#include "b2w/model.hpp"

#include "b2w/errors.hpp"

namespace b2w {

void ModelConfig::validate() const {
    embedder.validate();
    backbone.validate();
    head.validate();
    if (embedder.d_encoder != backbone.d_encoder || head.d_encoder != backbone.d_encoder) {
        throw ConfigError("d_encoder must agree: embedder " + std::to_string(embedder.d_encoder) +
                          ", backbone " + std::to_string(backbone.d_encoder) + ", head " +
                          std::to_string(head.d_encoder));
    }
}

Model init_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    Model m;
    m.config = config;
    m.embedder = init_embedder(config.embedder, rng);
    m.backbone = init_backbone(config.backbone, rng);
    m.head = init_head(config.head, rng);
    return m;
}

std::vector<std::pair<std::string, Tensor>> named_params(Model& m) {
    std::vector<std::pair<std::string, Tensor>> out = named_params(m.embedder);
    for (auto& kv : named_params(m.backbone)) {
        out.push_back(std::move(kv));
    }
    for (auto& kv : named_params(m.head)) {
        out.push_back(std::move(kv));
    }
    return out;
}

std::vector<Tensor> param_list(Model& m) {
    std::vector<Tensor> out;
    for (auto& [name, tensor] : named_params(m)) {
        out.push_back(tensor);
    }
    return out;
}

Tensor forward_sequence(Model& m, const SegmentedSequence& seq, Rng* dropout_rng) {
    Tensor H_W = embed_sequence(seq, m.embedder, m.config.embedder);
    AttentionMask mask(seq.words.size(), 1);
    return encode(H_W, mask, m.backbone, m.config.backbone, dropout_rng);
}

std::vector<std::pair<std::string, std::string>> model_config_echo(const ModelConfig& c) {
    auto s = [](std::size_t v) { return std::to_string(v); };
    return {
        {"model.d", s(c.embedder.d)},
        {"model.d_ff", s(c.embedder.d_ff)},
        {"model.d_encoder", s(c.embedder.d_encoder)},
        {"model.max_words", s(c.embedder.max_words)},
        {"model.layers", s(c.backbone.layers)},
        {"model.heads", s(c.backbone.heads)},
        {"model.head_dim", s(c.backbone.head_dim)},
        {"model.d_ffn", s(c.backbone.d_ffn)},
        {"model.dropout", std::to_string(c.backbone.dropout)},
        {"model.attn_dropout", std::to_string(c.backbone.attn_dropout)},
        {"model.final_ln", c.backbone.final_ln ? "1" : "0"},
        {"model.j_max", s(c.head.j_max)},
        {"model.vocab_size", s(c.head.vocab_size)},
    };
}

ModelConfig model_config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    ModelConfig c;
    bool saw_any = false;
    for (const auto& [key, value] : pairs) {
        if (key.rfind("model.", 0) != 0) {
            continue;
        }
        saw_any = true;
        const std::string field = key.substr(6);
        try {
            if (field == "d") {
                c.embedder.d = std::stoul(value);
            } else if (field == "d_ff") {
                c.embedder.d_ff = std::stoul(value);
            } else if (field == "d_encoder") {
                c.embedder.d_encoder = std::stoul(value);
                c.backbone.d_encoder = c.embedder.d_encoder;
                c.head.d_encoder = c.embedder.d_encoder;
            } else if (field == "max_words") {
                c.embedder.max_words = std::stoul(value);
            } else if (field == "layers") {
                c.backbone.layers = std::stoul(value);
            } else if (field == "heads") {
                c.backbone.heads = std::stoul(value);
            } else if (field == "head_dim") {
                c.backbone.head_dim = std::stoul(value);
            } else if (field == "d_ffn") {
                c.backbone.d_ffn = std::stoul(value);
            } else if (field == "dropout") {
                c.backbone.dropout = std::stod(value);
            } else if (field == "attn_dropout") {
                c.backbone.attn_dropout = std::stod(value);
            } else if (field == "final_ln") {
                c.backbone.final_ln = value != "0";
            } else if (field == "j_max") {
                c.head.j_max = std::stoul(value);
            } else if (field == "vocab_size") {
                c.head.vocab_size = std::stoul(value);
            } else {
                throw ConfigError("unknown model config key " + key);
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value \"" + value + "\" for " + key);
        } catch (const std::out_of_range&) {
            throw ConfigError("bad value \"" + value + "\" for " + key);
        }
    }
    if (!saw_any) {
        throw ConfigError("no model.* entries in checkpoint config echo");
    }
    c.validate();
    return c;
}

}  // namespace b2w
