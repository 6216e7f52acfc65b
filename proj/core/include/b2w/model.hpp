#pragma once

#include <string>
#include <utility>
#include <vector>

#include "b2w/embedder.hpp"
#include "b2w/encoder.hpp"
#include "b2w/head.hpp"

namespace b2w {

struct ModelConfig {
    EmbedderConfig embedder;
    BackboneConfig backbone;
    HeadConfig head;

    void validate() const;  // widths must agree across the three stages
};

struct Model {
    ModelConfig config;
    EmbedderParams embedder;
    BackboneParams backbone;
    HeadParams head;
};

Model init_model(const ModelConfig& config, Rng& rng);

std::vector<std::pair<std::string, Tensor>> named_params(Model& m);
std::vector<Tensor> param_list(Model& m);

// Embed + encode one sequence. dropout_rng == nullptr is eval mode.
Tensor forward_sequence(Model& m, const SegmentedSequence& seq, Rng* dropout_rng = nullptr);

// Round-trippable key/value form of the config, for checkpoint echoes.
std::vector<std::pair<std::string, std::string>> model_config_echo(const ModelConfig& config);
ModelConfig model_config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace b2w
