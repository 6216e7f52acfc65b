#include "b2w/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "b2w/autograd.hpp"
#include "b2w/checkpoint.hpp"
#include "b2w/errors.hpp"

namespace b2w {

void TrainConfig::validate() const {
    if (batch_size == 0 || steps == 0) {
        throw ConfigError("batch_size and steps must be positive");
    }
    if (mask_rate <= 0.0 || mask_rate >= 1.0) {
        throw ConfigError("mask_rate must lie in (0,1)");
    }
    if (warmup_proportion < 0.0 || warmup_proportion >= 1.0) {
        throw ConfigError("warmup_proportion must lie in [0,1)");
    }
    if (lr <= 0.0) {
        throw ConfigError("lr must be positive");
    }
}

void FinetuneConfig::validate() const {
    if (epochs == 0 || batch_size == 0) {
        throw ConfigError("epochs and batch_size must be positive");
    }
    if (lr <= 0.0) {
        throw ConfigError("lr must be positive");
    }
}

double lr_at(std::size_t step, std::size_t total_steps, double base_lr, double warmup_proportion) {
    const auto warmup = static_cast<std::size_t>(warmup_proportion * static_cast<double>(total_steps));
    if (step < warmup) {
        return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
    }
    return base_lr * static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup);
}

namespace {

// Fisher-Yates with our own RNG: std::shuffle is not stable across
// standard libraries, and pretrain promises seed-identical trajectories.
void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.uniform_int(i)]);
    }
}

Tensor masked_lm_loss(Model& model, const MaskedBatch& batch, Rng* dropout_rng) {
    if (batch.targets.empty()) {
        throw ContractError("masked batch carries no prediction targets");
    }
    std::vector<Tensor> rows;
    std::vector<int> target_ids;
    for (std::size_t s = 0; s < batch.batch; ++s) {
        std::vector<std::size_t> word_idx, subword_js;
        for (const MaskTarget& t : batch.targets) {
            if (t.seq_index == s) {
                word_idx.push_back(t.word_index);
                subword_js.push_back(t.subword_j);
                target_ids.push_back(t.vocab_id);
            }
        }
        if (word_idx.empty()) {
            continue;  // nothing to predict in this sequence
        }
        Tensor H = forward_sequence(model, batch.sequence(s), dropout_rng);
        rows.push_back(add(gather_rows(H, word_idx), gather_rows(model.head.P, subword_js)));
    }
    Tensor logits = predict_subwords(concat_rows(rows), model.head);
    return cross_entropy(logits, target_ids);
}

void write_metrics_header(std::ofstream& out) {
    out << "step,loss,lr,seconds\n";
}

}  // namespace

StepResult train_step(Model& model, const MaskedBatch& batch, AdamWState& opt,
                      const TrainConfig& config, std::size_t step_index, Rng* dropout_rng) {
    config.validate();
    opt.lr = lr_at(step_index, config.steps, config.lr, config.warmup_proportion);
    opt.weight_decay = config.weight_decay;

    StepResult r;
    r.lr = opt.lr;
    Graph g;
    Graph::Scope scope(g);
    Tensor loss = masked_lm_loss(model, batch, dropout_rng);
    r.loss = loss.item();
    if (!std::isfinite(r.loss)) {
        r.note = "non-finite loss " + std::to_string(r.loss) + "; step rejected";
        return r;
    }
    g.backward(loss);
    std::vector<Tensor> params = param_list(model);
    r.grad_norm = clip_grad_norm(params, config.clip_norm);
    std::string diag;
    r.applied = adamw_step(params, opt, &diag);
    if (!r.applied) {
        r.note = diag + "; step rejected";
    }
    return r;
}

double batch_loss(Model& model, const MaskedBatch& batch, Rng* dropout_rng) {
    return masked_lm_loss(model, batch, dropout_rng).item();
}

std::vector<SegmentedSequence> load_corpus(const std::string& path, std::size_t max_words,
                                           bool presplit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open corpus " + path);
    }
    std::vector<SegmentedSequence> seqs;
    std::string line;
    SegmenterStats stats;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::vector<std::string> surfaces;
        if (presplit) {
            std::istringstream row(line);
            std::string w;
            while (row >> w) {
                surfaces.push_back(w);
            }
        } else {
            surfaces = segment(line);
        }
        if (surfaces.empty()) {
            continue;
        }
        seqs.push_back(wrap_special(encode_words(surfaces, &stats), std::nullopt, max_words));
    }
    return seqs;
}

PretrainResult pretrain(const std::string& corpus_path, Model& model, const Vocab& vocab,
                        const TrainConfig& config) {
    config.validate();
    std::vector<SegmentedSequence> seqs =
        load_corpus(corpus_path, model.config.embedder.max_words, config.presplit);
    if (seqs.empty()) {
        throw IoError("corpus " + corpus_path + " has no usable lines");
    }

    if (config.dropout_override >= 0.0) {
        model.config.backbone.dropout = config.dropout_override;
        model.config.backbone.attn_dropout = config.dropout_override;
    }

    Rng rng(config.seed);
    Rng dropout_rng(rng.derive(1));
    AdamWState opt;
    opt.weight_decay = config.weight_decay;

    std::ofstream metrics;
    if (!config.metrics_path.empty()) {
        metrics.open(config.metrics_path, std::ios::trunc);
        if (!metrics) {
            throw IoError("cannot write metrics CSV " + config.metrics_path);
        }
        write_metrics_header(metrics);
    }

    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_indices(order, rng);
    std::size_t cursor = 0;

    auto save = [&](const std::string& path) {
        auto tensors = named_params(model);
        if (!opt.m.empty()) {
            auto opt_tensors = optimizer_tensors(opt, tensors);
            tensors.insert(tensors.end(), opt_tensors.begin(), opt_tensors.end());
        }
        save_checkpoint(tensors, model_config_echo(model.config), path);
    };

    PretrainResult result;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t step = 0; step < config.steps; ++step) {
        std::vector<SegmentedSequence> picked;
        picked.reserve(config.batch_size);
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            if (cursor == order.size()) {
                shuffle_indices(order, rng);
                cursor = 0;
            }
            picked.push_back(seqs[order[cursor++]]);
        }
        MaskedBatch batch =
            make_batch(picked, vocab, rng, config.mask_rate, model.config.head.j_max);
        const StepResult r = train_step(model, batch, opt, config, step, &dropout_rng);
        if (!r.applied) {
            result.rejected_steps += 1;
        }
        result.losses.push_back(r.loss);
        if (metrics.is_open()) {
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            metrics << step << "," << std::setprecision(17) << r.loss << "," << r.lr << ","
                    << seconds << "\n";
        }
        if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() &&
            (step + 1) % config.checkpoint_every == 0 && step + 1 < config.steps) {
            save(config.checkpoint_path + ".step" + std::to_string(step + 1));
        }
    }
    if (!config.checkpoint_path.empty()) {
        save(config.checkpoint_path);
    }

    const std::size_t k = std::min<std::size_t>(10, result.losses.size());
    result.initial_mean10 =
        std::accumulate(result.losses.begin(), result.losses.begin() + k, 0.0) / k;
    result.final_mean10 =
        std::accumulate(result.losses.end() - k, result.losses.end(), 0.0) / k;
    return result;
}

double eval_loss(const std::string& corpus_path, Model& model, const Vocab& vocab,
                 const TrainConfig& config, std::size_t batches) {
    config.validate();
    if (batches == 0) {
        throw ConfigError("eval needs at least one batch");
    }
    std::vector<SegmentedSequence> seqs =
        load_corpus(corpus_path, model.config.embedder.max_words, config.presplit);
    if (seqs.empty()) {
        throw IoError("corpus " + corpus_path + " has no usable lines");
    }
    Rng rng(config.seed);
    std::size_t cursor = 0;
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t b = 0; b < batches; ++b) {
        std::vector<SegmentedSequence> picked;
        for (std::size_t i = 0; i < config.batch_size; ++i) {
            picked.push_back(seqs[cursor++ % seqs.size()]);
            cursor %= seqs.size();
        }
        MaskedBatch batch =
            make_batch(picked, vocab, rng, config.mask_rate, model.config.head.j_max);
        if (batch.targets.empty()) {
            continue;
        }
        total += batch_loss(model, batch);
        counted += 1;
    }
    if (counted == 0) {
        throw ContractError("eval produced no targets in any batch");
    }
    return total / static_cast<double>(counted);
}

namespace {

struct LabeledExample {
    int label = 0;
    SegmentedSequence seq;
};

std::vector<LabeledExample> load_tsv(const std::string& path, std::size_t max_words,
                                     std::vector<std::string>& warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open classification TSV " + path);
    }
    std::vector<LabeledExample> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) {
                break;
            }
            start = tab + 1;
        }
        if (cols.size() < 2 || cols.size() > 3) {
            throw ConfigError("TSV line " + std::to_string(line_no) +
                              " needs label<TAB>text[<TAB>text2]");
        }
        int label = 0;
        try {
            std::size_t used = 0;
            label = std::stoi(cols[0], &used);
            if (used != cols[0].size()) {
                throw std::invalid_argument(cols[0]);
            }
        } catch (const std::exception&) {
            throw ConfigError("TSV line " + std::to_string(line_no) + " has non-integer label \"" +
                              cols[0] + "\"");
        }
        const std::vector<std::string> a = segment(cols[1]);
        if (a.empty()) {
            warnings.push_back("line " + std::to_string(line_no) + " has empty text; skipped");
            continue;
        }
        std::optional<std::vector<Word>> b;
        if (cols.size() == 3) {
            const std::vector<std::string> b_surf = segment(cols[2]);
            if (!b_surf.empty()) {
                b = encode_words(b_surf);
            }
        }
        rows.push_back({label, wrap_special(encode_words(a), std::move(b), max_words)});
    }
    return rows;
}

Tensor cls_logits(Model& model, const std::vector<const SegmentedSequence*>& seqs, Tensor& W_c,
                  Tensor& b_c, Rng* dropout_rng) {
    std::vector<Tensor> cls_rows;
    cls_rows.reserve(seqs.size());
    for (const SegmentedSequence* s : seqs) {
        cls_rows.push_back(gather_rows(forward_sequence(model, *s, dropout_rng), {0}));
    }
    return add_rowwise(matmul(concat_rows(cls_rows), W_c), b_c);
}

}  // namespace

FinetuneResult finetune_classifier(Model& model, const std::string& tsv_path,
                                   const FinetuneConfig& config) {
    config.validate();
    FinetuneResult result;
    std::vector<LabeledExample> rows =
        load_tsv(tsv_path, model.config.embedder.max_words, result.warnings);
    if (rows.empty()) {
        throw ContractError("classification TSV " + tsv_path + " has no usable rows");
    }

    std::vector<std::size_t> train_idx, eval_idx;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (config.holdout_every > 0 && i % config.holdout_every == config.holdout_every - 1) {
            eval_idx.push_back(i);
        } else {
            train_idx.push_back(i);
        }
    }
    if (train_idx.empty() || eval_idx.empty()) {
        throw ContractError("holdout split left train or eval empty");
    }

    int max_label = 0;
    for (std::size_t i : train_idx) {
        if (rows[i].label < 0) {
            throw ConfigError("negative label " + std::to_string(rows[i].label));
        }
        max_label = std::max(max_label, rows[i].label);
    }
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;
    std::vector<bool> seen(classes, false);
    for (std::size_t i : train_idx) {
        seen[static_cast<std::size_t>(rows[i].label)] = true;
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (!seen[c]) {
            throw ConfigError("labels are not a contiguous 0-based set: class " + std::to_string(c) +
                              " never appears");
        }
    }
    result.classes = classes;
    if (classes == 1) {
        result.degenerate = true;
        result.warnings.push_back("dataset has a single class; accuracy is trivial");
    }

    if (config.dropout_override >= 0.0) {
        model.config.backbone.dropout = config.dropout_override;
        model.config.backbone.attn_dropout = config.dropout_override;
    }

    Rng rng(config.seed);
    Rng dropout_rng(rng.derive(1));
    Tensor W_c = Tensor::randn({model.config.backbone.d_encoder, classes}, rng, 0.02, true);
    Tensor b_c = Tensor::zeros({classes}, true);

    // The subword prediction head stays out of the optimized set: transfer
    // keeps the embedder and backbone only.
    std::vector<Tensor> params;
    for (auto& [name, tensor] : named_params(model.embedder)) {
        params.push_back(tensor);
    }
    for (auto& [name, tensor] : named_params(model.backbone)) {
        params.push_back(tensor);
    }
    params.push_back(W_c);
    params.push_back(b_c);

    AdamWState opt;
    opt.lr = config.lr;
    opt.weight_decay = config.weight_decay;

    const bool use_dropout = model.config.backbone.dropout > 0.0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(train_idx, rng);
        for (std::size_t at = 0; at < train_idx.size(); at += config.batch_size) {
            const std::size_t end = std::min(at + config.batch_size, train_idx.size());
            std::vector<const SegmentedSequence*> seqs;
            std::vector<int> labels;
            for (std::size_t i = at; i < end; ++i) {
                seqs.push_back(&rows[train_idx[i]].seq);
                labels.push_back(rows[train_idx[i]].label);
            }
            Graph g;
            Graph::Scope scope(g);
            Tensor loss = cross_entropy(
                cls_logits(model, seqs, W_c, b_c, use_dropout ? &dropout_rng : nullptr), labels);
            if (!std::isfinite(loss.item())) {
                result.warnings.push_back("non-finite loss at epoch " + std::to_string(epoch) +
                                          "; batch skipped");
                continue;
            }
            g.backward(loss);
            adamw_step(params, opt);
        }
    }

    bool warned_unknown = false;
    std::size_t correct = 0;
    for (std::size_t i : eval_idx) {
        std::vector<const SegmentedSequence*> one{&rows[i].seq};
        Tensor logits = cls_logits(model, one, W_c, b_c, nullptr);
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (logits.at(0, c) > logits.at(0, best)) {
                best = c;
            }
        }
        const int label = rows[i].label;
        if (label < 0 || static_cast<std::size_t>(label) >= classes) {
            if (!warned_unknown) {
                result.warnings.push_back("held-out label " + std::to_string(label) +
                                          " never seen in training; scored incorrect");
                warned_unknown = true;
            }
            continue;
        }
        if (static_cast<std::size_t>(label) == best) {
            correct += 1;
        }
    }
    result.train_examples = train_idx.size();
    result.eval_examples = eval_idx.size();
    result.accuracy = static_cast<double>(correct) / static_cast<double>(eval_idx.size());
    return result;
}

Model load_model_checkpoint(const std::string& path_prefix) {
    const CheckpointData data = load_checkpoint(path_prefix);
    const ModelConfig config = model_config_from_pairs(data.config);
    Rng rng(0);
    Model m = init_model(config, rng);
    restore_params(data, named_params(m));
    return m;
}

}  // namespace b2w
