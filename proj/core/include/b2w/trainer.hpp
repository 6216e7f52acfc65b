#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "b2w/masking.hpp"
#include "b2w/model.hpp"
#include "b2w/optim.hpp"
#include "b2w/vocab.hpp"

namespace b2w {

struct TrainConfig {
    std::size_t batch_size = 16;
    std::size_t steps = 200;
    double lr = 3e-4;
    double warmup_proportion = 0.06;  // linear warmup, then linear decay to 0
    double weight_decay = 0.01;
    double clip_norm = 0.0;  // 0 disables clipping
    std::uint64_t seed = 42;
    double mask_rate = 0.15;
    std::string checkpoint_path;       // empty: no checkpoint
    std::string metrics_path;          // empty: no CSV
    std::size_t checkpoint_every = 0;  // extra mid-run saves; 0 = final only
    bool presplit = false;  // corpus lines are already word-per-token, split on spaces only
    double dropout_override = -1.0;  // >=0 replaces both backbone dropout rates

    void validate() const;
};

double lr_at(std::size_t step, std::size_t total_steps, double base_lr, double warmup_proportion);

struct StepResult {
    double loss = 0.0;
    double grad_norm = 0.0;
    double lr = 0.0;
    bool applied = false;
    std::string note;  // set when the step was rejected
};

// One optimization step over a masked batch: forward, cross-entropy over
// the batch targets, backward, optional clip, AdamW. A non-finite loss or
// gradient rejects the step and leaves parameters and optimizer alone.
StepResult train_step(Model& model, const MaskedBatch& batch, AdamWState& opt,
                      const TrainConfig& config, std::size_t step_index, Rng* dropout_rng);

// Loss only (eval mode, no dropout, no update).
double batch_loss(Model& model, const MaskedBatch& batch, Rng* dropout_rng = nullptr);

struct PretrainResult {
    std::vector<double> losses;  // one per step
    double initial_mean10 = 0.0;
    double final_mean10 = 0.0;
    std::uint64_t rejected_steps = 0;
};

// Lines -> wrapped single-segment sequences; presplit lines split on
// spaces, otherwise the full segmentation rules apply.
std::vector<SegmentedSequence> load_corpus(const std::string& path, std::size_t max_words,
                                           bool presplit);

PretrainResult pretrain(const std::string& corpus_path, Model& model, const Vocab& vocab,
                        const TrainConfig& config);

// Mean masked-LM loss over `batches` freshly masked batches (no update).
double eval_loss(const std::string& corpus_path, Model& model, const Vocab& vocab,
                 const TrainConfig& config, std::size_t batches);

struct FinetuneConfig {
    std::size_t epochs = 3;
    std::size_t batch_size = 16;
    double lr = 1e-3;
    double weight_decay = 0.01;
    std::uint64_t seed = 42;
    std::size_t holdout_every = 5;  // every k-th row held out for accuracy
    double dropout_override = 0.0;  // finetuning default: no dropout

    void validate() const;
};

struct FinetuneResult {
    double accuracy = 0.0;
    std::size_t train_examples = 0;
    std::size_t eval_examples = 0;
    std::size_t classes = 0;
    bool degenerate = false;  // single-class data
    std::vector<std::string> warnings;
};

// TSV rows: label<TAB>text[<TAB>text2]. Trains a softmax head (and the
// full stack) on the CLS-position hidden state; the subword prediction
// head plays no part. Reports held-out accuracy.
FinetuneResult finetune_classifier(Model& model, const std::string& tsv_path,
                                   const FinetuneConfig& config);

// Rebuild a model from a checkpoint's config echo and tensors.
Model load_model_checkpoint(const std::string& path_prefix);

}  // namespace b2w
