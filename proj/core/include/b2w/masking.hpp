#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "b2w/rng.hpp"
#include "b2w/segmenter.hpp"
#include "b2w/vocab.hpp"

namespace b2w {

// One prediction target: subword j of the ORIGINAL word at word_index in
// sequence seq_index, regardless of how the word was corrupted.
struct MaskTarget {
    std::size_t seq_index = 0;
    std::size_t word_index = 0;
    std::size_t subword_j = 0;
    int vocab_id = -1;
};

struct MaskOutcome {
    SegmentedSequence seq;  // corrupted copy
    std::vector<MaskTarget> targets;
    std::uint64_t masked = 0;      // replaced by the MASK word
    std::uint64_t randomized = 0;  // replaced by a pool word
    std::uint64_t kept = 0;        // selected but left intact
};

// Whole-word masking. Per non-special word the draws are, in order: one
// selection uniform (< rate selects), then for selected words one branch
// uniform (<0.8 mask, <0.9 randomize, else keep), then for the randomize
// branch one uniform_int over the pool. Zero selections resample the
// whole sequence once; a second miss is returned empty.
MaskOutcome mask_words(const SegmentedSequence& seq, const Vocab& vocab, Rng& rng,
                       const std::vector<Word>& pool, double rate = 0.15, std::size_t j_max = 16);

// Padded batch x width word grid; PAD fills unused cells.
struct MaskedBatch {
    std::size_t batch = 0;
    std::size_t width = 0;
    std::vector<Word> words;                   // batch*width
    std::vector<int> token_types;              // batch*width
    std::vector<std::uint8_t> attention_mask;  // batch*width, 1 = real
    std::vector<std::size_t> lengths;          // real words per sequence
    std::vector<MaskTarget> targets;
    std::uint64_t masked = 0, randomized = 0, kept = 0;

    SegmentedSequence sequence(std::size_t s) const;  // real words of row s
};

// Masks each sequence against the pooled non-special words of the whole
// batch, then packs the corrupted sequences into a grid.
MaskedBatch make_batch(const std::vector<SegmentedSequence>& seqs, const Vocab& vocab, Rng& rng,
                       double rate = 0.15, std::size_t j_max = 16);

}  // namespace b2w
