#include "b2w/masking.hpp"

#include <algorithm>

#include "b2w/errors.hpp"

namespace b2w {

namespace {

// Single masking pass; returns false when nothing got selected.
bool mask_pass(const SegmentedSequence& seq, const Vocab& vocab, Rng& rng,
               const std::vector<Word>& pool, double rate, std::size_t j_max, MaskOutcome& out) {
    out.seq = seq;
    out.targets.clear();
    out.masked = out.randomized = out.kept = 0;
    bool selected_any = false;
    for (std::size_t i = 0; i < seq.words.size(); ++i) {
        const Word& original = seq.words[i];
        if (original.is_special) {
            continue;
        }
        if (rng.uniform() >= rate) {
            continue;
        }
        selected_any = true;
        const double branch = rng.uniform();
        if (branch < 0.8) {
            out.seq.words[i] = mask_word();
            out.masked += 1;
        } else if (branch < 0.9) {
            out.seq.words[i] = pool[rng.uniform_int(pool.size())];
            out.randomized += 1;
        } else {
            out.kept += 1;
        }
        const std::vector<int> pieces = tokenize_word(word_surface(original), vocab, j_max);
        for (std::size_t j = 0; j < pieces.size(); ++j) {
            out.targets.push_back({0, i, j, pieces[j]});
        }
    }
    return selected_any;
}

}  // namespace

MaskOutcome mask_words(const SegmentedSequence& seq, const Vocab& vocab, Rng& rng,
                       const std::vector<Word>& pool, double rate, std::size_t j_max) {
    if (rate <= 0.0 || rate > 1.0) {
        throw ConfigError("mask rate must lie in (0,1], got " + std::to_string(rate));
    }
    bool any_plain = false;
    for (const Word& w : seq.words) {
        any_plain = any_plain || !w.is_special;
    }
    if (!any_plain) {
        throw ContractError("mask_words: sequence has no non-special word");
    }
    if (pool.empty()) {
        throw ContractError("mask_words: empty replacement pool");
    }
    for (const Word& w : pool) {
        if (w.is_special) {
            throw ContractError("mask_words: special word in replacement pool");
        }
    }
    MaskOutcome out;
    if (!mask_pass(seq, vocab, rng, pool, rate, j_max, out)) {
        mask_pass(seq, vocab, rng, pool, rate, j_max, out);  // one resample, then allow empty
    }
    return out;
}

SegmentedSequence MaskedBatch::sequence(std::size_t s) const {
    if (s >= batch) {
        throw IndexError("batch row " + std::to_string(s) + " outside batch of " + std::to_string(batch));
    }
    SegmentedSequence seq;
    const std::size_t n = lengths[s];
    seq.words.assign(words.begin() + s * width, words.begin() + s * width + n);
    seq.token_types.assign(token_types.begin() + s * width, token_types.begin() + s * width + n);
    seq.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        seq.positions[i] = i;
    }
    return seq;
}

MaskedBatch make_batch(const std::vector<SegmentedSequence>& seqs, const Vocab& vocab, Rng& rng,
                       double rate, std::size_t j_max) {
    if (seqs.empty()) {
        throw ContractError("make_batch: no sequences");
    }
    std::vector<Word> pool;
    for (const SegmentedSequence& s : seqs) {
        for (const Word& w : s.words) {
            if (!w.is_special) {
                pool.push_back(w);
            }
        }
    }

    MaskedBatch b;
    b.batch = seqs.size();
    for (const SegmentedSequence& s : seqs) {
        b.width = std::max(b.width, s.words.size());
    }
    b.words.assign(b.batch * b.width, pad_word());
    b.token_types.assign(b.batch * b.width, 0);
    b.attention_mask.assign(b.batch * b.width, 0);
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        MaskOutcome one = mask_words(seqs[s], vocab, rng, pool, rate, j_max);
        const std::size_t n = one.seq.words.size();
        b.lengths.push_back(n);
        for (std::size_t i = 0; i < n; ++i) {
            b.words[s * b.width + i] = one.seq.words[i];
            b.token_types[s * b.width + i] = one.seq.token_types[i];
            b.attention_mask[s * b.width + i] = 1;
        }
        for (MaskTarget& t : one.targets) {
            t.seq_index = s;
            b.targets.push_back(t);
        }
        b.masked += one.masked;
        b.randomized += one.randomized;
        b.kept += one.kept;
    }
    return b;
}

}  // namespace b2w
