#include "b2w/segmenter.hpp"

#include "b2w/errors.hpp"
#include "b2w/unicode.hpp"

namespace b2w {

namespace {

Word special(std::uint8_t byte) {
    Word w;
    w.bytes = {byte};
    w.is_special = true;
    return w;
}

// Camel boundaries inside one whitespace/punctuation-free run.
void split_camel(const std::vector<char32_t>& cps, std::size_t first, std::size_t last,
                 std::vector<std::string>& out) {
    std::size_t start = first;
    for (std::size_t i = first + 1; i < last; ++i) {
        const bool upper_after_lower =
            unicode::is_upper(cps[i]) && (unicode::is_lower(cps[i - 1]) || unicode::is_digit(cps[i - 1]));
        const bool upper_run_ends = unicode::is_upper(cps[i]) && unicode::is_upper(cps[i - 1]) &&
                                    i + 1 < last && unicode::is_lower(cps[i + 1]);
        if (upper_after_lower || upper_run_ends) {
            std::string w;
            for (std::size_t j = start; j < i; ++j) {
                unicode::append_utf8(w, cps[j]);
            }
            out.push_back(std::move(w));
            start = i;
        }
    }
    std::string w;
    for (std::size_t j = start; j < last; ++j) {
        unicode::append_utf8(w, cps[j]);
    }
    out.push_back(std::move(w));
}

bool splits_alone(char32_t cp) {
    return cp == U'_' || unicode::is_punct_or_symbol(cp);
}

}  // namespace

Word pad_word() { return special(kPadByte); }
Word unk_word() { return special(kUnkByte); }
Word cls_word() { return special(kClsByte); }
Word sep_word() { return special(kSepByte); }
Word mask_word() { return special(kMaskByte); }

std::string word_surface(const Word& w) {
    return std::string(w.bytes.begin(), w.bytes.end());
}

std::vector<std::string> segment(std::string_view text) {
    const std::vector<char32_t> cps = unicode::decode_utf8(text);
    std::vector<std::string> out;
    std::size_t run_start = 0;
    bool in_run = false;
    auto flush = [&](std::size_t end) {
        if (in_run) {
            split_camel(cps, run_start, end, out);
            in_run = false;
        }
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t cp = cps[i];
        if (unicode::is_space(cp)) {
            flush(i);
        } else if (splits_alone(cp)) {
            flush(i);
            std::string w;
            unicode::append_utf8(w, cp);
            out.push_back(std::move(w));
        } else {
            if (!in_run) {
                run_start = i;
                in_run = true;
            }
        }
    }
    flush(cps.size());
    return out;
}

Word encode_word(std::string_view surface, SegmenterStats* stats) {
    if (surface.empty()) {
        throw ContractError("encode_word: empty surface word");
    }
    const std::vector<char32_t> cps = unicode::decode_utf8(surface);
    for (char32_t cp : cps) {
        if (cp <= 0x04) {
            if (stats != nullptr) {
                stats->sanitized_words += 1;
            }
            return unk_word();
        }
    }
    Word w;
    for (char32_t cp : cps) {
        std::string enc;
        unicode::append_utf8(enc, cp);
        if (w.bytes.size() + enc.size() > kMaxWordBytes) {
            if (stats != nullptr) {
                stats->truncated_words += 1;
            }
            break;
        }
        w.bytes.insert(w.bytes.end(), enc.begin(), enc.end());
    }
    return w;
}

std::vector<Word> encode_words(const std::vector<std::string>& surfaces, SegmenterStats* stats) {
    std::vector<Word> out;
    out.reserve(surfaces.size());
    for (const std::string& s : surfaces) {
        out.push_back(encode_word(s, stats));
    }
    return out;
}

SegmentedSequence wrap_special(std::vector<Word> seq_a, std::optional<std::vector<Word>> seq_b,
                               std::size_t max_words) {
    if (seq_a.empty()) {
        throw ContractError("wrap_special: first segment is empty");
    }
    const bool pair = seq_b.has_value() && !seq_b->empty();
    std::vector<Word> b = pair ? std::move(*seq_b) : std::vector<Word>{};
    const std::size_t overhead = pair ? 3 : 2;  // CLS + SEP (+ SEP)
    if (max_words < overhead + 1) {
        throw ContractError("wrap_special: max_words " + std::to_string(max_words) +
                            " leaves no room for content");
    }
    while (seq_a.size() + b.size() + overhead > max_words) {
        if (b.size() >= seq_a.size() && !b.empty()) {
            b.pop_back();
        } else {
            seq_a.pop_back();
        }
    }

    SegmentedSequence seq;
    seq.words.push_back(cls_word());
    for (Word& w : seq_a) {
        seq.words.push_back(std::move(w));
    }
    seq.words.push_back(sep_word());
    seq.token_types.assign(seq.words.size(), 0);
    if (!b.empty()) {
        for (Word& w : b) {
            seq.words.push_back(std::move(w));
            seq.token_types.push_back(1);
        }
        seq.words.push_back(sep_word());
        seq.token_types.push_back(1);
    }
    seq.positions.resize(seq.words.size());
    for (std::size_t i = 0; i < seq.positions.size(); ++i) {
        seq.positions[i] = i;
    }
    return seq;
}

}  // namespace b2w
