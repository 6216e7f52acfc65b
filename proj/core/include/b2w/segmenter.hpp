#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace b2w {

// Control words occupy one reserved byte each; no ordinary Word may
// contain these byte values.
enum SpecialByte : std::uint8_t {
    kPadByte = 0x00,
    kUnkByte = 0x01,
    kClsByte = 0x02,
    kSepByte = 0x03,
    kMaskByte = 0x04,
};

constexpr std::size_t kMaxWordBytes = 128;

struct Word {
    std::vector<std::uint8_t> bytes;  // 1..=128 bytes
    bool is_special = false;          // true iff bytes is one reserved byte

    bool operator==(const Word& other) const {
        return is_special == other.is_special && bytes == other.bytes;
    }
};

Word pad_word();
Word unk_word();
Word cls_word();
Word sep_word();
Word mask_word();

// Word bytes as a string (the UTF-8 surface for ordinary words).
std::string word_surface(const Word& w);

struct SegmenterStats {
    std::uint64_t truncated_words = 0;  // >128-byte words cut at a codepoint boundary
    std::uint64_t sanitized_words = 0;  // words carrying reserved bytes, mapped to UNK
};

// Splits on Unicode whitespace (discarded); every punctuation or symbol
// codepoint and '_' becomes its own word; camel-case runs split before an
// uppercase preceded by a lowercase/digit and before an uppercase that
// starts a new lowercase run after an uppercase ("HTMLParser" -> "HTML",
// "Parser"). Empty input gives an empty list.
std::vector<std::string> segment(std::string_view text);

// UTF-8 bytes of a non-empty surface word, truncated to 128 bytes at a
// codepoint boundary. Words containing codepoints U+0000..U+0004 become
// the UNK word.
Word encode_word(std::string_view surface, SegmenterStats* stats = nullptr);

std::vector<Word> encode_words(const std::vector<std::string>& surfaces,
                               SegmenterStats* stats = nullptr);

struct SegmentedSequence {
    std::vector<Word> words;
    std::vector<int> token_types;        // 0 first segment (incl. CLS/first SEP), 1 second
    std::vector<std::size_t> positions;  // 0,1,2,... index into the sequence
};

// [CLS] a [SEP] or [CLS] a [SEP] b [SEP]. When the total would exceed
// max_words, words are dropped from the end of the currently longer
// segment, seq_b on ties. seq_a must be non-empty.
SegmentedSequence wrap_special(std::vector<Word> seq_a,
                               std::optional<std::vector<Word>> seq_b = std::nullopt,
                               std::size_t max_words = 128);

}  // namespace b2w
