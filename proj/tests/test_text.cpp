#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "b2w/errors.hpp"
#include "b2w/segmenter.hpp"
#include "b2w/unicode.hpp"
#include "b2w/vocab.hpp"
#include "doctest.h"
#include "segment_goldens.hpp"

using namespace b2w;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("utf8 decoding handles valid sequences of every length") {
    const auto cps = unicode::decode_utf8("a\xC3\xA9\xE6\x97\xA5\xF0\x9F\x98\x80");
    REQUIRE(cps.size() == 4);
    CHECK(cps[0] == U'a');
    CHECK(cps[1] == 0xE9);     // é
    CHECK(cps[2] == 0x65E5);   // 日
    CHECK(cps[3] == 0x1F600);  // emoji, 4-byte form
    CHECK(unicode::encode_utf8(cps) == "a\xC3\xA9\xE6\x97\xA5\xF0\x9F\x98\x80");
}

TEST_CASE("utf8 decoding replaces malformed input byte by byte") {
    // Lone continuation byte.
    CHECK(unicode::decode_utf8("\x80") == std::vector<char32_t>{0xFFFD});
    // Overlong encoding of NUL.
    CHECK(unicode::decode_utf8("\xC0\x80") == std::vector<char32_t>({0xFFFD, 0xFFFD}));
    // Truncated three-byte sequence.
    CHECK(unicode::decode_utf8("\xE6\x97") == std::vector<char32_t>({0xFFFD, 0xFFFD}));
    // CESU-style surrogate U+D800 is not a scalar value.
    CHECK(unicode::decode_utf8("\xED\xA0\x80") == std::vector<char32_t>({0xFFFD, 0xFFFD, 0xFFFD}));
    // First byte promises a codepoint above U+10FFFF.
    CHECK(unicode::decode_utf8("\xF5\x80\x80\x80") ==
          std::vector<char32_t>({0xFFFD, 0xFFFD, 0xFFFD, 0xFFFD}));
    // Good text resumes after damage.
    const auto cps = unicode::decode_utf8("a\x80z");
    REQUIRE(cps.size() == 3);
    CHECK(cps[0] == U'a');
    CHECK(cps[1] == 0xFFFD);
    CHECK(cps[2] == U'z');
}

TEST_CASE("case classification and 1:1 mappings") {
    CHECK(unicode::is_upper(U'A'));
    CHECK(!unicode::is_upper(U'a'));
    CHECK(unicode::is_lower(U'a'));
    CHECK(unicode::is_digit(U'7'));
    CHECK(unicode::is_space(U' '));
    CHECK(unicode::is_space(0x00A0));  // no-break space
    CHECK(unicode::is_punct_or_symbol(U'!'));
    CHECK(unicode::is_punct_or_symbol(U'+'));
    CHECK(unicode::is_punct_or_symbol(U'@'));
    CHECK(unicode::is_punct_or_symbol(0x3001));  // ideographic comma
    CHECK(!unicode::is_punct_or_symbol(U'a'));

    CHECK(unicode::to_upper(U'a') == U'A');
    CHECK(unicode::to_lower(U'A') == U'a');
    CHECK(unicode::to_upper(0xE9) == 0xC9);    // é -> É
    CHECK(unicode::to_lower(0x3A3) == 0x3C3);  // Σ -> σ
    CHECK(unicode::is_cased(U'a'));
    CHECK(!unicode::is_cased(U'7'));
    CHECK(!unicode::is_cased(0x65E5));  // 日

    // ß uppercases to "SS", a 1:2 expansion; the 1:1 tables leave it alone
    // so case conversion never changes character counts.
    CHECK(unicode::to_upper(0xDF) == 0xDF);
}

TEST_CASE("segmentation golden suite") {
    for (const auto& g : b2w_tests::segment_goldens()) {
        CAPTURE(g.text);
        CHECK(segment(g.text) == g.words);
    }
}

TEST_CASE("segmentation is idempotent over its own space-join") {
    for (const auto& g : b2w_tests::segment_goldens()) {
        std::string joined;
        for (const auto& w : g.words) {
            if (!joined.empty()) joined += ' ';
            joined += w;
        }
        CAPTURE(g.text);
        CHECK(segment(joined) == g.words);
    }
}

TEST_CASE("encode_word produces utf8 bytes and preserves case") {
    const Word abc = encode_word("abc");
    CHECK(abc.bytes == std::vector<std::uint8_t>({0x61, 0x62, 0x63}));
    CHECK(!abc.is_special);

    const Word accent = encode_word("é");
    CHECK(accent.bytes == std::vector<std::uint8_t>({0xC3, 0xA9}));

    CHECK(word_surface(encode_word("Hello")) == "Hello");
}

TEST_CASE("encode_word truncates oversized words at codepoint boundaries") {
    SegmenterStats stats;
    const Word long_ascii = encode_word(std::string(200, 'a'), &stats);
    CHECK(long_ascii.bytes.size() == 128);
    CHECK(stats.truncated_words == 1);

    // 'a' + 64 two-byte é is 129 bytes; the cut cannot land inside the
    // last é, so 127 bytes survive.
    std::string mixed = "a";
    for (int i = 0; i < 64; ++i) mixed += "\xC3\xA9";
    const Word truncated = encode_word(mixed, &stats);
    CHECK(truncated.bytes.size() == 127);
    CHECK(stats.truncated_words == 2);

    // 43 three-byte 日 is 129 bytes -> 42 fit.
    std::string cjk;
    for (int i = 0; i < 43; ++i) cjk += "\xE6\x97\xA5";
    CHECK(encode_word(cjk, &stats).bytes.size() == 126);
    CHECK(stats.truncated_words == 3);

    CHECK(encode_word(std::string(128, 'a'), &stats).bytes.size() == 128);
    CHECK(stats.truncated_words == 3);  // exactly at the cap is not truncation
}

TEST_CASE("encode_word maps reserved control bytes to UNK") {
    SegmenterStats stats;
    const Word w = encode_word(std::string_view("a\x02z", 3), &stats);
    CHECK(w == unk_word());
    CHECK(stats.sanitized_words == 1);
    CHECK(encode_word(std::string_view("\x00", 1), &stats) == unk_word());
    CHECK(stats.sanitized_words == 2);
}

TEST_CASE("special words are single reserved bytes") {
    CHECK(pad_word().bytes == std::vector<std::uint8_t>{0x00});
    CHECK(unk_word().bytes == std::vector<std::uint8_t>{0x01});
    CHECK(cls_word().bytes == std::vector<std::uint8_t>{0x02});
    CHECK(sep_word().bytes == std::vector<std::uint8_t>{0x03});
    CHECK(mask_word().bytes == std::vector<std::uint8_t>{0x04});
    for (const Word& w : {pad_word(), unk_word(), cls_word(), sep_word(), mask_word()}) {
        CHECK(w.is_special);
        CHECK(w.bytes.size() == 1);
    }
}

TEST_CASE("wrap_special single segment layout") {
    const SegmentedSequence seq = wrap_special({encode_word("hi")});
    REQUIRE(seq.words.size() == 3);
    CHECK(seq.words[0] == cls_word());
    CHECK(word_surface(seq.words[1]) == "hi");
    CHECK(seq.words[2] == sep_word());
    CHECK(seq.token_types == std::vector<int>({0, 0, 0}));
    CHECK(seq.positions == std::vector<std::size_t>({0, 1, 2}));
}

TEST_CASE("wrap_special pair layout and type ids") {
    const SegmentedSequence seq = wrap_special({encode_word("a")}, {{encode_word("b")}});
    REQUIRE(seq.words.size() == 5);
    CHECK(seq.words[0] == cls_word());
    CHECK(word_surface(seq.words[1]) == "a");
    CHECK(seq.words[2] == sep_word());
    CHECK(word_surface(seq.words[3]) == "b");
    CHECK(seq.words[4] == sep_word());
    CHECK(seq.token_types == std::vector<int>({0, 0, 0, 1, 1}));
    CHECK(seq.positions == std::vector<std::size_t>({0, 1, 2, 3, 4}));
}

TEST_CASE("wrap_special drops from the longer segment, second on ties") {
    std::vector<Word> a, b;
    for (const char* s : {"a1", "a2", "a3", "a4", "a5"}) a.push_back(encode_word(s));
    for (const char* s : {"b1", "b2", "b3"}) b.push_back(encode_word(s));
    // Capacity for content words is 8 - 3 specials = 5: drop a5, a4, then
    // the tie drops b3.
    const SegmentedSequence seq = wrap_special(a, b, 8);
    REQUIRE(seq.words.size() == 8);
    std::vector<std::string> surfaces;
    for (const Word& w : seq.words) surfaces.push_back(w.is_special ? "*" : word_surface(w));
    CHECK(surfaces == std::vector<std::string>({"*", "a1", "a2", "a3", "*", "b1", "b2", "*"}));
    CHECK(seq.token_types == std::vector<int>({0, 0, 0, 0, 0, 1, 1, 1}));
}

TEST_CASE("wrap_special truncates a lone oversized first segment") {
    std::vector<Word> a(10, encode_word("w"));
    const SegmentedSequence seq = wrap_special(a, std::nullopt, 5);
    REQUIRE(seq.words.size() == 5);
    CHECK(seq.words.front() == cls_word());
    CHECK(seq.words.back() == sep_word());
}

TEST_CASE("wrap_special rejects an empty first segment") {
    CHECK_THROWS_AS(wrap_special({}), ContractError);
    CHECK_THROWS_AS(wrap_special({}, {{encode_word("b")}}), ContractError);
}

TEST_CASE("vocab loads with line-index ids") {
    const std::string path =
        write_temp("b2w_vocab_ok.txt", "[PAD]\n[UNK]\nthe\ncat\n##s\n");
    const Vocab v = load_vocab(path);
    CHECK(v.size() == 5);
    CHECK(v.id_of("[PAD]") == 0);
    CHECK(v.id_of("the") == 2);
    CHECK(v.id_of("##s") == 4);
    CHECK(v.unk_id == 1);
    CHECK(v.id_of("absent") == -1);  // raw lookup; UNK fallback is tokenize_word's job
    std::remove(path.c_str());
}

TEST_CASE("vocab validation rejects duplicates and missing UNK") {
    const std::string dup = write_temp("b2w_vocab_dup.txt", "[UNK]\nthe\nthe\n");
    CHECK_THROWS_AS(load_vocab(dup), ConfigError);
    CHECK_THROWS_WITH_AS(load_vocab(dup), doctest::Contains("the"), ConfigError);
    std::remove(dup.c_str());

    const std::string no_unk = write_temp("b2w_vocab_nounk.txt", "a\nb\n");
    CHECK_THROWS_AS(load_vocab(no_unk), ConfigError);
    std::remove(no_unk.c_str());

    CHECK_THROWS_AS(vocab_from_tokens({"a", "b"}), ConfigError);
    CHECK_THROWS_AS(vocab_from_tokens({"[UNK]", "x", "x"}), ConfigError);
}

TEST_CASE("tokenize_word greedy longest match with continuation pieces") {
    const Vocab v = vocab_from_tokens({"[UNK]", "un", "##aff", "##able"});
    CHECK(tokenize_word("unaffable", v) == std::vector<int>({1, 2, 3}));

    const Vocab hello = vocab_from_tokens({"[UNK]", "hello"});
    CHECK(tokenize_word("Hello", hello) == std::vector<int>({1}));  // lowercased first
    CHECK(tokenize_word("qzx", hello) == std::vector<int>({0}));    // no coverage -> UNK

    // Longest match wins over a shorter prefix.
    const Vocab greedy = vocab_from_tokens({"[UNK]", "a", "ab", "##b", "##c"});
    CHECK(tokenize_word("abc", greedy) == std::vector<int>({2, 4}));

    // A dead end mid-word maps the whole word to UNK, not a partial list.
    const Vocab partial = vocab_from_tokens({"[UNK]", "ab"});
    CHECK(tokenize_word("abz", partial) == std::vector<int>({0}));
}

TEST_CASE("tokenize_word caps output at j_max") {
    const Vocab v = vocab_from_tokens({"[UNK]", "a", "##a"});
    CHECK(tokenize_word("aaaa", v, 2) == std::vector<int>({1, 2}));
    CHECK(tokenize_word("aaaa", v, 16) == std::vector<int>({1, 2, 2, 2}));
}

TEST_CASE("tokenize_word pieces reassemble the lowercased word") {
    const Vocab v = vocab_from_tokens(
        {"[UNK]", "un", "happy", "##happy", "sun", "##light", "light", "##s"});
    for (const std::string word : {"unhappy", "sunlight", "Sunlight", "suns", "happy"}) {
        const std::vector<int> ids = tokenize_word(word, v);
        REQUIRE(!ids.empty());
        if (ids == std::vector<int>{v.unk_id}) continue;
        std::string rebuilt;
        for (int id : ids) {
            std::string piece = v.tokens[static_cast<std::size_t>(id)];
            if (piece.rfind("##", 0) == 0) piece = piece.substr(2);
            rebuilt += piece;
        }
        std::string lowered;
        for (char32_t cp : unicode::decode_utf8(word)) {
            unicode::append_utf8(lowered, unicode::to_lower(cp));
        }
        CHECK(rebuilt == lowered);
    }
}
