#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace b2w {

namespace unicode {

// Classification and 1:1 case mapping backed by generated range tables
// (see tools/gen_unicode_tables.py). Case mappings that would expand to
// more than one codepoint are treated as uncased so conversions never
// change character counts.

bool is_space(char32_t cp);
bool is_punct_or_symbol(char32_t cp);  // Unicode categories P* and S*
bool is_upper(char32_t cp);            // Lu
bool is_lower(char32_t cp);            // Ll
bool is_digit(char32_t cp);            // Nd
bool is_cased(char32_t cp);

char32_t to_upper(char32_t cp);  // identity when no 1:1 mapping exists
char32_t to_lower(char32_t cp);

// UTF-8 <-> codepoints. Invalid sequences decode to U+FFFD, one byte at
// a time, so decoding never fails.
std::vector<char32_t> decode_utf8(std::string_view bytes);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

}  // namespace unicode

namespace unicode_tables {
struct CpRange {
    char32_t first;
    char32_t last;
};
struct CpPair {
    char32_t from;
    char32_t to;
};
extern const CpRange kSpace[];
extern const std::size_t kSpace_len;
extern const CpRange kPunctSym[];
extern const std::size_t kPunctSym_len;
extern const CpRange kUpper[];
extern const std::size_t kUpper_len;
extern const CpRange kLower[];
extern const std::size_t kLower_len;
extern const CpRange kDigit[];
extern const std::size_t kDigit_len;
extern const CpPair kToUpper[];
extern const std::size_t kToUpper_len;
extern const CpPair kToLower[];
extern const std::size_t kToLower_len;
}  // namespace unicode_tables

}  // namespace b2w
