#include "b2w/unicode.hpp"

#include <algorithm>

namespace b2w {
namespace unicode {

namespace {

using unicode_tables::CpPair;
using unicode_tables::CpRange;

bool in_ranges(const CpRange* table, std::size_t len, char32_t cp) {
    const CpRange* end = table + len;
    auto it = std::upper_bound(table, end, cp, [](char32_t v, const CpRange& r) { return v < r.first; });
    return it != table && cp <= (it - 1)->last;
}

char32_t map_pair(const CpPair* table, std::size_t len, char32_t cp) {
    const CpPair* end = table + len;
    auto it = std::lower_bound(table, end, cp, [](const CpPair& p, char32_t v) { return p.from < v; });
    if (it != end && it->from == cp) {
        return it->to;
    }
    return cp;
}

}  // namespace

bool is_space(char32_t cp) {
    return in_ranges(unicode_tables::kSpace, unicode_tables::kSpace_len, cp);
}

bool is_punct_or_symbol(char32_t cp) {
    return in_ranges(unicode_tables::kPunctSym, unicode_tables::kPunctSym_len, cp);
}

bool is_upper(char32_t cp) {
    return in_ranges(unicode_tables::kUpper, unicode_tables::kUpper_len, cp);
}

bool is_lower(char32_t cp) {
    return in_ranges(unicode_tables::kLower, unicode_tables::kLower_len, cp);
}

bool is_digit(char32_t cp) {
    return in_ranges(unicode_tables::kDigit, unicode_tables::kDigit_len, cp);
}

bool is_cased(char32_t cp) {
    return to_upper(cp) != cp || to_lower(cp) != cp;
}

char32_t to_upper(char32_t cp) {
    return map_pair(unicode_tables::kToUpper, unicode_tables::kToUpper_len, cp);
}

char32_t to_lower(char32_t cp) {
    return map_pair(unicode_tables::kToLower, unicode_tables::kToLower_len, cp);
}

std::vector<char32_t> decode_utf8(std::string_view bytes) {
    std::vector<char32_t> out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const auto n = bytes.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int extra = 0;
        char32_t cp = 0;
        char32_t min_cp = 0;
        if ((b0 & 0xE0) == 0xC0) {
            extra = 1;
            cp = b0 & 0x1F;
            min_cp = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2;
            cp = b0 & 0x0F;
            min_cp = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3;
            cp = b0 & 0x07;
            min_cp = 0x10000;
        } else {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        if (i + static_cast<std::size_t>(extra) >= n) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            const auto bk = static_cast<unsigned char>(bytes[i + static_cast<std::size_t>(k)]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(extra) + 1;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        append_utf8(out, cp);
    }
    return out;
}

}  // namespace unicode
}  // namespace b2w
