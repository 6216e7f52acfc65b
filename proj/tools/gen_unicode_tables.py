#!/usr/bin/env python3
"""Regenerates core/src/unicode_tables.cpp from Python's unicodedata.

Emits codepoint range tables for the character classes the segmenter and
noise tools need (whitespace, punctuation/symbol, Lu, Ll, Nd) plus 1:1
case mappings. Multi-codepoint case expansions are dropped so that case
conversion always preserves character counts.
"""

import sys
import unicodedata

MAX_CP = 0x110000


def ranges_of(pred):
    out = []
    start = None
    for cp in range(MAX_CP):
        if pred(cp):
            if start is None:
                start = cp
        else:
            if start is not None:
                out.append((start, cp - 1))
                start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def case_map(kind):
    pairs = []
    for cp in range(MAX_CP):
        c = chr(cp)
        mapped = c.upper() if kind == "upper" else c.lower()
        if len(mapped) == 1 and mapped != c:
            pairs.append((cp, ord(mapped)))
    return pairs


def emit_ranges(out, name, ranges):
    out.write(f"const CpRange {name}[] = {{\n")
    for i in range(0, len(ranges), 6):
        chunk = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in ranges[i : i + 6])
        out.write(f"    {chunk},\n")
    out.write("};\n")
    out.write(f"const std::size_t {name}_len = {len(ranges)};\n\n")


def emit_pairs(out, name, pairs):
    out.write(f"const CpPair {name}[] = {{\n")
    for i in range(0, len(pairs), 6):
        chunk = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in pairs[i : i + 6])
        out.write(f"    {chunk},\n")
    out.write("};\n")
    out.write(f"const std::size_t {name}_len = {len(pairs)};\n\n")


def main():
    space = ranges_of(lambda cp: chr(cp).isspace())
    punct_sym = ranges_of(lambda cp: unicodedata.category(chr(cp))[0] in "PS")
    upper = ranges_of(lambda cp: unicodedata.category(chr(cp)) == "Lu")
    lower = ranges_of(lambda cp: unicodedata.category(chr(cp)) == "Ll")
    digit = ranges_of(lambda cp: unicodedata.category(chr(cp)) == "Nd")
    to_upper = case_map("upper")
    to_lower = case_map("lower")

    with open(sys.argv[1] if len(sys.argv) > 1 else "unicode_tables.cpp", "w") as out:
        out.write("// Generated by tools/gen_unicode_tables.py (unicodedata %s). Do not edit.\n\n"
                  % unicodedata.unidata_version)
        out.write('#include "b2w/unicode.hpp"\n\n')
        out.write("namespace b2w::unicode_tables {\n\n")
        emit_ranges(out, "kSpace", space)
        emit_ranges(out, "kPunctSym", punct_sym)
        emit_ranges(out, "kUpper", upper)
        emit_ranges(out, "kLower", lower)
        emit_ranges(out, "kDigit", digit)
        emit_pairs(out, "kToUpper", to_upper)
        emit_pairs(out, "kToLower", to_lower)
        out.write("}  // namespace b2w::unicode_tables\n")


if __name__ == "__main__":
    main()
