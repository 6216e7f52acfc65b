#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "b2w/rng.hpp"

namespace b2w {

// Characters are Unicode scalar values throughout; dropping or copying
// raw bytes would corrupt multi-byte sequences.
//
// Draw protocol, relied on by replay tests: random_drop takes one uniform
// per character; repetition takes one uniform per character plus one
// uniform_int(3) when the character repeats; random_case takes one
// uniform per cased character only.

// Each character removed independently with probability p.
std::string random_drop(std::string_view text, double p, Rng& rng);

// Each character, with probability p, is followed by k extra copies,
// k uniform on {1,2,3}.
std::string repetition(std::string_view text, double p, Rng& rng);

// Simple 1:1 uppercase mapping; non-cased characters unchanged.
std::string uppercase(std::string_view text);

// Each cased character flips to upper or lower with probability 0.5.
std::string random_case(std::string_view text, Rng& rng);

enum class NoiseScheme { drop, repeat, uppercase, random_case };
enum class NoiseStage { pre_segmentation, post_segmentation };

NoiseScheme noise_scheme_from_name(std::string_view name);
NoiseStage noise_stage_from_name(std::string_view name);

struct NoiseSpec {
    NoiseScheme scheme = NoiseScheme::drop;
    NoiseStage stage = NoiseStage::pre_segmentation;
    double drop_p = 0.10;
    double repeat_p = 0.20;
    std::uint64_t seed = 0;

    void validate() const;
};

struct NoiseResult {
    std::vector<std::string> lines;
    std::uint64_t skipped_lines = 0;    // dropped to empty (pre stage)
    std::uint64_t rescued_words = 0;    // post-stage words kept 1 char to survive drop
};

// pre_segmentation mutates raw lines; post_segmentation segments the
// clean line first and mutates inside each word, so boundaries are frozen
// and the output line is the space-join of the words (consume it with
// whitespace-only splitting). Line i uses the RNG stream derived from
// (seed, i), independent of other lines.
NoiseResult apply_noise(const std::vector<std::string>& lines, const NoiseSpec& spec);

}  // namespace b2w
