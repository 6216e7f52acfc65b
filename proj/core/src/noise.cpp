#include "b2w/noise.hpp"

#include "b2w/errors.hpp"
#include "b2w/segmenter.hpp"
#include "b2w/unicode.hpp"

namespace b2w {

std::string random_drop(std::string_view text, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) {
        throw ConfigError("drop probability must lie in [0,1]");
    }
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : unicode::decode_utf8(text)) {
        if (rng.uniform() >= p) {
            unicode::append_utf8(out, cp);
        }
    }
    return out;
}

std::string repetition(std::string_view text, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) {
        throw ConfigError("repetition probability must lie in [0,1]");
    }
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : unicode::decode_utf8(text)) {
        unicode::append_utf8(out, cp);
        if (rng.uniform() < p) {
            const std::size_t k = rng.uniform_int(3) + 1;
            for (std::size_t i = 0; i < k; ++i) {
                unicode::append_utf8(out, cp);
            }
        }
    }
    return out;
}

std::string uppercase(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : unicode::decode_utf8(text)) {
        unicode::append_utf8(out, unicode::to_upper(cp));
    }
    return out;
}

std::string random_case(std::string_view text, Rng& rng) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : unicode::decode_utf8(text)) {
        if (unicode::is_cased(cp)) {
            cp = rng.uniform() < 0.5 ? unicode::to_upper(cp) : unicode::to_lower(cp);
        }
        unicode::append_utf8(out, cp);
    }
    return out;
}

NoiseScheme noise_scheme_from_name(std::string_view name) {
    if (name == "drop") {
        return NoiseScheme::drop;
    }
    if (name == "repeat") {
        return NoiseScheme::repeat;
    }
    if (name == "uppercase") {
        return NoiseScheme::uppercase;
    }
    if (name == "random_case") {
        return NoiseScheme::random_case;
    }
    throw ConfigError("unknown noise scheme \"" + std::string(name) +
                      "\" (want drop|repeat|uppercase|random_case)");
}

NoiseStage noise_stage_from_name(std::string_view name) {
    if (name == "pre" || name == "pre_segmentation") {
        return NoiseStage::pre_segmentation;
    }
    if (name == "post" || name == "post_segmentation") {
        return NoiseStage::post_segmentation;
    }
    throw ConfigError("unknown noise stage \"" + std::string(name) + "\" (want pre|post)");
}

void NoiseSpec::validate() const {
    if (drop_p < 0.0 || drop_p > 1.0 || repeat_p < 0.0 || repeat_p > 1.0) {
        throw ConfigError("noise probabilities must lie in [0,1]");
    }
}

namespace {

std::string apply_scheme(std::string_view text, const NoiseSpec& spec, Rng& rng) {
    switch (spec.scheme) {
        case NoiseScheme::drop:
            return random_drop(text, spec.drop_p, rng);
        case NoiseScheme::repeat:
            return repetition(text, spec.repeat_p, rng);
        case NoiseScheme::uppercase:
            return uppercase(text);
        case NoiseScheme::random_case:
            return random_case(text, rng);
    }
    throw ConfigError("unhandled noise scheme");
}

}  // namespace

NoiseResult apply_noise(const std::vector<std::string>& lines, const NoiseSpec& spec) {
    spec.validate();
    Rng base(spec.seed);
    NoiseResult result;
    result.lines.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Rng rng(base.derive(i));
        const std::string& line = lines[i];
        if (spec.stage == NoiseStage::pre_segmentation) {
            std::string noisy = apply_scheme(line, spec, rng);
            if (noisy.empty() && !line.empty()) {
                result.skipped_lines += 1;
                continue;
            }
            result.lines.push_back(std::move(noisy));
        } else {
            const std::vector<std::string> words = segment(line);
            if (words.empty()) {
                result.lines.push_back("");
                continue;
            }
            std::string joined;
            for (std::size_t w = 0; w < words.size(); ++w) {
                std::string noisy = apply_scheme(words[w], spec, rng);
                if (noisy.empty()) {
                    // Word boundaries are frozen at this stage, so a fully
                    // dropped word keeps its first character instead of
                    // silently changing the word count.
                    const std::vector<char32_t> cps = unicode::decode_utf8(words[w]);
                    unicode::append_utf8(noisy, cps.front());
                    result.rescued_words += 1;
                }
                if (w > 0) {
                    joined.push_back(' ');
                }
                joined += noisy;
            }
            result.lines.push_back(std::move(joined));
        }
    }
    return result;
}

}  // namespace b2w
