#include "b2w/vocab.hpp"

#include <fstream>

#include "b2w/errors.hpp"
#include "b2w/unicode.hpp"

namespace b2w {

int Vocab::id_of(std::string_view token) const {
    auto it = ids.find(std::string(token));
    return it == ids.end() ? -1 : it->second;
}

Vocab vocab_from_tokens(std::vector<std::string> tokens) {
    Vocab v;
    v.tokens = std::move(tokens);
    for (std::size_t i = 0; i < v.tokens.size(); ++i) {
        auto [it, inserted] = v.ids.emplace(v.tokens[i], static_cast<int>(i));
        if (!inserted) {
            throw ConfigError("vocabulary has duplicate token \"" + v.tokens[i] + "\"");
        }
    }
    auto unk = v.ids.find("[UNK]");
    if (unk == v.ids.end()) {
        throw ConfigError("vocabulary is missing required token [UNK]");
    }
    v.unk_id = unk->second;
    return v;
}

Vocab load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open vocabulary file " + path);
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        tokens.push_back(line);
    }
    return vocab_from_tokens(std::move(tokens));
}

std::vector<int> tokenize_word(std::string_view word, const Vocab& vocab, std::size_t j_max) {
    if (word.empty()) {
        throw ContractError("tokenize_word: empty word");
    }
    // Lowercase first; only 1:1 case mappings apply, so codepoint count is
    // preserved and match offsets stay aligned.
    std::vector<char32_t> cps = unicode::decode_utf8(word);
    std::string lowered;
    for (char32_t cp : cps) {
        unicode::append_utf8(lowered, unicode::to_lower(cp));
    }
    // Byte offsets of codepoint boundaries, so candidate pieces never split
    // a multi-byte sequence.
    std::vector<std::size_t> bounds;
    {
        std::size_t off = 0;
        bounds.push_back(0);
        for (char32_t cp : unicode::decode_utf8(lowered)) {
            std::string tmp;
            unicode::append_utf8(tmp, cp);
            off += tmp.size();
            bounds.push_back(off);
        }
    }

    std::vector<int> pieces;
    std::size_t b = 0;  // index into bounds
    const std::size_t nb = bounds.size() - 1;
    while (b < nb) {
        int match = -1;
        std::size_t match_end = b;
        for (std::size_t e = nb; e > b; --e) {
            std::string candidate = lowered.substr(bounds[b], bounds[e] - bounds[b]);
            if (b > 0) {
                candidate = "##" + candidate;
            }
            const int id = vocab.id_of(candidate);
            if (id >= 0) {
                match = id;
                match_end = e;
                break;
            }
        }
        if (match < 0) {
            return {vocab.unk_id};
        }
        pieces.push_back(match);
        b = match_end;
    }
    if (pieces.size() > j_max) {
        pieces.resize(j_max);
    }
    return pieces;
}

}  // namespace b2w
