#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace b2w {

// Subword vocabulary, one token per line, id = line index. Non-initial
// pieces carry the "##" continuation prefix. "[UNK]" must be present.
struct Vocab {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> ids;
    int unk_id = -1;

    std::size_t size() const { return tokens.size(); }
    int id_of(std::string_view token) const;
};

Vocab load_vocab(const std::string& path);
Vocab vocab_from_tokens(std::vector<std::string> tokens);

// Greedy longest-match WordPiece-style split of the lowercased word.
// Any unmatched position maps the whole word to [UNK]; output is capped
// at j_max pieces.
std::vector<int> tokenize_word(std::string_view word, const Vocab& vocab, std::size_t j_max = 16);

}  // namespace b2w
