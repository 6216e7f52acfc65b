// Generates the bundled toy data: a low-entropy template corpus, its
// prediction vocabulary, a separable two-class classification set, and a
// word-pair list for representation analysis. Deterministic for a fixed
// seed, so the committed files can be regenerated byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "b2w/rng.hpp"

namespace {

const std::vector<std::string> kNouns = {"cat", "dog", "bird", "fish", "mouse", "horse"};
const std::vector<std::string> kVerbs = {"sees", "finds", "likes", "chases"};
const std::vector<std::string> kPlaces = {"barn", "field", "river", "garden"};
const std::vector<std::string> kAdjectives = {"small", "big", "old"};
const std::vector<std::string> kColors = {"red", "blue"};

std::string pick(const std::vector<std::string>& words, b2w::Rng& rng) {
    return words[rng.uniform_int(words.size())];
}

std::string make_sentence(b2w::Rng& rng) {
    const std::uint64_t t = rng.uniform_int(28);
    if (t < 8) {
        return "the " + pick(kNouns, rng) + " " + pick(kVerbs, rng) + " the " + pick(kNouns, rng) +
               ".";
    }
    if (t < 13) {
        return "the " + pick(kAdjectives, rng) + " " + pick(kNouns, rng) + " " + pick(kVerbs, rng) +
               " the " + pick(kNouns, rng) + ".";
    }
    if (t < 18) {
        return "the " + pick(kNouns, rng) + " sits in the " + pick(kPlaces, rng) + ".";
    }
    if (t < 21) {
        return "a " + pick(kNouns, rng) + " and a " + pick(kNouns, rng) + " " + pick(kVerbs, rng) +
               " the " + pick(kNouns, rng) + ".";
    }
    if (t < 24) {
        return "the " + pick(kColors, rng) + " " + pick(kNouns, rng) + " " + pick(kVerbs, rng) +
               " the " + pick(kColors, rng) + " " + pick(kNouns, rng) + ".";
    }
    if (t == 24) {
        return "readFile opens the " + pick({"file", "page"}, rng) + ".";
    }
    if (t == 25) {
        return "HTMLParser reads the page.";
    }
    if (t == 26) {
        return "snake_case names the file.";
    }
    return "the unhappy " + pick(kNouns, rng) + " sleeps in the sunlight.";
}

void write_corpus(const std::string& path, std::size_t min_bytes, b2w::Rng& rng) {
    std::ofstream out(path);
    std::size_t written = 0;
    while (written < min_bytes) {
        const std::string line = make_sentence(rng);
        out << line << '\n';
        written += line.size() + 1;
    }
}

void write_vocab(const std::string& path, std::size_t total) {
    const std::vector<std::string> tokens = {
        "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
        "the", "a", "and", "in", "on",
        "cat", "dog", "bird", "fish", "mouse", "horse",
        "sees", "finds", "likes", "chases", "sits", "runs", "sleeps",
        "barn", "field", "river", "garden",
        "small", "big", "old", "red", "blue",
        "reads", "opens", "names", "read", "write", "file", "page",
        "snake", "case", "html", "parser",
        "sun", "##light", "un", "##happy", "happy",
        ".", ",", "_",
    };
    std::ofstream out(path);
    for (const std::string& token : tokens) {
        out << token << '\n';
    }
    for (std::size_t i = tokens.size(); i < total; ++i) {
        out << "filler" << i << '\n';
    }
}

// The class keyword fills both color slots of the corpus template
// "the C N V the C N." so the classification set stays inside the
// pretraining distribution.
void write_classify(const std::string& path, std::size_t rows, b2w::Rng& rng) {
    std::ofstream out(path);
    for (std::size_t i = 0; i < rows; ++i) {
        const int label = static_cast<int>(i % 2);
        const std::string color = kColors[label];
        const std::string text = "the " + color + " " + pick(kNouns, rng) + " " +
                                 pick(kVerbs, rng) + " the " + color + " " + pick(kNouns, rng) +
                                 ".";
        out << label << '\t' << text << '\n';
    }
}

void write_pairs(const std::string& path) {
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"cat", "cats"},     {"cat", "bat"},      {"cat", "dog"},      {"dog", "dogs"},
        {"horse", "house"},  {"mouse", "house"},  {"bird", "birds"},   {"fish", "dish"},
        {"read", "reads"},   {"read", "reed"},    {"file", "pile"},    {"file", "files"},
        {"river", "rivers"}, {"river", "liver"},  {"field", "yield"},  {"garden", "harden"},
        {"small", "tall"},   {"big", "bag"},      {"old", "bold"},     {"red", "bed"},
        {"blue", "glue"},    {"happy", "snappy"}, {"sun", "sunlight"}, {"parser", "sparser"},
    };
    std::ofstream out(path);
    for (const auto& [a, b] : pairs) {
        out << a << '\t' << b << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the bundled toy data files"};
    std::string out_dir = "data";
    std::size_t corpus_bytes = 1 << 20;
    std::size_t vocab_size = 256;
    std::size_t classify_rows = 1000;
    std::uint64_t seed = 12345;
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--corpus-bytes", corpus_bytes, "Minimum corpus size");
    app.add_option("--vocab-size", vocab_size, "Total vocabulary entries");
    app.add_option("--classify-rows", classify_rows, "Classification examples");
    app.add_option("--seed", seed, "Random seed");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    b2w::Rng rng(seed);
    write_corpus(out_dir + "/toy_corpus.txt", corpus_bytes, rng);
    write_vocab(out_dir + "/toy_vocab.txt", vocab_size);
    write_classify(out_dir + "/classify_toy.tsv", classify_rows, rng);
    write_pairs(out_dir + "/word_pairs.tsv");
    std::cerr << "wrote toy data to " << out_dir << '\n';
    return 0;
}
