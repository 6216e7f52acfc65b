#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "b2w/embedder.hpp"
#include "b2w/errors.hpp"
#include "b2w/rep_analysis.hpp"
#include "b2w/rng.hpp"
#include "b2w/unicode.hpp"
#include "doctest.h"

using namespace b2w;

namespace {

// Textbook recursive edit distance, memoized. Slow but obviously correct;
// the fast implementation must agree with it everywhere.
std::size_t lev_reference(const std::vector<char32_t>& a, const std::vector<char32_t>& b,
                          std::size_t i, std::size_t j,
                          std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    const auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;
    std::size_t best;
    if (a[i] == b[j]) {
        best = lev_reference(a, b, i + 1, j + 1, memo);
    } else {
        const std::size_t del = lev_reference(a, b, i + 1, j, memo);
        const std::size_t ins = lev_reference(a, b, i, j + 1, memo);
        const std::size_t sub = lev_reference(a, b, i + 1, j + 1, memo);
        best = 1 + std::min({del, ins, sub});
    }
    memo[key] = best;
    return best;
}

std::size_t lev_reference(std::string_view a, std::string_view b) {
    const auto ca = unicode::decode_utf8(a);
    const auto cb = unicode::decode_utf8(b);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    return lev_reference(ca, cb, 0, 0, memo);
}

std::string random_word(Rng& rng, std::size_t max_len) {
    const std::size_t len = rng.uniform_int(max_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) {
        w.push_back(static_cast<char>('a' + rng.uniform_int(3)));
    }
    return w;
}

// Position-weighted character histogram; crude but word-shape sensitive,
// which is all the pipeline test needs.
std::vector<double> toy_embed(const std::string& word) {
    std::vector<double> v(32, 0.0);
    std::size_t pos = 0;
    for (unsigned char c : word) {
        v[c % 32] += 1.0 + 0.1 * static_cast<double>(pos);
        ++pos;
    }
    v[31] += 0.01;  // never the zero vector, even for ""
    return v;
}

std::filesystem::path fresh_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("levenshtein classic values and codepoint units") {
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("", "") == 0);
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("flaw", "lawn") == 2);
    // One codepoint apart, several bytes apart.
    CHECK(levenshtein("東京", "東大") == 1);
    CHECK(levenshtein("über", "uber") == 1);
}

TEST_CASE("levenshtein agrees with the recursive reference on random pairs") {
    Rng rng(2718);
    for (int iter = 0; iter < 500; ++iter) {
        const std::string a = random_word(rng, 7);
        const std::string b = random_word(rng, 7);
        const std::size_t fast = levenshtein(a, b);
        CHECK(fast == lev_reference(a, b));
        CHECK(fast == levenshtein(b, a));
    }
    // Triangle inequality over random triples.
    for (int iter = 0; iter < 200; ++iter) {
        const std::string a = random_word(rng, 6);
        const std::string b = random_word(rng, 6);
        const std::string c = random_word(rng, 6);
        CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    }
}

TEST_CASE("levenshtein and lcs similarities") {
    CHECK(levenshtein_similarity("kitten", "sitting") == doctest::Approx(1.0 - 3.0 / 7.0));
    CHECK(levenshtein_similarity("", "") == 1.0);
    CHECK(levenshtein_similarity("", "abc") == 0.0);
    CHECK(levenshtein_similarity("same", "same") == 1.0);

    // LCS(kitten, sitting) = ittn.
    CHECK(lcs_similarity("kitten", "sitting") == doctest::Approx(8.0 / 13.0).epsilon(1e-12));
    CHECK(lcs_similarity("", "") == 1.0);
    CHECK(lcs_similarity("abc", "") == 0.0);
    CHECK(lcs_similarity("abc", "abc") == 1.0);
    CHECK(lcs_similarity("abc", "acb") == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("jaro and jaro-winkler match hand-computed classics") {
    // MARTHA/MARHTA: 6 matches, 1 transposition.
    const double jm = (1.0 + 1.0 + 5.0 / 6.0) / 3.0;
    CHECK(jaro("MARTHA", "MARHTA") == doctest::Approx(jm).epsilon(1e-9));
    // Common prefix MAR, l = 3.
    CHECK(jaro_winkler("MARTHA", "MARHTA") == doctest::Approx(jm + 3 * 0.1 * (1 - jm)).epsilon(1e-9));

    // DWAYNE/DUANE: 4 matches, no transpositions.
    const double jd = (4.0 / 6.0 + 4.0 / 5.0 + 1.0) / 3.0;
    CHECK(jaro("DWAYNE", "DUANE") == doctest::Approx(jd).epsilon(1e-9));
    CHECK(jaro_winkler("DWAYNE", "DUANE") == doctest::Approx(jd + 0.1 * (1 - jd)).epsilon(1e-9));

    CHECK(jaro("", "") == 1.0);
    CHECK(jaro("a", "") == 0.0);
    CHECK(jaro("abc", "abc") == 1.0);
    CHECK(jaro("abc", "xyz") == 0.0);

    // The prefix bonus never hurts and the prefix cap holds.
    Rng rng(31);
    for (int iter = 0; iter < 300; ++iter) {
        const std::string a = random_word(rng, 7);
        const std::string b = random_word(rng, 7);
        const double j = jaro(a, b);
        const double jw = jaro_winkler(a, b);
        CHECK(jw >= j - 1e-15);
        CHECK(jw <= j + 4 * 0.1 * (1.0 - j) + 1e-15);
        CHECK(jw <= 1.0 + 1e-15);
    }
}

TEST_CASE("cosine similarity oracles and zero-vector refusal") {
    const std::vector<double> x = {1.0, 0.0};
    const std::vector<double> y = {0.0, 2.0};
    CHECK(cosine_similarity(x, y) == doctest::Approx(0.0));
    CHECK(cosine_similarity(x, x) == doctest::Approx(1.0));
    const std::vector<double> nx = {-2.0, 0.0};
    CHECK(cosine_similarity(x, nx) == doctest::Approx(-1.0));

    const std::vector<double> u = {1.0, 2.0, 3.0};
    const std::vector<double> v = {4.0, 5.0, 6.0};
    CHECK(cosine_similarity(u, v) ==
          doctest::Approx(32.0 / std::sqrt(14.0 * 77.0)).epsilon(1e-12));

    const std::vector<double> zero = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(cosine_similarity(u, zero), NumericError);
    const std::vector<double> shorter = {1.0};
    CHECK_THROWS_AS(cosine_similarity(u, shorter), ShapeError);
}

TEST_CASE("spearman handles ties with average ranks") {
    // xs ranks: 1, 2.5, 2.5, 4; ys ranks: 1, 3, 2, 4.
    // Pearson over those ranks: 4.5 / sqrt(4.5 * 5).
    const std::vector<double> xs = {1, 2, 2, 4};
    const std::vector<double> ys = {1, 3, 2, 4};
    CHECK(spearman(xs, ys) == doctest::Approx(4.5 / std::sqrt(22.5)).epsilon(1e-12));

    CHECK(spearman({1, 2, 3}, {10, 20, 30}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spearman({1, 2, 3}, {30, 20, 10}) == doctest::Approx(-1.0).epsilon(1e-12));

    // Rank correlation only sees order: any strictly increasing transform
    // of either side changes nothing.
    std::vector<double> raw = {0.3, -2.0, 5.5, 1.1, 0.0, 9.2};
    std::vector<double> other = {4.0, 1.0, 2.5, 8.0, -1.0, 3.0};
    std::vector<double> warped;
    for (double v : raw) warped.push_back(std::exp(v));
    CHECK(spearman(raw, other) == doctest::Approx(spearman(warped, other)).epsilon(1e-12));

    CHECK_THROWS_AS(spearman({1, 2}, {1, 2}), ContractError);
    CHECK_THROWS_AS(spearman({1, 2, 3}, {1, 2}), ShapeError);
    CHECK_THROWS_AS(spearman({5, 5, 5}, {1, 2, 3}), NumericError);
}

TEST_CASE("isolated word embeddings are unit length and word-only") {
    EmbedderConfig c;
    c.d = 6;
    c.d_ff = 12;
    c.d_encoder = 5;
    c.max_words = 4;
    Rng rng(8);
    const EmbedderParams p = init_embedder(c, rng);

    const std::vector<double> e = isolated_word_embedding("hello", p, c);
    REQUIRE(e.size() == 5);
    double norm = 0.0;
    for (double v : e) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));

    // Same thing built by hand: a one-word sequence, no specials.
    SegmentedSequence seq;
    seq.words = {encode_word("hello")};
    seq.token_types = {0};
    seq.positions = {0};
    const Tensor H = embed_sequence(seq, p, c);
    double hand_norm = 0.0;
    for (std::size_t i = 0; i < 5; ++i) hand_norm += H.at(0, i) * H.at(0, i);
    hand_norm = std::sqrt(hand_norm);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(e[i] == doctest::Approx(H.at(0, i) / hand_norm).epsilon(1e-12));
    }
}

TEST_CASE("analyze_pairs reproduces an independent metric pipeline") {
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"kitten", "sitting"}, {"walk", "walked"},   {"talk", "talking"},
        {"cat", "dog"},        {"same", "same"},     {"hello", "help"},
        {"abc", "cba"},        {"reader", "leader"}, {"sun", "sunlight"},
    };
    const AnalysisReport report = analyze_pairs(pairs, toy_embed);
    REQUIRE(report.pairs.size() == pairs.size());

    std::vector<double> cosines, levs, lcss, jaros, jws;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [a, b] = pairs[i];
        const WordPairScore& s = report.pairs[i];
        CHECK(s.word_a == a);
        CHECK(s.word_b == b);
        const auto ea = toy_embed(a);
        const auto eb = toy_embed(b);
        CHECK(s.cosine == doctest::Approx(cosine_similarity(ea, eb)).epsilon(1e-9));
        CHECK(s.lev_sim == doctest::Approx(levenshtein_similarity(a, b)).epsilon(1e-9));
        CHECK(s.lcs_sim == doctest::Approx(lcs_similarity(a, b)).epsilon(1e-9));
        CHECK(s.jaro_sim == doctest::Approx(jaro(a, b)).epsilon(1e-9));
        CHECK(s.jaro_winkler_sim == doctest::Approx(jaro_winkler(a, b)).epsilon(1e-9));
        cosines.push_back(s.cosine);
        levs.push_back(s.lev_sim);
        lcss.push_back(s.lcs_sim);
        jaros.push_back(s.jaro_sim);
        jws.push_back(s.jaro_winkler_sim);
    }

    REQUIRE(report.spearman_by_metric.size() == 4);
    const std::vector<std::pair<std::string, std::vector<double>*>> expect = {
        {"lev_sim", &levs}, {"lcs_sim", &lcss}, {"jaro", &jaros}, {"jaro_winkler", &jws}};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(report.spearman_by_metric[i].first == expect[i].first);
        const double rho = spearman(cosines, *expect[i].second);
        CHECK(std::stod(report.spearman_by_metric[i].second) == doctest::Approx(rho).epsilon(1e-12));
    }

    CHECK_THROWS_AS(analyze_pairs({}, toy_embed), ContractError);
}

TEST_CASE("analyze_pairs reports undefined correlations instead of failing") {
    // Identical pairs everywhere: every metric column is constant, so
    // ranks carry no variance.
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"aa", "aa"}, {"bb", "bb"}, {"cc", "cc"}};
    const AnalysisReport report = analyze_pairs(pairs, toy_embed);
    REQUIRE(report.spearman_by_metric.size() == 4);
    for (const auto& [name, value] : report.spearman_by_metric) {
        CHECK(value == "undefined");
    }
}

TEST_CASE("pair TSV loading and CSV writers") {
    const auto dir = fresh_dir("b2w_pairs");
    {
        std::ofstream out(dir / "pairs.tsv", std::ios::binary);
        out << "walk\twalked\n\nsun\tsunlight\r\n";
    }
    const auto pairs = load_pair_tsv((dir / "pairs.tsv").string());
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair<std::string, std::string>("walk", "walked"));
    CHECK(pairs[1] == std::pair<std::string, std::string>("sun", "sunlight"));

    {
        std::ofstream out(dir / "bad.tsv", std::ios::binary);
        out << "nodelimiter\n";
    }
    CHECK_THROWS_AS(load_pair_tsv((dir / "bad.tsv").string()), ConfigError);
    CHECK_THROWS_AS(load_pair_tsv((dir / "missing.tsv").string()), IoError);

    const AnalysisReport report = analyze_pairs(pairs, toy_embed);
    std::ostringstream pair_csv;
    write_pair_csv(report, pair_csv);
    std::istringstream lines(pair_csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "word_a,word_b,cosine,lev_sim,lcs_sim,jaro,jaro_winkler");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2);

    std::ostringstream sp_csv;
    write_spearman_csv(report, sp_csv);
    CHECK(sp_csv.str().rfind("metric,spearman\n", 0) == 0);

    std::ostringstream matrix;
    write_cosine_matrix_csv({"walk", "walked", "sun"}, toy_embed, matrix);
    std::istringstream mlines(matrix.str());
    std::getline(mlines, line);
    CHECK(line == "word,walk,walked,sun");
    std::getline(mlines, line);
    CHECK(line.rfind("walk,", 0) == 0);
    // Diagonal of the matrix is exactly cosine(w, w) = 1.
    std::istringstream first_row(line);
    std::string cell;
    std::getline(first_row, cell, ',');
    std::getline(first_row, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(1.0).epsilon(1e-12));
}
