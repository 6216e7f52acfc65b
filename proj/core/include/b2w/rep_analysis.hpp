#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "b2w/embedder.hpp"

namespace b2w {

// String metrics operate on Unicode codepoints, not bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - d/max(|a|,|b|); two empty strings count as identical.
double levenshtein_similarity(std::string_view a, std::string_view b);

// 2*|LCS| / (|a|+|b|); both empty -> 1.
double lcs_similarity(std::string_view a, std::string_view b);

// Match window floor(max(|a|,|b|)/2)-1, transpositions = half the
// out-of-order matches. Both empty -> 1, one empty -> 0.
double jaro(std::string_view a, std::string_view b);

// jaro + l*p*(1-jaro) with common prefix l capped at 4, p = 0.1.
double jaro_winkler(std::string_view a, std::string_view b);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Pearson correlation of average ranks (ties get the mean of their rank
// span). Lengths must agree and be >= 3; zero rank variance on either
// side is undefined and throws.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct WordPairScore {
    std::string word_a, word_b;
    double cosine = 0.0;
    double lev_sim = 0.0;
    double lcs_sim = 0.0;
    double jaro_sim = 0.0;
    double jaro_winkler_sim = 0.0;
};

struct AnalysisReport {
    std::vector<WordPairScore> pairs;
    // metric name -> Spearman(cosine, metric) over all pairs, or
    // "undefined" when ranks have no variance.
    std::vector<std::pair<std::string, std::string>> spearman_by_metric;
};

using EmbedFn = std::function<std::vector<double>(const std::string&)>;

// The learned representation of a word in isolation: a one-word sequence
// at position 0, type 0, no CLS/SEP, through the embedder only, then
// L2-normalized.
std::vector<double> isolated_word_embedding(const std::string& surface,
                                            const EmbedderParams& params,
                                            const EmbedderConfig& config);

AnalysisReport analyze_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                             const EmbedFn& embed);

std::vector<std::pair<std::string, std::string>> load_pair_tsv(const std::string& path);

void write_pair_csv(const AnalysisReport& report, std::ostream& out);
void write_spearman_csv(const AnalysisReport& report, std::ostream& out);
void write_cosine_matrix_csv(const std::vector<std::string>& words, const EmbedFn& embed,
                             std::ostream& out);

}  // namespace b2w
