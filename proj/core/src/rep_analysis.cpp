#include "b2w/rep_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "b2w/errors.hpp"
#include "b2w/unicode.hpp"

namespace b2w {

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const std::vector<char32_t> A = unicode::decode_utf8(a);
    const std::vector<char32_t> B = unicode::decode_utf8(b);
    if (A.empty()) {
        return B.size();
    }
    if (B.empty()) {
        return A.size();
    }
    std::vector<std::size_t> prev(B.size() + 1), curr(B.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= A.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= B.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (A[i - 1] == B[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[B.size()];
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
    const std::size_t la = unicode::decode_utf8(a).size();
    const std::size_t lb = unicode::decode_utf8(b).size();
    const std::size_t longest = std::max(la, lb);
    if (longest == 0) {
        return 1.0;
    }
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double lcs_similarity(std::string_view a, std::string_view b) {
    const std::vector<char32_t> A = unicode::decode_utf8(a);
    const std::vector<char32_t> B = unicode::decode_utf8(b);
    if (A.empty() && B.empty()) {
        return 1.0;
    }
    std::vector<std::size_t> prev(B.size() + 1, 0), curr(B.size() + 1, 0);
    for (std::size_t i = 1; i <= A.size(); ++i) {
        for (std::size_t j = 1; j <= B.size(); ++j) {
            curr[j] = A[i - 1] == B[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return 2.0 * static_cast<double>(prev[B.size()]) / static_cast<double>(A.size() + B.size());
}

double jaro(std::string_view a, std::string_view b) {
    const std::vector<char32_t> A = unicode::decode_utf8(a);
    const std::vector<char32_t> B = unicode::decode_utf8(b);
    if (A.empty() && B.empty()) {
        return 1.0;
    }
    if (A.empty() || B.empty()) {
        return 0.0;
    }
    const std::size_t lmax = std::max(A.size(), B.size());
    const std::size_t window = lmax / 2 > 0 ? lmax / 2 - 1 : 0;
    std::vector<bool> a_matched(A.size(), false), b_matched(B.size(), false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(B.size(), i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!b_matched[j] && A[i] == B[j]) {
                a_matched[i] = b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if (matches == 0) {
        return 0.0;
    }
    std::size_t half_transpositions = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (!a_matched[i]) {
            continue;
        }
        while (!b_matched[j]) {
            ++j;
        }
        if (A[i] != B[j]) {
            half_transpositions += 1;
        }
        ++j;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(half_transpositions) / 2.0;
    return (m / static_cast<double>(A.size()) + m / static_cast<double>(B.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
    const double j = jaro(a, b);
    const std::vector<char32_t> A = unicode::decode_utf8(a);
    const std::vector<char32_t> B = unicode::decode_utf8(b);
    std::size_t prefix = 0;
    while (prefix < 4 && prefix < A.size() && prefix < B.size() && A[prefix] == B[prefix]) {
        prefix += 1;
    }
    return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine: vectors of length " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw NumericError("cosine of a zero vector is undefined");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

// Average (fractional) ranks: ties share the mean of their rank span.
std::vector<double> rankify(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw NumericError("correlation undefined: an input has zero variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw ShapeError("spearman: lists of length " + std::to_string(xs.size()) + " and " +
                         std::to_string(ys.size()));
    }
    if (xs.size() < 3) {
        throw ContractError("spearman needs at least 3 observations");
    }
    return pearson(rankify(xs), rankify(ys));
}

std::vector<double> isolated_word_embedding(const std::string& surface,
                                            const EmbedderParams& params,
                                            const EmbedderConfig& config) {
    SegmentedSequence seq;
    seq.words.push_back(encode_word(surface));
    seq.token_types.push_back(0);
    seq.positions.push_back(0);
    Tensor H = embed_sequence(seq, params, config);
    std::vector<double> v(H.data().begin(), H.data().end());
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& x : v) {
            x /= norm;
        }
    }
    return v;
}

AnalysisReport analyze_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                             const EmbedFn& embed) {
    if (pairs.empty()) {
        throw ContractError("no word pairs to analyze");
    }
    AnalysisReport report;
    report.pairs.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        WordPairScore s;
        s.word_a = a;
        s.word_b = b;
        s.cosine = cosine_similarity(embed(a), embed(b));
        s.lev_sim = levenshtein_similarity(a, b);
        s.lcs_sim = lcs_similarity(a, b);
        s.jaro_sim = jaro(a, b);
        s.jaro_winkler_sim = jaro_winkler(a, b);
        report.pairs.push_back(std::move(s));
    }

    std::vector<double> cosines;
    cosines.reserve(report.pairs.size());
    for (const WordPairScore& s : report.pairs) {
        cosines.push_back(s.cosine);
    }
    const std::vector<std::pair<std::string, const double WordPairScore::*>> metrics = {
        {"lev_sim", &WordPairScore::lev_sim},
        {"lcs_sim", &WordPairScore::lcs_sim},
        {"jaro", &WordPairScore::jaro_sim},
        {"jaro_winkler", &WordPairScore::jaro_winkler_sim},
    };
    for (const auto& [name, member] : metrics) {
        std::vector<double> values;
        values.reserve(report.pairs.size());
        for (const WordPairScore& s : report.pairs) {
            values.push_back(s.*member);
        }
        std::string cell;
        try {
            std::ostringstream os;
            os << std::setprecision(17) << spearman(cosines, values);
            cell = os.str();
        } catch (const Error&) {
            cell = "undefined";
        }
        report.spearman_by_metric.emplace_back(name, cell);
    }
    return report;
}

std::vector<std::pair<std::string, std::string>> load_pair_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open pair file " + path);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw ConfigError("pair file line " + std::to_string(line_no) +
                              " must be word_a<TAB>word_b");
        }
        pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return pairs;
}

void write_pair_csv(const AnalysisReport& report, std::ostream& out) {
    out << "word_a,word_b,cosine,lev_sim,lcs_sim,jaro,jaro_winkler\n";
    out << std::setprecision(17);
    for (const WordPairScore& s : report.pairs) {
        out << s.word_a << "," << s.word_b << "," << s.cosine << "," << s.lev_sim << ","
            << s.lcs_sim << "," << s.jaro_sim << "," << s.jaro_winkler_sim << "\n";
    }
}

void write_spearman_csv(const AnalysisReport& report, std::ostream& out) {
    out << "metric,spearman\n";
    for (const auto& [name, value] : report.spearman_by_metric) {
        out << name << "," << value << "\n";
    }
}

void write_cosine_matrix_csv(const std::vector<std::string>& words, const EmbedFn& embed,
                             std::ostream& out) {
    if (words.empty()) {
        throw ContractError("no words for the cosine matrix");
    }
    std::vector<std::vector<double>> embs;
    embs.reserve(words.size());
    for (const std::string& w : words) {
        embs.push_back(embed(w));
    }
    out << "word";
    for (const std::string& w : words) {
        out << "," << w;
    }
    out << "\n" << std::setprecision(17);
    for (std::size_t i = 0; i < words.size(); ++i) {
        out << words[i];
        for (std::size_t j = 0; j < words.size(); ++j) {
            out << "," << cosine_similarity(embs[i], embs[j]);
        }
        out << "\n";
    }
}

}  // namespace b2w
