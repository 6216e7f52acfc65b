#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "b2w/checkpoint.hpp"
#include "b2w/errors.hpp"
#include "b2w/masking.hpp"
#include "b2w/model.hpp"
#include "b2w/noise.hpp"
#include "b2w/segmenter.hpp"
#include "b2w/trainer.hpp"
#include "b2w/unicode.hpp"
#include "b2w/vocab.hpp"
#include "doctest.h"

using namespace b2w;

namespace {

std::filesystem::path fresh_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << content;
}

ModelConfig tiny_config(std::size_t vocab_size) {
    ModelConfig c;
    c.embedder.d = 8;
    c.embedder.d_ff = 16;
    c.embedder.d_encoder = 8;
    c.embedder.max_words = 8;
    c.backbone.layers = 1;
    c.backbone.d_encoder = 8;
    c.backbone.heads = 2;
    c.backbone.head_dim = 4;
    c.backbone.d_ffn = 16;
    c.backbone.dropout = 0.0;
    c.backbone.attn_dropout = 0.0;
    c.head.d_encoder = 8;
    c.head.j_max = 4;
    c.head.vocab_size = vocab_size;
    return c;
}

Vocab tiny_vocab() {
    return vocab_from_tokens({"[UNK]", "the", "cat", "dog", "sat", "ran", "on", "mat", "a"});
}

std::string tiny_corpus_text() {
    return "the cat sat on the mat\n"
           "a dog ran on the mat\n"
           "the dog sat\n"
           "a cat ran\n";
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

double mean_range(const std::vector<double>& xs, std::size_t first, std::size_t count) {
    double s = 0.0;
    for (std::size_t i = first; i < first + count; ++i) s += xs[i];
    return s / static_cast<double>(count);
}

}  // namespace

TEST_CASE("lr schedule ramps linearly then decays linearly to zero") {
    const double base = 0.4;
    // 100 steps at 20% warmup: peak exactly at the end of warmup.
    CHECK(lr_at(0, 100, base, 0.2) == doctest::Approx(base / 20.0));
    CHECK(lr_at(9, 100, base, 0.2) == doctest::Approx(base * 10.0 / 20.0));
    CHECK(lr_at(19, 100, base, 0.2) == doctest::Approx(base));
    CHECK(lr_at(20, 100, base, 0.2) == doctest::Approx(base * 80.0 / 80.0));
    CHECK(lr_at(60, 100, base, 0.2) == doctest::Approx(base * 40.0 / 80.0));
    CHECK(lr_at(99, 100, base, 0.2) == doctest::Approx(base * 1.0 / 80.0));
    // No warmup: starts at base and decays.
    CHECK(lr_at(0, 50, base, 0.0) == doctest::Approx(base));
    CHECK(lr_at(25, 50, base, 0.0) == doctest::Approx(base * 0.5));
    // Never negative, never above base.
    for (std::size_t s = 0; s < 100; ++s) {
        const double lr = lr_at(s, 100, base, 0.2);
        CHECK(lr > 0.0);
        CHECK(lr <= base + 1e-15);
    }
}

TEST_CASE("train and finetune configs reject bad values") {
    TrainConfig t;
    t.steps = 0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t = TrainConfig{};
    t.mask_rate = 1.0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t = TrainConfig{};
    t.warmup_proportion = 1.0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t = TrainConfig{};
    t.lr = 0.0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    CHECK_NOTHROW(TrainConfig{}.validate());

    FinetuneConfig f;
    f.epochs = 0;
    CHECK_THROWS_AS(f.validate(), ConfigError);
    f = FinetuneConfig{};
    f.lr = -1.0;
    CHECK_THROWS_AS(f.validate(), ConfigError);
    CHECK_NOTHROW(FinetuneConfig{}.validate());
}

TEST_CASE("load_corpus segments lines or splits presplit lines on spaces") {
    const auto dir = fresh_dir("b2w_corpus");
    write_file(dir / "c.txt", "Hello, world!\n\nfoo_bar baz\r\n");
    const auto seqs = load_corpus((dir / "c.txt").string(), 16, false);
    REQUIRE(seqs.size() == 2);  // blank line skipped
    REQUIRE(seqs[0].words.size() == 6);
    CHECK(seqs[0].words.front() == cls_word());
    CHECK(word_surface(seqs[0].words[1]) == "Hello");
    CHECK(word_surface(seqs[0].words[2]) == ",");
    CHECK(word_surface(seqs[0].words[3]) == "world");
    CHECK(word_surface(seqs[0].words[4]) == "!");
    CHECK(seqs[0].words.back() == sep_word());
    REQUIRE(seqs[1].words.size() == 6);  // foo _ bar baz
    CHECK(word_surface(seqs[1].words[2]) == "_");

    write_file(dir / "p.txt", "Hello, world!\n");
    const auto pre = load_corpus((dir / "p.txt").string(), 16, true);
    REQUIRE(pre.size() == 1);
    REQUIRE(pre[0].words.size() == 4);  // CLS "hello," "world!" SEP
    CHECK(word_surface(pre[0].words[1]) == "Hello,");
    CHECK(word_surface(pre[0].words[2]) == "world!");

    write_file(dir / "long.txt", "a b c d e f g h i j\n");
    const auto capped = load_corpus((dir / "long.txt").string(), 5, true);
    REQUIRE(capped.size() == 1);
    CHECK(capped[0].words.size() == 5);  // CLS a b c SEP

    CHECK_THROWS_AS(load_corpus((dir / "missing.txt").string(), 16, false), IoError);
}

TEST_CASE("batch_loss equals an independent per-target recomputation") {
    const Vocab vocab = tiny_vocab();
    Rng init(3);
    Model model = init_model(tiny_config(vocab.size()), init);

    const auto dir = fresh_dir("b2w_batchloss");
    write_file(dir / "c.txt", tiny_corpus_text());
    const auto seqs = load_corpus((dir / "c.txt").string(), 8, false);
    Rng mask_rng(5);
    const MaskedBatch batch = make_batch(seqs, vocab, mask_rng, 0.3, 4);
    REQUIRE(!batch.targets.empty());

    const double reported = batch_loss(model, batch);

    std::vector<Tensor> rows;
    std::vector<int> ids;
    for (std::size_t s = 0; s < batch.batch; ++s) {
        std::vector<std::size_t> word_idx, subword_js;
        for (const MaskTarget& t : batch.targets) {
            if (t.seq_index != s) continue;
            word_idx.push_back(t.word_index);
            subword_js.push_back(t.subword_j);
            ids.push_back(t.vocab_id);
        }
        if (word_idx.empty()) continue;
        const Tensor H = forward_sequence(model, batch.sequence(s));
        rows.push_back(add(gather_rows(H, word_idx), gather_rows(model.head.P, subword_js)));
    }
    const double recomputed =
        cross_entropy(predict_subwords(concat_rows(rows), model.head), ids).item();
    CHECK(reported == doctest::Approx(recomputed).epsilon(1e-12));
}

TEST_CASE("fresh model masked-LM loss sits near the uniform baseline") {
    const Vocab vocab = tiny_vocab();
    Rng init(11);
    Model model = init_model(tiny_config(vocab.size()), init);
    const auto dir = fresh_dir("b2w_evalloss");
    write_file(dir / "c.txt", tiny_corpus_text());
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.seed = 2;
    const double loss = eval_loss((dir / "c.txt").string(), model, vocab, cfg, 3);
    CHECK(loss == doctest::Approx(std::log(static_cast<double>(vocab.size()))).epsilon(0.05));

    // Evaluation must not move parameters.
    const Tensor before = model.embedder.E.clone();
    eval_loss((dir / "c.txt").string(), model, vocab, cfg, 2);
    for (std::size_t i = 0; i < before.numel(); ++i) {
        CHECK(model.embedder.E.data()[i] == before.data()[i]);
    }
}

TEST_CASE("pretrain is deterministic and writes metrics and a checkpoint") {
    const Vocab vocab = tiny_vocab();
    const auto dir = fresh_dir("b2w_pretrain");
    write_file(dir / "c.txt", tiny_corpus_text());

    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.steps = 12;
    cfg.lr = 1e-3;
    cfg.warmup_proportion = 0.1;
    cfg.seed = 9;
    cfg.metrics_path = (dir / "metrics.csv").string();
    cfg.checkpoint_path = (dir / "ckpt").string();

    Rng init_a(4);
    Model a = init_model(tiny_config(vocab.size()), init_a);
    const PretrainResult ra = pretrain((dir / "c.txt").string(), a, vocab, cfg);

    REQUIRE(ra.losses.size() == 12);
    CHECK(ra.rejected_steps == 0);
    CHECK(ra.initial_mean10 == doctest::Approx(mean_range(ra.losses, 0, 10)).epsilon(1e-12));
    CHECK(ra.final_mean10 == doctest::Approx(mean_range(ra.losses, 2, 10)).epsilon(1e-12));

    // CSV: header plus one row per step, first column counting from 0.
    CHECK(count_lines(dir / "metrics.csv") == 13);
    std::ifstream csv(dir / "metrics.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "step,loss,lr,seconds");
    std::getline(csv, line);
    CHECK(line.rfind("0,", 0) == 0);

    // The checkpoint reconstructs the trained model exactly.
    Model restored = load_model_checkpoint(cfg.checkpoint_path);
    CHECK(restored.config.embedder.d == a.config.embedder.d);
    auto trained = named_params(a);
    auto loaded = named_params(restored);
    REQUIRE(trained.size() == loaded.size());
    for (std::size_t i = 0; i < trained.size(); ++i) {
        REQUIRE(trained[i].first == loaded[i].first);
        for (std::size_t j = 0; j < trained[i].second.numel(); ++j) {
            CHECK(trained[i].second.data()[j] == loaded[i].second.data()[j]);
        }
    }

    // Same seed, same data, fresh model: identical loss trajectory.
    TrainConfig quiet = cfg;
    quiet.metrics_path.clear();
    quiet.checkpoint_path.clear();
    Rng init_b(4);
    Model b = init_model(tiny_config(vocab.size()), init_b);
    const PretrainResult rb = pretrain((dir / "c.txt").string(), b, vocab, quiet);
    REQUIRE(rb.losses.size() == ra.losses.size());
    for (std::size_t i = 0; i < ra.losses.size(); ++i) {
        CHECK(ra.losses[i] == rb.losses[i]);
    }
}

TEST_CASE("pretrain overfits a tiny corpus") {
    const Vocab vocab = tiny_vocab();
    const auto dir = fresh_dir("b2w_overfit");
    write_file(dir / "c.txt", tiny_corpus_text());

    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.steps = 150;
    cfg.lr = 8e-3;
    cfg.warmup_proportion = 0.1;
    cfg.seed = 42;
    // Short lines select nothing now and then; a higher rate keeps every
    // 4-row batch carrying at least one target.
    cfg.mask_rate = 0.3;

    Rng init(1);
    Model model = init_model(tiny_config(vocab.size()), init);
    const PretrainResult r = pretrain((dir / "c.txt").string(), model, vocab, cfg);
    CHECK(r.final_mean10 < 0.5 * r.initial_mean10);
}

TEST_CASE("train_step rejects non-finite work without touching state") {
    const Vocab vocab = tiny_vocab();
    Rng init(6);
    Model model = init_model(tiny_config(vocab.size()), init);
    // Poison a weight on every forward path; the resulting non-finite loss
    // must reject the step before anything mutates.
    model.backbone.layers[0].W_q.data()[0] = std::numeric_limits<double>::infinity();
    const Tensor witness = model.embedder.E.clone();

    const SegmentedSequence seq = wrap_special(encode_words({"cat", "dog", "sat"}));
    Rng mask_rng(8);
    const MaskedBatch batch =
        make_batch({seq, wrap_special(encode_words({"ran"}))}, vocab, mask_rng, 1.0, 4);

    AdamWState opt;
    TrainConfig cfg;
    cfg.steps = 10;
    const StepResult r = train_step(model, batch, opt, cfg, 0, nullptr);
    CHECK(!r.applied);
    CHECK(!r.note.empty());
    CHECK(opt.t == 0);
    for (std::size_t i = 0; i < witness.numel(); ++i) {
        CHECK(model.embedder.E.data()[i] == witness.data()[i]);
    }
}

TEST_CASE("finetune learns a separable toy task end to end") {
    const Vocab vocab = tiny_vocab();
    Rng init(2);
    Model model = init_model(tiny_config(vocab.size()), init);

    const auto dir = fresh_dir("b2w_finetune");
    std::ostringstream tsv;
    for (int i = 0; i < 40; ++i) {
        if (i % 2 == 0) {
            tsv << "0\tthe cat sat on the mat\n";
        } else {
            tsv << "1\ta dog ran on the mat\n";
        }
    }
    write_file(dir / "cls.tsv", tsv.str());

    // From a random (unpretrained) stack the CLS feature drifts for a
    // while before the head can pin it down; 40 small-lr epochs converge
    // across seeds where 10 do not.
    FinetuneConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 8;
    cfg.lr = 1e-3;
    cfg.seed = 3;
    const FinetuneResult r = finetune_classifier(model, (dir / "cls.tsv").string(), cfg);
    CHECK(r.classes == 2);
    CHECK(!r.degenerate);
    CHECK(r.train_examples == 32);
    CHECK(r.eval_examples == 8);
    CHECK(r.accuracy == doctest::Approx(1.0));
}

TEST_CASE("finetune handles degenerate, paired and malformed inputs") {
    const Vocab vocab = tiny_vocab();
    const auto dir = fresh_dir("b2w_finetune_edge");

    SUBCASE("single class is flagged degenerate") {
        Rng init(2);
        Model model = init_model(tiny_config(vocab.size()), init);
        std::ostringstream tsv;
        for (int i = 0; i < 10; ++i) tsv << "0\tthe cat sat\n";
        write_file(dir / "one.tsv", tsv.str());
        FinetuneConfig cfg;
        cfg.epochs = 1;
        const FinetuneResult r = finetune_classifier(model, (dir / "one.tsv").string(), cfg);
        CHECK(r.degenerate);
        CHECK(r.classes == 1);
        CHECK(r.accuracy == doctest::Approx(1.0));
        CHECK(!r.warnings.empty());
    }

    SUBCASE("sentence pairs use the two-segment layout") {
        Rng init(2);
        Model model = init_model(tiny_config(vocab.size()), init);
        std::ostringstream tsv;
        for (int i = 0; i < 10; ++i) {
            tsv << (i % 2) << "\tthe cat\tthe dog\n";
        }
        write_file(dir / "pair.tsv", tsv.str());
        FinetuneConfig cfg;
        cfg.epochs = 1;
        const FinetuneResult r = finetune_classifier(model, (dir / "pair.tsv").string(), cfg);
        CHECK(r.classes == 2);
        CHECK(r.train_examples + r.eval_examples == 10);
    }

    SUBCASE("labels must be contiguous from zero") {
        Rng init(2);
        Model model = init_model(tiny_config(vocab.size()), init);
        std::ostringstream tsv;
        for (int i = 0; i < 10; ++i) tsv << (i % 2 == 0 ? 0 : 2) << "\tthe cat\n";
        write_file(dir / "gap.tsv", tsv.str());
        FinetuneConfig cfg;
        cfg.epochs = 1;
        CHECK_THROWS_AS(finetune_classifier(model, (dir / "gap.tsv").string(), cfg), ConfigError);
    }

    SUBCASE("non-integer labels and bad column counts are refused") {
        Rng init(2);
        Model model = init_model(tiny_config(vocab.size()), init);
        write_file(dir / "bad.tsv", "x\tthe cat\n");
        FinetuneConfig cfg;
        CHECK_THROWS_AS(finetune_classifier(model, (dir / "bad.tsv").string(), cfg), ConfigError);
        write_file(dir / "cols.tsv", "0\n");
        CHECK_THROWS_AS(finetune_classifier(model, (dir / "cols.tsv").string(), cfg), ConfigError);
    }
}

TEST_CASE("random_drop removes the contracted fraction of characters") {
    Rng rng(100);
    const std::string text(200000, 'a');
    const std::string out = random_drop(text, 0.10, rng);
    const double dropped = 1.0 - static_cast<double>(out.size()) / 200000.0;
    CHECK(dropped == doctest::Approx(0.10).epsilon(0.05));  // +-0.005 absolute

    Rng rng2(101);
    CHECK(random_drop("unchanged", 0.0, rng2) == "unchanged");
    CHECK(random_drop("gone", 1.0, rng2).empty());
    CHECK_THROWS_AS(random_drop("x", 1.5, rng2), ConfigError);
}

TEST_CASE("random_drop treats multi-byte characters as units") {
    Rng rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        const std::string out = random_drop("日本語のテキスト", 0.5, rng);
        const auto cps = unicode::decode_utf8(out);
        for (char32_t cp : cps) {
            CHECK(cp != 0xFFFD);
        }
    }
}

TEST_CASE("repetition lengthens text by the contracted expected factor") {
    Rng rng(102);
    const std::string text(200000, 'z');
    const std::string out = repetition(text, 0.20, rng);
    const double ratio = static_cast<double>(out.size()) / 200000.0;
    CHECK(ratio == doctest::Approx(1.40).epsilon(0.0143));  // +-0.02 absolute

    Rng rng2(103);
    CHECK(repetition("same", 0.0, rng2) == "same");
    const std::string all = repetition("ab", 1.0, rng2);
    CHECK(all.size() >= 4);
    CHECK(all.size() <= 8);
    CHECK_THROWS_AS(repetition("x", -0.1, rng2), ConfigError);
}

TEST_CASE("uppercase is idempotent and leaves uncased text alone") {
    CHECK(uppercase("MiXeD 123!") == "MIXED 123!");
    CHECK(uppercase("東京です") == "東京です");
    CHECK(uppercase("naïve café") == "NAÏVE CAFÉ");
    const std::string once = uppercase("The quick brown Fox, naïve 東京 123.");
    CHECK(uppercase(once) == once);
}

TEST_CASE("random_case flips cased characters half the time") {
    Rng rng(104);
    const std::string text(200000, 'a');
    const std::string out = random_case(text, rng);
    REQUIRE(out.size() == 200000);
    std::size_t upper = 0;
    for (char c : out) {
        if (c == 'A') ++upper;
    }
    const double frac = static_cast<double>(upper) / 200000.0;
    CHECK(frac == doctest::Approx(0.5).epsilon(0.01));  // +-0.005 absolute

    Rng rng2(105);
    CHECK(random_case("123 .,!", rng2) == "123 .,!");  // no cased characters, no change
}

TEST_CASE("apply_noise pre stage drops emptied lines and counts them") {
    NoiseSpec spec;
    spec.scheme = NoiseScheme::drop;
    spec.stage = NoiseStage::pre_segmentation;
    spec.drop_p = 1.0;
    spec.seed = 4;
    const NoiseResult r = apply_noise({"abc", "", "xy"}, spec);
    REQUIRE(r.lines.size() == 1);
    CHECK(r.lines[0].empty());
    CHECK(r.skipped_lines == 2);
    CHECK(r.rescued_words == 0);
}

TEST_CASE("apply_noise post stage freezes word boundaries") {
    NoiseSpec spec;
    spec.scheme = NoiseScheme::drop;
    spec.stage = NoiseStage::post_segmentation;
    spec.drop_p = 1.0;
    spec.seed = 4;
    const NoiseResult r = apply_noise({"hello, world!"}, spec);
    REQUIRE(r.lines.size() == 1);
    // Every word is fully dropped and rescued to its first character.
    CHECK(r.lines[0] == "h , w !");
    CHECK(r.rescued_words == 4);
    CHECK(r.skipped_lines == 0);

    // Word counts survive any drop probability.
    NoiseSpec half = spec;
    half.drop_p = 0.7;
    half.seed = 11;
    const std::string line = "the InputReader pulled naïve text from 東京 fast!";
    const std::size_t words_before = segment(line).size();
    const NoiseResult rr = apply_noise({line}, half);
    std::istringstream split(rr.lines[0]);
    std::string w;
    std::size_t words_after = 0;
    while (split >> w) ++words_after;
    CHECK(words_after == words_before);
}

TEST_CASE("apply_noise gives every line an independent stream") {
    NoiseSpec spec;
    spec.scheme = NoiseScheme::random_case;
    spec.stage = NoiseStage::pre_segmentation;
    spec.seed = 21;
    const std::string target = "the same sentence to perturb";
    const NoiseResult a = apply_noise({"first context line", target}, spec);
    const NoiseResult b = apply_noise({"a completely different and longer context line", target}, spec);
    REQUIRE(a.lines.size() == 2);
    REQUIRE(b.lines.size() == 2);
    CHECK(a.lines[1] == b.lines[1]);  // line index, not content, keys the stream
    CHECK(a.lines[0] != b.lines[0]);

    // And the per-line stream matches deriving by hand.
    Rng base(21);
    Rng line1(base.derive(1));
    CHECK(a.lines[1] == random_case(target, line1));
}

TEST_CASE("noise scheme and stage names parse exactly") {
    CHECK(noise_scheme_from_name("drop") == NoiseScheme::drop);
    CHECK(noise_scheme_from_name("repeat") == NoiseScheme::repeat);
    CHECK(noise_scheme_from_name("uppercase") == NoiseScheme::uppercase);
    CHECK(noise_scheme_from_name("random_case") == NoiseScheme::random_case);
    CHECK_THROWS_AS(noise_scheme_from_name("sparkle"), ConfigError);
    CHECK(noise_stage_from_name("pre") == NoiseStage::pre_segmentation);
    CHECK(noise_stage_from_name("pre_segmentation") == NoiseStage::pre_segmentation);
    CHECK(noise_stage_from_name("post") == NoiseStage::post_segmentation);
    CHECK(noise_stage_from_name("post_segmentation") == NoiseStage::post_segmentation);
    CHECK_THROWS_AS(noise_stage_from_name("mid"), ConfigError);

    NoiseSpec spec;
    spec.drop_p = 2.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}
