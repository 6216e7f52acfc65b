#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "b2w/autograd.hpp"
#include "b2w/checkpoint.hpp"
#include "b2w/embedder.hpp"
#include "b2w/errors.hpp"
#include "b2w/masking.hpp"
#include "b2w/model.hpp"
#include "b2w/noise.hpp"
#include "b2w/rep_analysis.hpp"
#include "b2w/segmenter.hpp"
#include "b2w/trainer.hpp"
#include "b2w/vocab.hpp"

namespace b2w::cli {
namespace {

struct ModelFlags {
    std::size_t d = 192;
    std::size_t dff = 768;
    std::size_t denc = 128;
    std::size_t maxwords = 128;
    std::size_t layers = 2;
    std::size_t heads = 4;
    std::size_t head_dim = 32;
    std::size_t dffn = 512;
    double dropout = 0.1;
    double attn_dropout = 0.1;
    bool final_ln = true;
    std::size_t jmax = 16;
};

void add_backbone_flags(CLI::App* sub, ModelFlags& f) {
    sub->add_option("--denc", f.denc, "Encoder width");
    sub->add_option("--maxwords", f.maxwords, "Maximum words per sequence");
    sub->add_option("--layers", f.layers, "Encoder layers");
    sub->add_option("--heads", f.heads, "Attention heads");
    sub->add_option("--head-dim", f.head_dim, "Per-head width (heads*head-dim = denc)");
    sub->add_option("--dffn", f.dffn, "Encoder feed-forward width");
    sub->add_option("--dropout", f.dropout, "Residual dropout rate");
    sub->add_option("--attn-dropout", f.attn_dropout, "Attention dropout rate");
    sub->add_flag("--final-ln,!--no-final-ln", f.final_ln, "Layer norm after the last block");
    sub->add_option("--jmax", f.jmax, "Subword positions per word");
}

void add_model_flags(CLI::App* sub, ModelFlags& f) {
    sub->add_option("--d", f.d, "Byte/word embedding width");
    sub->add_option("--dff", f.dff, "Embedder feed-forward width");
    add_backbone_flags(sub, f);
}

ModelConfig make_model_config(const ModelFlags& f, std::size_t vocab_size) {
    ModelConfig config;
    config.embedder.d = f.d;
    config.embedder.d_ff = f.dff;
    config.embedder.d_encoder = f.denc;
    config.embedder.max_words = f.maxwords;
    config.backbone.layers = f.layers;
    config.backbone.d_encoder = f.denc;
    config.backbone.heads = f.heads;
    config.backbone.head_dim = f.head_dim;
    config.backbone.d_ffn = f.dffn;
    config.backbone.dropout = f.dropout;
    config.backbone.attn_dropout = f.attn_dropout;
    config.backbone.final_ln = f.final_ln;
    config.head.d_encoder = f.denc;
    config.head.j_max = f.jmax;
    config.head.vocab_size = vocab_size;
    config.validate();
    return config;
}

// Every run directory carries the fully resolved configuration, with the
// subcommand as its section header, so the run can be re-issued with
// `b2w --config <dir>/config_resolved.txt <subcommand>`.
void write_config_echo(CLI::App* sub, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/config_resolved.txt";
    std::ofstream file(path);
    if (!file) {
        throw IoError("cannot write " + path);
    }
    file << '[' << sub->get_name() << "]\n" << sub->config_to_str(true, false);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw IoError("cannot read " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw IoError("cannot write " + path);
    }
    return file;
}

struct SegmentOpts {
    std::string text;
    std::string input;
    std::string out_file;
};

int run_segment(const SegmentOpts& o, std::ostream& out) {
    std::vector<std::string> lines;
    if (!o.input.empty()) {
        lines = read_lines(o.input);
    } else {
        lines.push_back(o.text);
    }
    std::ostringstream buffer;
    for (const std::string& line : lines) {
        for (const std::string& word : segment(line)) {
            buffer << word << '\n';
        }
    }
    if (o.out_file.empty()) {
        out << buffer.str();
    } else {
        open_out(o.out_file) << buffer.str();
    }
    return 0;
}

struct ParamsOpts {
    std::size_t d = 192;
    std::size_t dff = 768;
    std::size_t denc = 128;
    std::size_t maxwords = 128;
};

int run_params(const ParamsOpts& o, std::ostream& out) {
    EmbedderConfig config;
    config.d = o.d;
    config.d_ff = o.dff;
    config.d_encoder = o.denc;
    config.max_words = o.maxwords;
    config.validate();
    const ParamCounts counts = count_params(config);
    for (const auto& [name, n] : counts.per_tensor) {
        out << name << ' ' << n << '\n';
    }
    out << "total " << counts.total << '\n';
    return 0;
}

struct GradcheckOpts {
    double eps = 1e-6;
    double tol = 1e-5;
    std::uint64_t seed = 42;
};

int run_gradcheck(const GradcheckOpts& o, std::ostream& out) {
    ModelFlags f;
    f.d = 8;
    f.dff = 32;
    f.denc = 16;
    f.maxwords = 8;
    f.layers = 2;
    f.heads = 2;
    f.head_dim = 8;
    f.dffn = 32;
    f.dropout = 0.0;
    f.attn_dropout = 0.0;
    f.jmax = 4;
    const ModelConfig config = make_model_config(f, 50);
    Rng rng(o.seed);
    Model model = init_model(config, rng);

    // Re-draw every parameter at a generic scale. The check verifies
    // adjoints, and at the 0.02 init scale many true gradients sit below
    // the finite-difference noise floor.
    Rng redraw(o.seed + 1);
    for (auto& [name, t] : named_params(model)) {
        for (double& v : const_cast<Tensor&>(t).data()) {
            v = redraw.normal(0.0, 0.3);
        }
    }

    SegmentedSequence seq =
        wrap_special({encode_word("ab"), encode_word("cd"), encode_word("ef")}, std::nullopt,
                     f.maxwords);
    seq.words[2] = mask_word();

    // Word/subword targets exercising the whole stack, masked and intact
    // positions alike.
    const std::vector<std::size_t> word_ids = {1, 2, 2, 3};
    const std::vector<std::size_t> subword_js = {0, 0, 1, 0};
    const std::vector<int> vocab_ids = {7, 3, 12, 41};

    auto loss_with = [&](const Tensor& E) {
        EmbedderParams ep = model.embedder;
        ep.E = E;
        const Tensor H0 = embed_sequence(seq, ep, model.config.embedder);
        const AttentionMask mask(seq.words.size(), 1);
        const Tensor H = encode(H0, mask, model.backbone, model.config.backbone);
        const Tensor rows = add(gather_rows(H, word_ids), gather_rows(model.head.P, subword_js));
        return cross_entropy(predict_subwords(rows, model.head), vocab_ids);
    };

    // Differentiating the full loss with respect to the byte embedding
    // table runs every adjoint in the model: a wrong one anywhere would
    // corrupt dE. Deep weight entries are not checked one by one because
    // path cancellation puts some true gradients below what central
    // differences can resolve at this epsilon.
    const double err = grad_check(loss_with, model.embedder.E, o.eps);

    // Attention key biases shift every logit in a softmax row equally, so
    // the loss is exactly invariant to them. Check that invariance and
    // the zero analytic gradient directly.
    std::vector<Tensor> key_biases;
    for (auto& [name, t] : named_params(model)) {
        if (name.ends_with(".b_k")) {
            key_biases.push_back(t);
        }
    }
    double bias_grad = 0.0;
    double base = 0.0;
    {
        Graph g;
        Graph::Scope scope(g);
        Tensor loss = loss_with(model.embedder.E);
        base = loss.item();
        g.backward(loss);
        for (Tensor& b : key_biases) {
            for (double v : b.grad()) {
                bias_grad = std::max(bias_grad, std::abs(v));
            }
        }
    }
    for (Tensor& b : key_biases) {
        for (double& v : b.data()) v += 0.37;
    }
    const double shift = std::abs(loss_with(model.embedder.E).item() - base) / std::abs(base);
    for (Tensor& b : key_biases) {
        for (double& v : b.data()) v -= 0.37;
    }

    out << std::setprecision(17);
    out << "max_rel_error " << err << '\n';
    out << "key_bias_grad " << bias_grad << '\n';
    out << "key_bias_shift " << shift << '\n';
    if (err < o.tol && bias_grad < 1e-10 && shift < 1e-9) {
        out << "ok\n";
        return 0;
    }
    out << "fail\n";
    return 2;
}

struct PretrainOpts {
    std::string corpus;
    std::string vocab;
    std::string out_dir;
    ModelFlags model;
    TrainConfig train;
};

int run_pretrain(CLI::App* sub, const PretrainOpts& o, std::ostream& err) {
    write_config_echo(sub, o.out_dir);
    const Vocab vocab = load_vocab(o.vocab);
    const ModelConfig config = make_model_config(o.model, vocab.size());
    Rng rng(o.train.seed);
    Model model = init_model(config, rng);

    TrainConfig train = o.train;
    train.checkpoint_path = o.out_dir + "/checkpoint";
    train.metrics_path = o.out_dir + "/metrics.csv";
    const PretrainResult result = pretrain(o.corpus, model, vocab, train);

    auto summary = open_out(o.out_dir + "/summary.txt");
    summary << std::setprecision(17);
    summary << "initial_mean10 " << result.initial_mean10 << '\n';
    summary << "final_mean10 " << result.final_mean10 << '\n';
    summary << "rejected_steps " << result.rejected_steps << '\n';
    err << "pretrain: initial mean10 " << result.initial_mean10 << ", final mean10 "
        << result.final_mean10 << ", rejected " << result.rejected_steps << '\n';
    return 0;
}

struct EvalOpts {
    std::string corpus;
    std::string vocab;
    std::string checkpoint;
    std::string out_dir;
    std::size_t batches = 10;
    TrainConfig train;
};

int run_eval(CLI::App* sub, const EvalOpts& o, std::ostream& err) {
    write_config_echo(sub, o.out_dir);
    const Vocab vocab = load_vocab(o.vocab);
    Model model = load_model_checkpoint(o.checkpoint);
    if (vocab.size() != model.config.head.vocab_size) {
        throw ConfigError("vocabulary has " + std::to_string(vocab.size()) +
                          " tokens but the checkpoint was trained with " +
                          std::to_string(model.config.head.vocab_size));
    }
    const double loss = eval_loss(o.corpus, model, vocab, o.train, o.batches);
    auto file = open_out(o.out_dir + "/eval.txt");
    file << std::setprecision(17);
    file << "loss " << loss << '\n';
    file << "batches " << o.batches << '\n';
    err << "eval: loss " << loss << " over " << o.batches << " batches\n";
    return 0;
}

struct FinetuneOpts {
    std::string data;
    std::string checkpoint;
    std::string out_dir;
    FinetuneConfig config;
};

int run_finetune(CLI::App* sub, const FinetuneOpts& o, std::ostream& err) {
    write_config_echo(sub, o.out_dir);
    Model model = load_model_checkpoint(o.checkpoint);
    const FinetuneResult result = finetune_classifier(model, o.data, o.config);
    for (const std::string& warning : result.warnings) {
        err << "warning: " << warning << '\n';
    }
    auto file = open_out(o.out_dir + "/result.txt");
    file << std::setprecision(17);
    file << "accuracy " << result.accuracy << '\n';
    file << "train_examples " << result.train_examples << '\n';
    file << "eval_examples " << result.eval_examples << '\n';
    file << "classes " << result.classes << '\n';
    err << "finetune: accuracy " << result.accuracy << " on " << result.eval_examples
        << " held-out examples\n";
    return 0;
}

struct NoiseOpts {
    std::string input;
    std::string out_dir;
    std::string scheme = "drop";
    std::string stage = "pre";
    NoiseSpec spec;
};

int run_noise(CLI::App* sub, const NoiseOpts& o, std::ostream& err) {
    write_config_echo(sub, o.out_dir);
    NoiseSpec spec = o.spec;
    spec.scheme = noise_scheme_from_name(o.scheme);
    spec.stage = noise_stage_from_name(o.stage);
    spec.validate();
    const NoiseResult result = apply_noise(read_lines(o.input), spec);
    auto file = open_out(o.out_dir + "/noised.txt");
    for (const std::string& line : result.lines) {
        file << line << '\n';
    }
    auto stats = open_out(o.out_dir + "/noise_stats.txt");
    stats << "lines " << result.lines.size() << '\n';
    stats << "skipped_lines " << result.skipped_lines << '\n';
    stats << "rescued_words " << result.rescued_words << '\n';
    err << "noise: " << result.lines.size() << " lines, " << result.skipped_lines
        << " skipped, " << result.rescued_words << " rescued words\n";
    return 0;
}

struct AnalyzeOpts {
    std::string pairs;
    std::string checkpoint;
    std::string out_dir;
    bool matrix = false;
};

int run_analyze(CLI::App* sub, const AnalyzeOpts& o, std::ostream& err) {
    write_config_echo(sub, o.out_dir);
    const auto pairs = load_pair_tsv(o.pairs);
    auto model = std::make_shared<Model>(load_model_checkpoint(o.checkpoint));
    EmbedFn embed = [model](const std::string& surface) {
        return isolated_word_embedding(surface, model->embedder, model->config.embedder);
    };
    const AnalysisReport report = analyze_pairs(pairs, embed);
    {
        auto file = open_out(o.out_dir + "/pairs.csv");
        write_pair_csv(report, file);
    }
    {
        auto file = open_out(o.out_dir + "/spearman.csv");
        write_spearman_csv(report, file);
    }
    if (o.matrix) {
        std::vector<std::string> words;
        for (const auto& [a, b] : pairs) {
            if (std::find(words.begin(), words.end(), a) == words.end()) words.push_back(a);
            if (std::find(words.begin(), words.end(), b) == words.end()) words.push_back(b);
        }
        auto file = open_out(o.out_dir + "/cosine_matrix.csv");
        write_cosine_matrix_csv(words, embed, file);
    }
    for (const auto& [metric, rho] : report.spearman_by_metric) {
        err << "analyze: spearman(cosine, " << metric << ") = " << rho << '\n';
    }
    return 0;
}

struct AblateOpts {
    std::string corpus;
    std::string vocab;
    std::string out_dir;
    std::vector<std::size_t> sizes = {32, 64, 128};
    ModelFlags model;
    TrainConfig train;
};

int run_ablate(CLI::App* sub, const AblateOpts& o, std::ostream& err) {
    write_config_echo(sub, o.out_dir);
    const Vocab vocab = load_vocab(o.vocab);
    auto summary = open_out(o.out_dir + "/summary.csv");
    summary << "d,initial_mean10,final_mean10\n" << std::setprecision(17);
    for (const std::size_t d : o.sizes) {
        ModelFlags flags = o.model;
        flags.d = d;
        flags.dff = 4 * d;
        const ModelConfig config = make_model_config(flags, vocab.size());
        Rng rng(o.train.seed);
        Model model = init_model(config, rng);
        TrainConfig train = o.train;
        train.metrics_path = o.out_dir + "/loss_d" + std::to_string(d) + ".csv";
        err << "ablate-width: training d=" << d << '\n';
        const PretrainResult result = pretrain(o.corpus, model, vocab, train);
        summary << d << ',' << result.initial_mean10 << ',' << result.final_mean10 << '\n';
    }
    return 0;
}

void add_train_flags(CLI::App* sub, TrainConfig& t) {
    sub->add_option("--steps", t.steps, "Optimization steps");
    sub->add_option("--batch-size", t.batch_size, "Sequences per step");
    sub->add_option("--lr", t.lr, "Peak learning rate");
    sub->add_option("--warmup", t.warmup_proportion, "Warmup proportion of total steps");
    sub->add_option("--weight-decay", t.weight_decay, "Decoupled weight decay");
    sub->add_option("--clip-norm", t.clip_norm, "Gradient norm clip (0 = off)");
    sub->add_option("--seed", t.seed, "Random seed");
    sub->add_option("--mask-rate", t.mask_rate, "Word selection rate");
    sub->add_flag("--presplit", t.presplit, "Corpus lines are already space-split words");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Byte-level masked language modeling laboratory"};
    app.name("b2w");
    app.require_subcommand(1);
    // Config handling lives on the root: `b2w --config file <subcommand>`,
    // keys grouped under a [subcommand] section. Unknown keys are errors.
    app.set_config("--config", "", "Config file of key=value lines under a [subcommand] section");
    app.allow_config_extras(CLI::config_extras_mode::error);

    SegmentOpts seg;
    CLI::App* seg_cmd = app.add_subcommand("segment", "Split text into words, one per line");
    auto* seg_src = seg_cmd->add_option_group("source", "Exactly one input source");
    seg_src->add_option("--text", seg.text, "Text to segment");
    seg_src->add_option("--input", seg.input, "File to segment line by line")
        ->check(CLI::ExistingFile);
    seg_src->require_option(1);
    seg_cmd->add_option("--out", seg.out_file, "Write words here instead of stdout");

    ParamsOpts par;
    CLI::App* par_cmd = app.add_subcommand("params", "Report embedder parameter counts");
    par_cmd->add_option("--d", par.d, "Byte/word embedding width");
    par_cmd->add_option("--dff", par.dff, "Embedder feed-forward width");
    par_cmd->add_option("--denc", par.denc, "Encoder width");
    par_cmd->add_option("--maxwords", par.maxwords, "Maximum words per sequence");

    GradcheckOpts gc;
    CLI::App* gc_cmd =
        app.add_subcommand("gradcheck", "Finite-difference check of the full model gradient");
    gc_cmd->add_option("--eps", gc.eps, "Central-difference step");
    gc_cmd->add_option("--tol", gc.tol, "Maximum acceptable relative error");
    gc_cmd->add_option("--seed", gc.seed, "Random seed");

    PretrainOpts pre;
    CLI::App* pre_cmd = app.add_subcommand("pretrain", "Masked-LM pretraining run");
    pre_cmd->add_option("--corpus", pre.corpus, "Training text, one sequence per line")
        ->required()
        ->check(CLI::ExistingFile);
    pre_cmd->add_option("--vocab", pre.vocab, "Prediction vocabulary, one token per line")
        ->required()
        ->check(CLI::ExistingFile);
    pre_cmd->add_option("--out", pre.out_dir, "Run directory")->required();
    pre_cmd->add_option("--checkpoint-every", pre.train.checkpoint_every,
                        "Also save every N steps (0 = final only)");
    add_model_flags(pre_cmd, pre.model);
    add_train_flags(pre_cmd, pre.train);

    EvalOpts ev;
    CLI::App* ev_cmd = app.add_subcommand("eval", "Masked-LM loss of a checkpoint on a corpus");
    ev_cmd->add_option("--corpus", ev.corpus, "Evaluation text, one sequence per line")
        ->required()
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--vocab", ev.vocab, "Prediction vocabulary, one token per line")
        ->required()
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint path prefix")->required();
    ev_cmd->add_option("--out", ev.out_dir, "Run directory")->required();
    ev_cmd->add_option("--batches", ev.batches, "Freshly masked batches to average");
    ev_cmd->add_option("--batch-size", ev.train.batch_size, "Sequences per batch");
    ev_cmd->add_option("--seed", ev.train.seed, "Random seed");
    ev_cmd->add_option("--mask-rate", ev.train.mask_rate, "Word selection rate");
    ev_cmd->add_flag("--presplit", ev.train.presplit, "Corpus lines are already space-split words");

    FinetuneOpts ft;
    CLI::App* ft_cmd =
        app.add_subcommand("finetune", "Train a sequence classifier from a checkpoint");
    ft_cmd->add_option("--data", ft.data, "TSV rows: label<TAB>text[<TAB>text2]")
        ->required()
        ->check(CLI::ExistingFile);
    ft_cmd->add_option("--checkpoint", ft.checkpoint, "Checkpoint path prefix")->required();
    ft_cmd->add_option("--out", ft.out_dir, "Run directory")->required();
    ft_cmd->add_option("--epochs", ft.config.epochs, "Passes over the training split");
    ft_cmd->add_option("--batch-size", ft.config.batch_size, "Examples per step");
    ft_cmd->add_option("--lr", ft.config.lr, "Learning rate");
    ft_cmd->add_option("--weight-decay", ft.config.weight_decay, "Decoupled weight decay");
    ft_cmd->add_option("--seed", ft.config.seed, "Random seed");
    ft_cmd->add_option("--holdout-every", ft.config.holdout_every,
                       "Hold out every k-th row for accuracy");
    ft_cmd->add_option("--dropout", ft.config.dropout_override, "Dropout rate during finetuning");

    NoiseOpts no;
    CLI::App* no_cmd = app.add_subcommand("noise", "Apply a noise scheme to a corpus");
    no_cmd->add_option("--input", no.input, "Clean text, one line per sequence")
        ->required()
        ->check(CLI::ExistingFile);
    no_cmd->add_option("--out", no.out_dir, "Run directory")->required();
    no_cmd->add_option("--scheme", no.scheme, "Noise scheme")
        ->check(CLI::IsMember({"drop", "repeat", "uppercase", "random_case"}));
    no_cmd->add_option("--stage", no.stage, "Apply before or after segmentation")
        ->check(CLI::IsMember({"pre", "post", "pre_segmentation", "post_segmentation"}));
    no_cmd->add_option("--drop-p", no.spec.drop_p, "Per-character drop probability");
    no_cmd->add_option("--repeat-p", no.spec.repeat_p, "Per-character repetition probability");
    no_cmd->add_option("--seed", no.spec.seed, "Random seed");

    AnalyzeOpts an;
    CLI::App* an_cmd =
        app.add_subcommand("analyze", "Embedding-distance report over word pairs");
    an_cmd->add_option("--pairs", an.pairs, "TSV rows: word_a<TAB>word_b")
        ->required()
        ->check(CLI::ExistingFile);
    an_cmd->add_option("--checkpoint", an.checkpoint, "Checkpoint path prefix")->required();
    an_cmd->add_option("--out", an.out_dir, "Run directory")->required();
    an_cmd->add_flag("--matrix", an.matrix, "Also write the full cosine matrix");

    AblateOpts ab;
    CLI::App* ab_cmd =
        app.add_subcommand("ablate-width", "Pretrain each embedding width, one loss CSV per size");
    ab_cmd->add_option("--corpus", ab.corpus, "Training text, one sequence per line")
        ->required()
        ->check(CLI::ExistingFile);
    ab_cmd->add_option("--vocab", ab.vocab, "Prediction vocabulary, one token per line")
        ->required()
        ->check(CLI::ExistingFile);
    ab_cmd->add_option("--out", ab.out_dir, "Run directory")->required();
    ab_cmd->add_option("--sizes", ab.sizes, "Embedding widths to train")->delimiter(',');
    add_backbone_flags(ab_cmd, ab.model);
    add_train_flags(ab_cmd, ab.train);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (seg_cmd->parsed()) return run_segment(seg, out);
        if (par_cmd->parsed()) return run_params(par, out);
        if (gc_cmd->parsed()) return run_gradcheck(gc, out);
        if (pre_cmd->parsed()) return run_pretrain(pre_cmd, pre, err);
        if (ev_cmd->parsed()) return run_eval(ev_cmd, ev, err);
        if (ft_cmd->parsed()) return run_finetune(ft_cmd, ft, err);
        if (no_cmd->parsed()) return run_noise(no_cmd, no, err);
        if (an_cmd->parsed()) return run_analyze(an_cmd, an, err);
        if (ab_cmd->parsed()) return run_ablate(ab_cmd, ab, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << "error: no subcommand\n";
    return 1;
}

}  // namespace b2w::cli
