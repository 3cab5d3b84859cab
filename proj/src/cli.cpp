#include "ltai/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ltai/error.hpp"
#include "ltai/evaluation.hpp"
#include "ltai/generative.hpp"
#include "ltai/parallel.hpp"
#include "ltai/protocol.hpp"
#include "ltai/trainer.hpp"

namespace ltai::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrainArgs {
    fs::path corpus_dir;
    fs::path out = "ltai_run";
    fs::path resume;
    TrainConfig config;
    bool plain_lda = false;
    bool constant_c = false;
    bool separate = false;
    bool deterministic = false;
    std::string holdout = "words";
    double test_fraction = 1.0 / 3.0;
    double word_fraction = 0.5;
};

struct EvalArgs {
    std::string task;
    fs::path model;
    fs::path corpus_dir;
    fs::path targets;
    fs::path out;
    std::string baseline = "none";
    int passes = 20;
};

json hyper_json(const HyperParams& h) {
    return {{"topics", h.topics}, {"alpha_theta", h.alpha_theta}, {"alpha_beta", h.alpha_beta},
            {"alpha_eta", h.alpha_eta}, {"c_plus", h.c_plus}, {"c_minus", h.c_minus},
            {"sv", h.sv}, {"se", h.se}, {"ss", h.ss}, {"sa", h.sa}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

// Writes to `path` or, when empty, to `out`.
template <typename Fn>
void emit(const fs::path& path, std::ostream& out, Fn&& fn) {
    if (path.empty()) {
        fn(out);
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    fn(f);
}

void check_model_corpus(const TrainedModel& model, const Corpus& corpus) {
    if (model.doc_ids.size() != corpus.num_docs())
        throw InvalidArgument("model has " + std::to_string(model.doc_ids.size()) + " documents, corpus has " +
                              std::to_string(corpus.num_docs()));
    for (std::size_t i = 0; i < corpus.num_docs(); ++i)
        if (model.doc_ids[i] != corpus.documents[i].id || model.doc_authors[i] != corpus.authors.authors_of(i))
            throw InvalidArgument("corpus does not match the model at document " + corpus.documents[i].id);
}

int cmd_stats(const fs::path& dir, std::ostream& out, std::ostream& err) {
    Warnings warnings;
    const Corpus corpus = load_corpus_dir(dir, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    out << format_stats(corpus_stats(corpus));
    return 0;
}

int cmd_prepare(const fs::path& in, const fs::path& out_dir, std::size_t min_count, std::ostream& err) {
    Warnings warnings;
    const Corpus corpus = load_corpus_dir(in, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    fs::create_directories(out_dir);
    write_corpus_dir(prepare_tokens(corpus, min_count), out_dir);
    return 0;
}

int cmd_generate(const GenerativeConfig& config, const fs::path& out_dir) {
    config.validate();
    auto [corpus, truth] = sample_corpus(config);
    fs::create_directories(out_dir);
    write_corpus_dir(corpus, out_dir);

    TrainedModel model;
    model.ground_truth = true;
    model.seed = config.seed;
    model.hyper.topics = config.topics;
    model.hyper.alpha_theta = config.alpha_theta;
    model.hyper.alpha_beta = config.alpha_beta;
    model.hyper.alpha_eta = config.alpha_eta;
    model.content.gamma = truth.theta;
    model.content.lambda = truth.beta;
    model.content.phi_bar = truth.zbar;
    model.authors.eta = truth.eta;
    model.authors.pi.resize(corpus.num_docs());
    for (std::size_t i = 0; i < corpus.num_docs(); ++i) {
        const std::size_t n = corpus.authors.authors_of(i).size();
        model.authors.pi[i].assign(n, 1.0 / static_cast<double>(n));
    }
    attach_metadata(model, corpus);
    save_checkpoint(model, out_dir / "ground_truth.ckpt");

    json echo = {{"topics", config.topics}, {"docs", config.docs}, {"authors", config.authors},
                 {"vocab", config.vocab}, {"doc_length", config.doc_length},
                 {"min_authors_per_doc", config.min_authors_per_doc},
                 {"max_authors_per_doc", config.max_authors_per_doc}, {"alpha_theta", config.alpha_theta},
                 {"alpha_beta", config.alpha_beta}, {"alpha_eta", config.alpha_eta},
                 {"link_rate", config.link_rate}, {"seed", config.seed}};
    write_text(out_dir / "config.json", echo.dump(2) + "\n");
    return 0;
}

int cmd_train(TrainArgs& a, bool c_pos_given, bool c_neg_given, std::ostream& out, std::ostream& err) {
    const int modes = int(a.plain_lda) + int(a.constant_c) + int(a.separate) + int(a.config.corrupt_percent > 0.0);
    if (modes > 1)
        throw InvalidArgument("--plain-lda, --constant-c, --separate and --corrupt-percent are mutually exclusive");
    if (a.plain_lda && (c_pos_given || c_neg_given))
        throw InvalidArgument("--plain-lda ignores link precisions; drop --c-pos/--c-neg");
    if (a.constant_c && c_pos_given)
        throw InvalidArgument("--constant-c uses --c-neg as the shared precision; drop --c-pos");
    if (a.plain_lda) a.config.mode = Mode::PlainLda;
    if (a.separate) a.config.mode = Mode::Separate;
    if (a.constant_c) a.config.mode = Mode::ConstantC;
    a.config.threads = default_threads();
    a.config.validate();

    Warnings warnings;
    const Corpus corpus = load_corpus_dir(a.corpus_dir, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';

    SplitSpec split{a.test_fraction, a.word_fraction, a.config.seed};
    split.validate();
    fs::create_directories(a.out);

    Corpus train_corpus = corpus;
    HeldOutWords monitor;
    bool have_monitor = false;
    if (a.holdout == "words") {
        auto task = prepare_word_task(corpus, split, &warnings);
        train_corpus = std::move(task.train_corpus);
        monitor = std::move(task.targets);
        have_monitor = !monitor.docs.empty();
        write_word_targets(train_corpus, monitor, a.out / "targets.tsv");
    } else if (a.holdout == "citations") {
        auto task = prepare_citation_task(corpus, split);
        train_corpus = std::move(task.reduced);
        write_citation_targets(train_corpus, task.targets, a.out / "targets.tsv");
        for (std::size_t s : task.skipped) err << "skipped (no links): " << corpus.documents[s].id << '\n';
    } else if (a.holdout == "authors") {
        auto task = prepare_author_task(corpus, split);
        train_corpus = std::move(task.reduced);
        write_author_targets(train_corpus, task.targets, a.out / "targets.tsv");
        for (std::size_t s : task.skipped) err << "skipped (uncited): " << corpus.documents[s].id << '\n';
    }
    if (a.holdout != "none") write_corpus_dir(train_corpus, a.out / "train_corpus");

    std::optional<TrainedModel> resume;
    if (!a.resume.empty()) resume = load_checkpoint(a.resume);

    json echo = {{"corpus_dir", a.corpus_dir.string()}, {"out", a.out.string()},
                 {"mode", mode_name(a.config.mode)}, {"hyper", hyper_json(a.config.hyper)},
                 {"effective_hyper", hyper_json(a.config.effective_hyper(train_corpus.num_docs()))},
                 {"tau0", a.config.rate.tau0}, {"kappa", a.config.rate.kappa},
                 {"max_iters", a.config.max_iters}, {"eval_every", a.config.eval_every},
                 {"tolerance", a.config.tolerance}, {"patience", a.config.patience},
                 {"corrupt_percent", a.config.corrupt_percent}, {"batch", a.config.batch},
                 {"doc_passes", a.config.doc_passes}, {"eval_passes", a.config.eval_passes},
                 {"sep_author_iters", a.config.sep_author_iters}, {"seed", a.config.seed},
                 {"holdout", a.holdout}, {"test_fraction", a.test_fraction},
                 {"word_holdout_fraction", a.word_fraction}, {"deterministic", a.deterministic},
                 {"resume", a.resume.string()}};
    write_text(a.out / "config.json", echo.dump(2) + "\n");

    std::ofstream metrics(a.out / "metrics.jsonl", resume ? std::ios::app : std::ios::trunc);
    if (!metrics) throw Error("cannot write metrics log");
    const bool deterministic = a.deterministic;
    auto sink = [&](const MetricRecord& m) {
        json rec = {{"iteration", m.iteration}, {"doc_updates", m.doc_updates}};
        if (!deterministic) rec["elapsed_seconds"] = m.elapsed_seconds;
        rec["heldout_log_predictive"] = m.heldout_log_predictive ? json(*m.heldout_log_predictive) : json(nullptr);
        metrics << rec.dump() << '\n' << std::flush;
    };

    TrainResult result = train(train_corpus, a.config, have_monitor ? &monitor : nullptr,
                               resume ? &*resume : nullptr, sink);
    save_checkpoint(result.model, a.out / "model.ckpt");
    out << "iterations\t" << result.model.iteration << '\n';
    out << "converged\t" << (result.converged ? "yes" : "no") << '\n';
    if (!result.history.empty() && result.history.back().heldout_log_predictive)
        out << std::setprecision(10) << "heldout_log_predictive\t" << *result.history.back().heldout_log_predictive
            << '\n';
    return 0;
}

int cmd_evaluate(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const TrainedModel model = load_checkpoint(a.model);
    const fs::path run_dir = a.model.parent_path();
    const fs::path corpus_dir = a.corpus_dir.empty() ? run_dir / "train_corpus" : a.corpus_dir;
    const fs::path targets_path = a.targets.empty() ? run_dir / "targets.tsv" : a.targets;

    Warnings warnings;
    const Corpus loaded = load_corpus_dir(corpus_dir, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    const Corpus corpus = align_to_model(loaded, model);
    check_model_corpus(model, corpus);
    const std::size_t threads = default_threads();

    EvalReport report;
    if (a.task == "words") {
        const HeldOutWords targets = read_word_targets(corpus, targets_path);
        report = evaluate_words(model, corpus, targets, a.passes, threads);
    } else if (a.task == "citations") {
        const auto targets = read_citation_targets(corpus, targets_path);
        report = evaluate_citations(model, corpus, targets, threads);
        std::vector<std::size_t> counts;
        for (const auto& t : targets) counts.push_back(citation_candidates(corpus.graph, t.cited).size());
        if (!counts.empty()) {
            std::ostringstream v;
            v << std::setprecision(17) << random_baseline_mrr(counts);
            report.config["random_baseline_mrr"] = v.str();
        }
    } else {
        const auto targets = read_author_targets(corpus, targets_path);
        if (a.baseline == "h-index") {
            const Matrix h = topical_h_index(model.theta(), corpus).cast<double>();
            report = evaluate_authors(model, corpus, targets, &h);
            report.config["authority"] = "topical_h_index";
        } else {
            report = evaluate_authors(model, corpus, targets);
        }
    }
    report.config["model"] = a.model.string();
    emit(a.out, out, [&](std::ostream& s) { write_eval_report(report, s); });
    return 0;
}

int cmd_report(const fs::path& model_path, std::size_t top_n, std::size_t top_words, const fs::path& out_path,
               std::ostream& out) {
    const TrainedModel model = load_checkpoint(model_path);
    const std::size_t A = model.author_names.size();
    std::vector<std::vector<std::size_t>> papers(A);
    for (std::size_t i = 0; i < model.doc_authors.size(); ++i)
        for (std::size_t a : model.doc_authors[i]) papers[a].push_back(i);
    std::vector<int> h(A);
    std::vector<std::size_t> cites(A, 0);
    for (std::size_t a = 0; a < A; ++a) {
        std::vector<std::size_t> counts;
        for (std::size_t d : papers[a]) counts.push_back(model.doc_citations[d]);
        for (std::size_t c : counts) cites[a] += c;
        h[a] = h_index(counts);
    }
    const Matrix beta = model.beta();

    emit(out_path, out, [&](std::ostream& s) {
        s << std::fixed << std::setprecision(6);
        for (Eigen::Index k = 0; k < model.authors.eta.cols(); ++k) {
            std::vector<std::size_t> words(beta.cols());
            for (std::size_t v = 0; v < words.size(); ++v) words[v] = v;
            std::stable_sort(words.begin(), words.end(), [&](std::size_t x, std::size_t y) {
                return beta(k, static_cast<Eigen::Index>(x)) > beta(k, static_cast<Eigen::Index>(y));
            });
            s << "# topic " << k + 1 << '\n' << "# top words";
            for (std::size_t n = 0; n < std::min(top_words, words.size()); ++n) s << ' ' << model.vocabulary[words[n]];
            s << '\n';

            std::vector<std::size_t> order(A);
            for (std::size_t a = 0; a < A; ++a) order[a] = a;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                return model.authors.eta(static_cast<Eigen::Index>(x), k) >
                       model.authors.eta(static_cast<Eigen::Index>(y), k);
            });
            s << "rank\tauthor\ttopical_authority\th_index\tcites\tpapers\n";
            for (std::size_t r = 0; r < std::min(top_n, A); ++r) {
                const std::size_t a = order[r];
                s << r + 1 << '\t' << model.author_names[a] << '\t'
                  << model.authors.eta(static_cast<Eigen::Index>(a), k) << '\t' << h[a] << '\t' << cites[a] << '\t'
                  << papers[a].size() << '\n';
            }
            s << '\n';
        }
    });
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Topical authority indexing for citation corpora", "ltai"};
    app.require_subcommand(1);

    fs::path stats_dir;
    auto* stats = app.add_subcommand("stats", "Print corpus statistics");
    stats->add_option("--corpus-dir", stats_dir, "Directory with documents/authors/citations.tsv")->required();

    fs::path prep_in, prep_out;
    std::size_t min_count = 4;
    auto* prepare = app.add_subcommand("prepare", "Lowercase tokens and drop rare terms");
    prepare->add_option("--corpus-dir", prep_in)->required();
    prepare->add_option("--out", prep_out)->required();
    prepare->add_option("--min-count", min_count, "Minimum corpus frequency")->capture_default_str();

    GenerativeConfig gen;
    fs::path gen_out;
    auto* generate = app.add_subcommand("generate", "Sample a synthetic corpus with known parameters");
    generate->add_option("--topics", gen.topics)->capture_default_str();
    generate->add_option("--docs", gen.docs)->capture_default_str();
    generate->add_option("--authors", gen.authors)->capture_default_str();
    generate->add_option("--vocab", gen.vocab)->capture_default_str();
    generate->add_option("--doc-length", gen.doc_length, "Mean document length")->capture_default_str();
    generate->add_option("--min-authors", gen.min_authors_per_doc)->capture_default_str();
    generate->add_option("--max-authors", gen.max_authors_per_doc)->capture_default_str();
    generate->add_option("--alpha-theta", gen.alpha_theta)->capture_default_str();
    generate->add_option("--alpha-beta", gen.alpha_beta)->capture_default_str();
    generate->add_option("--alpha-eta", gen.alpha_eta)->capture_default_str();
    generate->add_option("--link-rate", gen.link_rate)->capture_default_str();
    generate->add_option("--seed", gen.seed)->capture_default_str();
    generate->add_option("--out", gen_out)->required();

    TrainArgs ta;
    auto& cfg = ta.config;
    auto* train_cmd = app.add_subcommand("train", "Fit a model and write a checkpoint");
    train_cmd->add_option("--corpus-dir", ta.corpus_dir)->required();
    train_cmd->add_option("--out", ta.out)->capture_default_str();
    train_cmd->add_option("--topics", cfg.hyper.topics)->capture_default_str();
    auto* c_pos = train_cmd->add_option("--c-pos", cfg.hyper.c_plus, "Precision of observed links")->capture_default_str();
    auto* c_neg = train_cmd->add_option("--c-neg", cfg.hyper.c_minus, "Precision of unobserved links")->capture_default_str();
    train_cmd->add_option("--alpha-theta", cfg.hyper.alpha_theta)->capture_default_str();
    train_cmd->add_option("--alpha-beta", cfg.hyper.alpha_beta)->capture_default_str();
    train_cmd->add_option("--alpha-eta", cfg.hyper.alpha_eta)->capture_default_str();
    train_cmd->add_option("--sv", cfg.hyper.sv, "Negative partners sampled per document")->capture_default_str();
    train_cmd->add_option("--se", cfg.hyper.se, "Negative pairs sampled per author")->capture_default_str();
    train_cmd->add_option("--ss", cfg.hyper.ss, "Documents per minibatch")->capture_default_str();
    train_cmd->add_option("--sa", cfg.hyper.sa, "Authors per minibatch")->capture_default_str();
    train_cmd->add_option("--tau0", cfg.rate.tau0)->capture_default_str();
    train_cmd->add_option("--kappa", cfg.rate.kappa)->capture_default_str();
    train_cmd->add_option("--max-iters", cfg.max_iters)->capture_default_str();
    train_cmd->add_option("--eval-every", cfg.eval_every)->capture_default_str();
    train_cmd->add_option("--tolerance", cfg.tolerance)->capture_default_str();
    train_cmd->add_option("--patience", cfg.patience)->capture_default_str();
    train_cmd->add_option("--doc-passes", cfg.doc_passes)->capture_default_str();
    train_cmd->add_option("--eval-passes", cfg.eval_passes)->capture_default_str();
    train_cmd->add_option("--sep-author-iters", cfg.sep_author_iters)->capture_default_str();
    train_cmd->add_option("--seed", cfg.seed)->capture_default_str();
    train_cmd->add_flag("--deterministic", ta.deterministic, "Omit wall-clock fields from the metrics log");
    train_cmd->add_flag("--plain-lda", ta.plain_lda, "Ignore citations and authors");
    train_cmd->add_flag("--constant-c", ta.constant_c, "Use --c-neg for both observed and unobserved links");
    train_cmd->add_flag("--separate", ta.separate, "Fit topics first, then authority on frozen topics");
    train_cmd->add_flag("--batch", cfg.batch, "Full-batch updates");
    train_cmd->add_flag("--exact-pi", cfg.exact_pi, "Exact author mixture averages");
    train_cmd->add_option("--corrupt-percent", cfg.corrupt_percent, "Percent of links displaced before training")
        ->check(CLI::Range(0.0, 100.0));
    train_cmd->add_option("--holdout", ta.holdout, "Prediction task to hold out")
        ->check(CLI::IsMember({"none", "words", "citations", "authors"}))
        ->capture_default_str();
    train_cmd->add_option("--test-fraction", ta.test_fraction)->capture_default_str();
    train_cmd->add_option("--word-holdout-fraction", ta.word_fraction)->capture_default_str();
    train_cmd->add_option("--resume", ta.resume, "Continue from a checkpoint");

    EvalArgs ea;
    auto* eval = app.add_subcommand("evaluate", "Score a trained model on its held-out targets");
    eval->add_option("--task", ea.task)->required()->check(CLI::IsMember({"words", "citations", "authors"}));
    eval->add_option("--model", ea.model)->required();
    eval->add_option("--corpus-dir", ea.corpus_dir, "Training corpus (default: <model dir>/train_corpus)");
    eval->add_option("--targets", ea.targets, "Targets file (default: <model dir>/targets.tsv)");
    eval->add_option("--baseline", ea.baseline, "Author task authority source")
        ->check(CLI::IsMember({"none", "h-index"}))
        ->capture_default_str();
    eval->add_option("--passes", ea.passes, "Refit passes for held-out words")->capture_default_str();
    eval->add_option("--out", ea.out, "Report file (default: stdout)");

    fs::path report_model, report_out;
    std::size_t top_n = 10, top_words = 10;
    auto* report = app.add_subcommand("report", "Per-topic author authority tables");
    report->add_option("--model", report_model)->required();
    report->add_option("--top-n", top_n)->capture_default_str();
    report->add_option("--top-words", top_words)->capture_default_str();
    report->add_option("--out", report_out);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*stats) return cmd_stats(stats_dir, out, err);
        if (*prepare) return cmd_prepare(prep_in, prep_out, min_count, err);
        if (*generate) return cmd_generate(gen, gen_out);
        if (*train_cmd) return cmd_train(ta, c_pos->count() > 0, c_neg->count() > 0, out, err);
        if (*eval) {
            if (ea.baseline != "none" && ea.task != "authors")
                throw InvalidArgument("--baseline applies to --task authors only");
            return cmd_evaluate(ea, out, err);
        }
        if (*report) return cmd_report(report_model, top_n, top_words, report_out, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace ltai::cli
