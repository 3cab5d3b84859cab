#include "ltai/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "ltai/author_inference.hpp"
#include "ltai/content_inference.hpp"
#include "ltai/error.hpp"
#include "ltai/evaluation.hpp"
#include "ltai/parallel.hpp"
#include "ltai/random.hpp"

namespace ltai {

std::size_t default_threads() {
    if (const char* env = std::getenv("LTAI_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::Full: return "full";
        case Mode::PlainLda: return "plain_lda";
        case Mode::ConstantC: return "constant_c";
        case Mode::Separate: return "separate";
    }
    return "full";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::Full, Mode::PlainLda, Mode::ConstantC, Mode::Separate})
        if (name == mode_name(m)) return m;
    throw InvalidArgument("unknown mode " + name);
}

Matrix TrainedModel::theta() const {
    Matrix t = content.gamma;
    for (Eigen::Index i = 0; i < t.rows(); ++i) t.row(i) /= t.row(i).sum();
    return t;
}

Matrix TrainedModel::beta() const {
    Matrix b = content.lambda;
    for (Eigen::Index k = 0; k < b.rows(); ++k) b.row(k) /= b.row(k).sum();
    return b;
}

AuthorTable TrainedModel::author_table() const {
    AuthorTable table(doc_authors.size());
    for (const auto& name : author_names) table.add_author(name);
    for (std::size_t i = 0; i < doc_authors.size(); ++i)
        for (std::size_t a : doc_authors[i]) table.assign(i, a);
    return table;
}

void attach_metadata(TrainedModel& model, const Corpus& corpus) {
    model.vocabulary = corpus.vocabulary.terms();
    model.doc_ids.clear();
    model.doc_citations.clear();
    model.doc_authors.clear();
    for (std::size_t i = 0; i < corpus.num_docs(); ++i) {
        model.doc_ids.push_back(corpus.documents[i].id);
        model.doc_authors.push_back(corpus.authors.authors_of(i));
        model.doc_citations.push_back(corpus.graph.citers(i).size());
    }
    model.author_names = corpus.authors.names();
}

void TrainConfig::validate() const {
    hyper.validate();
    rate.validate();
    if (max_iters == 0 || eval_every == 0) throw InvalidArgument("max_iters and eval_every must be positive");
    if (!(tolerance > 0.0) || patience == 0) throw InvalidArgument("tolerance and patience must be positive");
    if (!(corrupt_percent >= 0.0 && corrupt_percent <= 100.0)) throw InvalidArgument("corrupt_percent must lie in [0,100]");
    if (mode != Mode::Full && corrupt_percent > 0.0)
        throw InvalidArgument("link corruption cannot be combined with another ablation mode");
    if (constant_c && mode != Mode::ConstantC) throw InvalidArgument("constant_c requires constant-c mode");
    if (constant_c && !(*constant_c > 0.0)) throw InvalidArgument("constant_c must be positive");
    if (doc_passes <= 0 || eval_passes <= 0) throw InvalidArgument("passes must be positive");
}

HyperParams TrainConfig::effective_hyper(std::size_t num_docs) const {
    HyperParams h = hyper;
    switch (mode) {
        case Mode::PlainLda: h.c_plus = h.c_minus = 0.0; break;
        case Mode::ConstantC: h.c_plus = h.c_minus = constant_c.value_or(hyper.c_minus); break;
        default: break;
    }
    if (batch) {
        h.ss = num_docs;
        h.sv = num_docs;
        h.se = num_docs * num_docs;
        h.sa = std::numeric_limits<std::size_t>::max();  // every author
    }
    return h;
}

TrainedModel initialize_model(const Corpus& corpus, const TrainConfig& config) {
    const std::size_t D = corpus.num_docs();
    const std::size_t V = corpus.vocab_size();
    const std::size_t A = corpus.num_authors();
    const auto K = static_cast<Eigen::Index>(config.hyper.topics);

    TrainedModel model;
    model.hyper = config.effective_hyper(D);
    model.rate = config.rate;
    model.mode = config.mode;
    model.seed = config.seed;
    attach_metadata(model, corpus);

    Rng rng = make_rng(config.seed, Stream::Init);
    std::gamma_distribution<double> noise(100.0, 0.01);
    auto& c = model.content;
    c.gamma.resize(static_cast<Eigen::Index>(D), K);
    c.phi_bar.resize(static_cast<Eigen::Index>(D), K);
    for (std::size_t i = 0; i < D; ++i) {
        const double n = static_cast<double>(corpus.documents[i].tokens.size());
        Vector share(K);
        for (Eigen::Index k = 0; k < K; ++k) share[k] = noise(rng);
        share /= share.sum();
        c.gamma.row(static_cast<Eigen::Index>(i)) = (config.hyper.alpha_theta + n * share.array()).matrix().transpose();
        c.phi_bar.row(static_cast<Eigen::Index>(i)) = share.transpose();
    }
    c.lambda.resize(K, static_cast<Eigen::Index>(V));
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index v = 0; v < static_cast<Eigen::Index>(V); ++v) c.lambda(k, v) = noise(rng);

    std::normal_distribution<double> eta0(0.0, 0.1);
    model.authors.eta.resize(static_cast<Eigen::Index>(A), K);
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(A); ++a)
        for (Eigen::Index k = 0; k < K; ++k) model.authors.eta(a, k) = eta0(rng);
    model.authors.pi.resize(D);
    for (std::size_t i = 0; i < D; ++i) {
        const std::size_t n = corpus.authors.authors_of(i).size();
        model.authors.pi[i].assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    }
    return model;
}

namespace {

void check_finite(const TrainedModel& model) {
    const auto& c = model.content;
    auto where = [&](const char* name) {
        return std::string("non-finite ") + name + " at iteration " + std::to_string(model.iteration);
    };
    if (!c.gamma.allFinite()) throw NumericError(where("gamma"));
    if (!c.lambda.allFinite()) throw NumericError(where("lambda"));
    if (!c.phi_bar.allFinite()) throw NumericError(where("phi_bar"));
    if (!model.authors.eta.allFinite()) throw NumericError(where("eta"));
}

}  // namespace

std::size_t train_iteration(TrainedModel& model, const Corpus& corpus, const TrainConfig& config,
                            bool update_content, bool update_authors) {
    const std::size_t D = corpus.num_docs();
    const std::size_t A = corpus.num_authors();
    const HyperParams& hp = model.hyper;
    const std::uint64_t t = model.iteration + 1;
    const std::size_t threads = std::max<std::size_t>(1, config.threads);
    const bool links = model.uses_links();
    std::size_t updates = 0;

    Matrix counts;
    std::vector<std::size_t> batch;
    if (update_content) {
        Rng batch_rng = make_rng(model.seed, Stream::DocMinibatch, t);
        batch = sample_without_replacement(D, hp.ss, batch_rng);
        const Matrix elog_beta = dirichlet_expectation_by_word(model.content.lambda);
        const Matrix phi_snapshot = model.content.phi_bar;
        const LinkView view{corpus.graph, corpus.authors, phi_snapshot, model.authors, hp.c_plus, hp.c_minus};

        std::vector<DocumentFit> fits(batch.size());
        parallel_for(batch.size(), threads, [&](std::size_t b) {
            const std::size_t i = batch[b];
            DocumentLinks dl;
            if (links) {
                dl.view = &view;
                Rng in_rng = make_rng(model.seed, Stream::NegativeIncoming, t, i);
                Rng out_rng = make_rng(model.seed, Stream::NegativeOutgoing, t, i);
                dl.incoming = sample_negatives(corpus.graph, i, Direction::Incoming, hp.sv, in_rng);
                dl.outgoing = sample_negatives(corpus.graph, i, Direction::Outgoing, hp.sv, out_rng);
            }
            const auto row = static_cast<Eigen::Index>(i);
            fits[b] = fit_document(i, corpus.documents[i].tokens, model.content.gamma.row(row).transpose(),
                                   model.content.phi_bar.row(row).transpose(), elog_beta, dl, hp.alpha_theta,
                                   config.doc_passes);
        });

        counts = Matrix::Zero(model.content.lambda.rows(), model.content.lambda.cols());
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto row = static_cast<Eigen::Index>(batch[b]);
            model.content.gamma.row(row) = fits[b].gamma.transpose();
            model.content.phi_bar.row(row) = fits[b].phi_bar.transpose();
            accumulate_word_counts(fits[b].phi, corpus.documents[batch[b]].tokens, counts);
        }
        updates = batch.size();
    }

    if (update_authors && links && A > 0) {
        Rng author_rng = make_rng(model.seed, Stream::AuthorMinibatch, t);
        const auto sampled = sample_without_replacement(A, hp.sa, author_rng);
        const AuthorState snapshot = model.authors;
        const LinkView view{corpus.graph, corpus.authors, model.content.phi_bar, snapshot, hp.c_plus, hp.c_minus};
        const AuthorStepOptions opts{hp.se, hp.alpha_eta, config.exact_pi || config.batch};

        std::vector<AuthorUpdate> results(sampled.size());
        parallel_for(sampled.size(), threads, [&](std::size_t s) {
            Rng edge_rng = make_rng(model.seed, Stream::EdgeSample, t, sampled[s]);
            Rng pi_rng = make_rng(model.seed, Stream::PiSample, t, sampled[s]);
            results[s] = update_author(view, sampled[s], opts, edge_rng, pi_rng);
        });
        for (const auto& r : results) {
            model.authors.eta.row(static_cast<Eigen::Index>(r.author)) = r.eta.transpose();
            for (const auto& e : r.pi) model.authors.pi[e.doc][e.slot] = e.value;
        }
        normalize_pi(model.authors);
    }

    if (update_content) {
        const double rho = config.batch ? 1.0 : model.rate.rho(t);
        model.content.lambda =
            blend_lambda(model.content.lambda, lambda_hat(counts, hp.alpha_beta, D, batch.size()), rho);
    }

    model.iteration = t;
    model.doc_updates += updates;
    check_finite(model);
    return updates;
}

double heldout_log_predictive(const TrainedModel& model, const Corpus& corpus, const HeldOutWords& monitor,
                              int passes, std::size_t threads) {
    std::vector<double> values(monitor.docs.size());
    parallel_for(monitor.docs.size(), threads, [&](std::size_t n) {
        const std::size_t i = monitor.docs[n];
        values[n] = word_log_predictive(model, corpus, i, corpus.documents[i].tokens, monitor.heldout[n], passes);
    });
    double total = 0.0;
    for (double v : values) total += v;
    return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

namespace {

struct Convergence {
    std::optional<double> last;
    std::size_t streak = 0;

    bool update(double value, double tolerance, std::size_t patience) {
        if (last) {
            const double rel = std::abs(value - *last) / std::max(std::abs(*last), 1e-300);
            streak = rel < tolerance ? streak + 1 : 0;
        }
        last = value;
        return streak >= patience;
    }
};

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& config, const HeldOutWords* monitor,
                  const TrainedModel* resume, const MetricSink& sink) {
    config.validate();
    const Corpus* data = &corpus;
    Corpus corrupted;
    if (config.corrupt_percent > 0.0) {
        corrupted = corrupt_links(corpus, config.corrupt_percent, config.seed);
        data = &corrupted;
    }

    TrainResult result;
    result.model = resume ? *resume : initialize_model(*data, config);
    TrainedModel& model = result.model;
    if (resume) {
        if (model.content.gamma.rows() != static_cast<Eigen::Index>(data->num_docs()) ||
            model.content.lambda.cols() != static_cast<Eigen::Index>(data->vocab_size()))
            throw InvalidArgument("resume model does not match the corpus");
    }

    const auto start = std::chrono::steady_clock::now();
    auto record = [&](std::optional<double> heldout) {
        MetricRecord m;
        m.iteration = model.iteration;
        m.doc_updates = model.doc_updates;
        m.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        m.heldout_log_predictive = heldout;
        result.history.push_back(m);
        if (sink) sink(m);
    };
    auto evaluate = [&]() -> std::optional<double> {
        if (!monitor) return std::nullopt;
        return heldout_log_predictive(model, *data, *monitor, config.eval_passes, config.threads);
    };

    Convergence conv;
    if (!resume) {
        auto v = evaluate();
        record(v);
        if (v) conv.update(*v, config.tolerance, config.patience);
    }

    // Separate mode fits content with the link terms switched off first.
    const Mode content_mode = config.mode == Mode::Separate ? Mode::PlainLda : config.mode;
    const Mode saved_mode = model.mode;
    model.mode = content_mode;
    const bool authors_jointly = content_mode != Mode::PlainLda;

    while (model.iteration < config.max_iters) {
        train_iteration(model, *data, config, true, authors_jointly);
        if (model.iteration % config.eval_every == 0 || model.iteration == config.max_iters) {
            auto v = evaluate();
            record(v);
            if (v && conv.update(*v, config.tolerance, config.patience)) {
                result.converged = true;
                break;
            }
        }
    }
    model.mode = saved_mode;

    if (config.mode == Mode::Separate) {
        for (std::size_t s = 0; s < config.sep_author_iters; ++s) train_iteration(model, *data, config, false, true);
        record(evaluate());
    }
    if (config.corrupt_percent > 0.0) attach_metadata(model, corpus);
    return result;
}

}  // namespace ltai
