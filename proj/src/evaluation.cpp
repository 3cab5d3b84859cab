#include "ltai/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>

#include "ltai/author_inference.hpp"
#include "ltai/content_inference.hpp"
#include "ltai/error.hpp"

namespace ltai {

void write_eval_report(const EvalReport& report, std::ostream& out) {
    out << "# task\t" << report.task << '\n';
    for (const auto& [key, value] : report.config) out << "# " << key << '\t' << value << '\n';
    out << std::setprecision(17);
    for (const auto& [id, value] : report.items) out << id << '\t' << value << '\n';
    for (const auto& id : report.skipped) out << "# skipped\t" << id << '\n';
    out << "# items\t" << report.items.size() << '\n';
    out << "# " << report.aggregate_name << '\t' << report.aggregate << '\n';
}

double word_log_predictive(const Vector& theta_bar, const Matrix& beta_bar, std::span<const TokenId> heldout) {
    if (heldout.empty()) throw InvalidArgument("word_log_predictive: empty holdout");
    double total = 0.0;
    for (TokenId w : heldout) total += std::log(theta_bar.dot(beta_bar.col(w)));
    return total / static_cast<double>(heldout.size());
}

Vector refit_theta(const TrainedModel& model, const Corpus& corpus, std::size_t doc,
                   std::span<const TokenId> observed, int passes) {
    const auto K = static_cast<Eigen::Index>(model.hyper.topics);
    const Matrix elog_beta = dirichlet_expectation_by_word(model.content.lambda);
    const double n = static_cast<double>(observed.size());
    const Vector gamma0 = Vector::Constant(K, model.hyper.alpha_theta + n / static_cast<double>(K));
    const Vector phi0 = Vector::Constant(K, 1.0 / static_cast<double>(K));

    const LinkView view{corpus.graph, corpus.authors, model.content.phi_bar, model.authors, model.hyper.c_plus,
                        model.hyper.c_minus};
    DocumentLinks links;
    if (model.uses_links()) {
        links.view = &view;
        Rng in_rng = make_rng(model.seed, Stream::Evaluation, doc, 0);
        Rng out_rng = make_rng(model.seed, Stream::Evaluation, doc, 1);
        links.incoming = sample_negatives(corpus.graph, doc, Direction::Incoming, model.hyper.sv, in_rng);
        links.outgoing = sample_negatives(corpus.graph, doc, Direction::Outgoing, model.hyper.sv, out_rng);
    }
    const DocumentFit fit = fit_document(doc, observed, gamma0, phi0, elog_beta, links, model.hyper.alpha_theta, passes);
    return fit.gamma / fit.gamma.sum();
}

double word_log_predictive(const TrainedModel& model, const Corpus& corpus, std::size_t doc,
                           std::span<const TokenId> observed, std::span<const TokenId> heldout, int passes) {
    if (heldout.empty()) throw InvalidArgument("word_log_predictive: empty holdout");
    const Vector theta = refit_theta(model, corpus, doc, observed, passes);
    return word_log_predictive(theta, model.beta(), heldout);
}

double average_rank(std::span<const double> scores, std::size_t target) {
    const double s = scores[target];
    std::size_t better = 0;
    std::size_t ties = 0;
    for (double v : scores) {
        if (v > s) ++better;
        else if (v == s) ++ties;
    }
    return 1.0 + static_cast<double>(better) + static_cast<double>(ties - 1) / 2.0;
}

double citation_log_score(const TrainedModel& model, const AuthorTable& authors, const CitationGraph& graph,
                          std::size_t cited, std::size_t citing) {
    const auto& as = authors.authors_of(cited);
    if (as.empty()) return -std::numeric_limits<double>::infinity();
    const double c = model.hyper.c_plus;
    const LinkView view{graph, authors, model.content.phi_bar, model.authors, c, model.hyper.c_minus};
    const auto resp = e_step_pi(view, cited, citing, 1.0, c);
    auto phi_i = model.content.phi_bar.row(static_cast<Eigen::Index>(cited));
    auto phi_j = model.content.phi_bar.row(static_cast<Eigen::Index>(citing));
    const double log_norm = 0.5 * std::log(c / (2.0 * std::numbers::pi));
    std::vector<double> terms;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < as.size(); ++idx) {
        auto eta = model.authors.eta.row(static_cast<Eigen::Index>(as[idx]));
        const double r = (eta.array() * phi_i.array() * phi_j.array()).sum();
        const double t = std::log(resp[idx]) + log_norm + log_link_kernel(1.0, r, c);
        terms.push_back(t);
        top = std::max(top, t);
    }
    if (!std::isfinite(top)) return top;
    double total = 0.0;
    for (double t : terms) total += std::exp(t - top);
    return top + std::log(total);
}

std::vector<std::size_t> citation_candidates(const CitationGraph& graph, std::size_t cited) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < graph.num_docs(); ++j)
        if (j != cited && !graph.linked(cited, j)) out.push_back(j);
    return out;
}

RankResult citation_rank(const TrainedModel& model, const Corpus& corpus, const Link& removed,
                         std::span<const std::size_t> candidates) {
    auto it = std::find(candidates.begin(), candidates.end(), removed.citing);
    if (it == candidates.end()) throw InvalidArgument("citation_rank: true citing document is not a candidate");
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (std::size_t j : candidates)
        scores.push_back(citation_log_score(model, corpus.authors, corpus.graph, removed.cited, j));
    RankResult r;
    r.target = corpus.documents[removed.cited].id + "<-" + corpus.documents[removed.citing].id;
    r.rank = average_rank(scores, static_cast<std::size_t>(it - candidates.begin()));
    r.candidates = candidates.size();
    return r;
}

double author_log_score(const Matrix& phi_bar, const Eigen::Ref<const Vector>& authority, std::size_t doc,
                        std::span<const std::size_t> citing, double c_plus) {
    const double log_norm = 0.5 * std::log(c_plus / (2.0 * std::numbers::pi));
    auto phi_i = phi_bar.row(static_cast<Eigen::Index>(doc));
    double total = 0.0;
    for (std::size_t j : citing) {
        auto phi_j = phi_bar.row(static_cast<Eigen::Index>(j));
        const double r = (authority.transpose().array() * phi_i.array() * phi_j.array()).sum();
        total += log_norm + log_link_kernel(1.0, r, c_plus);
    }
    return total;
}

RankResult author_rank(const Matrix& phi_bar, const Matrix& authority, std::size_t doc,
                       std::span<const std::size_t> citing, std::size_t true_author,
                       std::span<const std::size_t> candidates, double c_plus) {
    if (citing.empty()) throw InvalidArgument("author_rank: empty citing set");
    auto it = std::find(candidates.begin(), candidates.end(), true_author);
    if (it == candidates.end()) throw InvalidArgument("author_rank: true author is not a candidate");
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (std::size_t a : candidates)
        scores.push_back(author_log_score(phi_bar, authority.row(static_cast<Eigen::Index>(a)).transpose(), doc,
                                          citing, c_plus));
    RankResult r;
    r.rank = average_rank(scores, static_cast<std::size_t>(it - candidates.begin()));
    r.candidates = candidates.size();
    return r;
}

double mrr(std::span<const double> ranks) {
    if (ranks.empty()) throw InvalidArgument("mrr: empty rank list");
    double total = 0.0;
    for (double r : ranks) {
        if (!(r >= 1.0)) throw InvalidArgument("mrr: ranks must be >= 1");
        total += 1.0 / r;
    }
    return total / static_cast<double>(ranks.size());
}

int h_index(std::vector<std::size_t> citation_counts) {
    std::sort(citation_counts.begin(), citation_counts.end(), std::greater<>());
    int h = 0;
    while (static_cast<std::size_t>(h) < citation_counts.size() &&
           citation_counts[static_cast<std::size_t>(h)] >= static_cast<std::size_t>(h + 1))
        ++h;
    return h;
}

IntMatrix topical_h_index(const Matrix& theta_bar, const Corpus& corpus) {
    const auto K = theta_bar.cols();
    const std::size_t A = corpus.num_authors();
    std::vector<Eigen::Index> cluster(corpus.num_docs());
    for (std::size_t i = 0; i < corpus.num_docs(); ++i)
        theta_bar.row(static_cast<Eigen::Index>(i)).maxCoeff(&cluster[i]);

    IntMatrix h = IntMatrix::Zero(static_cast<Eigen::Index>(A), K);
    std::vector<std::vector<std::size_t>> per_topic(static_cast<std::size_t>(K));
    for (std::size_t a = 0; a < A; ++a) {
        for (auto& v : per_topic) v.clear();
        for (std::size_t d : corpus.authors.docs_of(a))
            per_topic[static_cast<std::size_t>(cluster[d])].push_back(corpus.graph.citers(d).size());
        for (Eigen::Index k = 0; k < K; ++k)
            h(static_cast<Eigen::Index>(a), k) = h_index(per_topic[static_cast<std::size_t>(k)]);
    }
    return h;
}

double random_baseline_mrr(std::span<const std::size_t> candidate_counts) {
    if (candidate_counts.empty()) throw InvalidArgument("random_baseline_mrr: no targets");
    double total = 0.0;
    for (std::size_t n : candidate_counts) {
        double harmonic = 0.0;
        for (std::size_t m = 1; m <= n; ++m) harmonic += 1.0 / static_cast<double>(m);
        total += harmonic / static_cast<double>(n);
    }
    return total / static_cast<double>(candidate_counts.size());
}

}  // namespace ltai
