#include "ltai/generative.hpp"

#include <algorithm>
#include <random>

#include "ltai/error.hpp"
#include "ltai/random.hpp"

namespace ltai {

namespace {

void sample_dirichlet(double alpha, Eigen::Ref<Vector> out, Rng& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    double total = 0.0;
    do {
        total = 0.0;
        for (Eigen::Index k = 0; k < out.size(); ++k) {
            out[k] = gamma(rng);
            total += out[k];
        }
    } while (!(total > 0.0));
    out /= total;
}

std::size_t sample_discrete(const Eigen::Ref<const Vector>& p, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        acc += p[k];
        if (u < acc) return static_cast<std::size_t>(k);
    }
    // Round-off: fall back to the last nonzero entry.
    for (Eigen::Index k = p.size() - 1; k >= 0; --k)
        if (p[k] > 0.0) return static_cast<std::size_t>(k);
    return 0;
}

}  // namespace

void GenerativeConfig::validate() const {
    if (topics == 0 || docs == 0 || authors == 0 || vocab == 0)
        throw InvalidArgument("generative counts must be at least 1");
    if (!(doc_length > 0.0)) throw InvalidArgument("doc_length must be positive");
    if (min_authors_per_doc == 0 || min_authors_per_doc > max_authors_per_doc || max_authors_per_doc > authors)
        throw InvalidArgument("authors per document range is invalid");
    if (!(alpha_theta > 0 && alpha_beta > 0 && alpha_eta > 0))
        throw InvalidArgument("concentrations must be positive");
    if (!(link_rate >= 0.0)) throw InvalidArgument("link_rate must be nonnegative");
}

double link_mean(std::span<const double> eta, std::span<const double> zbar_i, std::span<const double> zbar_j) {
    if (eta.size() != zbar_i.size() || eta.size() != zbar_j.size())
        throw InvalidArgument("link_mean: dimension mismatch");
    double r = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k) r += eta[k] * zbar_i[k] * zbar_j[k];
    return r;
}

std::pair<Corpus, GroundTruth> sample_corpus(const GenerativeConfig& config, const Matrix* eta_override) {
    config.validate();
    const auto K = static_cast<Eigen::Index>(config.topics);
    const auto D = static_cast<Eigen::Index>(config.docs);
    const auto A = static_cast<Eigen::Index>(config.authors);
    const auto V = static_cast<Eigen::Index>(config.vocab);
    Rng rng = make_rng(config.seed, Stream::Generate);

    GroundTruth truth;
    truth.beta.resize(K, V);
    for (Eigen::Index k = 0; k < K; ++k) {
        Vector row(V);
        sample_dirichlet(config.alpha_beta, row, rng);
        truth.beta.row(k) = row.transpose();
    }

    Corpus corpus;
    for (Eigen::Index v = 0; v < V; ++v) corpus.vocabulary.add("w" + std::to_string(v));

    truth.theta.resize(D, K);
    truth.zbar = Matrix::Zero(D, K);
    truth.z.resize(config.docs);
    std::poisson_distribution<int> length(config.doc_length);
    for (Eigen::Index i = 0; i < D; ++i) {
        Vector theta(K);
        sample_dirichlet(config.alpha_theta, theta, rng);
        truth.theta.row(i) = theta.transpose();
        const int N = std::max(1, length(rng));
        Document doc{"d" + std::to_string(i), {}};
        auto& z = truth.z[static_cast<std::size_t>(i)];
        for (int n = 0; n < N; ++n) {
            std::size_t k = sample_discrete(theta, rng);
            std::size_t w = sample_discrete(truth.beta.row(static_cast<Eigen::Index>(k)).transpose(), rng);
            z.push_back(k);
            doc.tokens.push_back(static_cast<TokenId>(w));
            truth.zbar(i, static_cast<Eigen::Index>(k)) += 1.0;
        }
        truth.zbar.row(i) /= static_cast<double>(N);
        corpus.documents.push_back(std::move(doc));
    }

    if (eta_override) {
        if (eta_override->rows() != A || eta_override->cols() != K)
            throw InvalidArgument("eta override has the wrong shape");
        truth.eta = *eta_override;
        // Keep the stream aligned with the non-override path.
        std::normal_distribution<double> discard(0.0, 1.0);
        for (Eigen::Index n = 0; n < A * K; ++n) (void)discard(rng);
    } else {
        truth.eta.resize(A, K);
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(config.alpha_eta));
        for (Eigen::Index a = 0; a < A; ++a)
            for (Eigen::Index k = 0; k < K; ++k) truth.eta(a, k) = normal(rng);
    }

    corpus.authors = AuthorTable(config.docs);
    for (std::size_t a = 0; a < config.authors; ++a) corpus.authors.add_author("a" + std::to_string(a));
    std::uniform_int_distribution<std::size_t> n_authors(config.min_authors_per_doc, config.max_authors_per_doc);
    for (std::size_t i = 0; i < config.docs; ++i) {
        auto picked = sample_without_replacement(config.authors, n_authors(rng), rng);
        std::shuffle(picked.begin(), picked.end(), rng);
        for (std::size_t a : picked) corpus.authors.assign(i, a);
    }

    corpus.graph = CitationGraph(config.docs);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < config.docs; ++i) {
        const auto& as = corpus.authors.authors_of(i);
        std::uniform_int_distribution<std::size_t> pick(0, as.size() - 1);
        auto zi = truth.zbar.row(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < config.docs; ++j) {
            if (i == j) continue;
            const std::size_t a = as[pick(rng)];
            auto zj = truth.zbar.row(static_cast<Eigen::Index>(j));
            auto eta = truth.eta.row(static_cast<Eigen::Index>(a));
            double r = link_mean({eta.data(), config.topics}, {zi.data(), config.topics}, {zj.data(), config.topics});
            double p = std::clamp(config.link_rate * r, 0.0, 1.0);
            if (unif(rng) < p) corpus.graph.add(i, j);
        }
    }

    corpus.validate();
    return {std::move(corpus), std::move(truth)};
}

}  // namespace ltai
