#include "ltai/content_inference.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>

#include "ltai/error.hpp"

namespace ltai {

void HyperParams::validate() const {
    if (topics == 0) throw InvalidArgument("topic count must be positive");
    if (!(alpha_theta > 0 && alpha_beta > 0 && alpha_eta > 0))
        throw InvalidArgument("Dirichlet and authority priors must be positive");
    if (!(c_minus > 0 && c_plus > c_minus)) throw InvalidArgument("precisions require c_plus > c_minus > 0");
    if (sv == 0 || se == 0 || ss == 0 || sa == 0) throw InvalidArgument("subsample sizes must be positive");
}

void LearningRate::validate() const {
    if (!(tau0 >= 0.0)) throw InvalidArgument("tau0 must be nonnegative");
    if (!(kappa > 0.5 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in (0.5, 1]");
}

double LearningRate::rho(std::uint64_t t) const {
    return std::pow(tau0 + static_cast<double>(t), -kappa);
}

std::vector<double> AuthorState::prior(std::size_t doc) const {
    std::vector<double> p = pi.at(doc);
    double total = 0.0;
    for (double& v : p) {
        v = std::max(v, kPiFloor);
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

Vector dirichlet_expectation(const Vector& params) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < params.size(); ++k) {
        if (!(params[k] > 0.0)) throw InvalidArgument("Dirichlet parameters must be positive");
        total += params[k];
    }
    const double psi_total = boost::math::digamma(total);
    Vector out(params.size());
    for (Eigen::Index k = 0; k < params.size(); ++k) out[k] = boost::math::digamma(params[k]) - psi_total;
    return out;
}

Matrix dirichlet_expectation_by_word(const Matrix& lambda) {
    Matrix out(lambda.cols(), lambda.rows());
    for (Eigen::Index k = 0; k < lambda.rows(); ++k) out.col(k) = dirichlet_expectation(lambda.row(k).transpose());
    return out;
}

namespace {

// sum_a p_a (x - r_a) eta_a, with r_a = sum_k eta_ak u_k v_k
void mixture_residual(const LinkView& view, std::size_t cited, const std::vector<double>& prior,
                      const Vector& phi_cited, const Eigen::Ref<const Vector>& phi_citing, double x,
                      Vector& out) {
    out.setZero();
    const auto& as = view.authors.authors_of(cited);
    for (std::size_t idx = 0; idx < as.size(); ++idx) {
        auto eta = view.author_state.eta.row(static_cast<Eigen::Index>(as[idx])).transpose();
        double r = (eta.array() * phi_cited.array() * phi_citing.array()).sum();
        out.noalias() += (prior[idx] * (x - r)) * eta;
    }
}

}  // namespace

Vector link_grad_incoming(const LinkView& view, std::size_t i, const Vector& phi_i,
                          std::span<const std::size_t> partners, std::size_t n_words) {
    const auto K = phi_i.size();
    Vector grad = Vector::Zero(K);
    if (n_words == 0 || view.authors.anonymous(i)) return grad;
    const auto prior = view.author_state.prior(i);
    Vector resid(K);
    for (std::size_t j : partners) {
        const bool x = view.graph.linked(i, j);
        auto phi_j = view.phi_bar.row(static_cast<Eigen::Index>(j)).transpose();
        mixture_residual(view, i, prior, phi_i, phi_j, x ? 1.0 : 0.0, resid);
        grad.array() += (view.precision(x) / static_cast<double>(n_words)) * phi_j.array() * resid.array();
    }
    return grad;
}

Vector link_grad_outgoing(const LinkView& view, std::size_t i, const Vector& phi_i,
                          std::span<const std::size_t> partners, std::size_t n_words) {
    const auto K = phi_i.size();
    Vector grad = Vector::Zero(K);
    if (n_words == 0) return grad;
    Vector resid(K);
    for (std::size_t j : partners) {
        if (view.authors.anonymous(j)) continue;
        const bool x = view.graph.linked(j, i);
        const auto prior = view.author_state.prior(j);
        Vector phi_j = view.phi_bar.row(static_cast<Eigen::Index>(j)).transpose();
        mixture_residual(view, j, prior, phi_j, phi_i, x ? 1.0 : 0.0, resid);
        grad.array() += (view.precision(x) / static_cast<double>(n_words)) * phi_j.array() * resid.array();
    }
    return grad;
}

Vector noisy_negative_grad(const LinkView& view, std::size_t i, const Vector& phi_i, Direction dir,
                           std::span<const std::size_t> sample, std::size_t d_minus, std::size_t n_words) {
    if (d_minus == 0) return Vector::Zero(phi_i.size());
    if (sample.empty()) throw InvalidArgument("negative sample size must be positive");
    Vector g = dir == Direction::Incoming ? link_grad_incoming(view, i, phi_i, sample, n_words)
                                          : link_grad_outgoing(view, i, phi_i, sample, n_words);
    return (static_cast<double>(d_minus) / static_cast<double>(sample.size())) * g;
}

std::vector<std::size_t> all_negatives(const CitationGraph& graph, std::size_t i, Direction dir) {
    const auto& linked = dir == Direction::Incoming ? graph.citers(i) : graph.references(i);
    std::vector<std::size_t> out;
    out.reserve(graph.num_docs());
    auto it = linked.begin();
    for (std::size_t j = 0; j < graph.num_docs(); ++j) {
        while (it != linked.end() && *it < j) ++it;
        if (j == i || (it != linked.end() && *it == j)) continue;
        out.push_back(j);
    }
    return out;
}

NegativeSample sample_negatives(const CitationGraph& graph, std::size_t i, Direction dir,
                                std::size_t size, Rng& rng) {
    const auto& linked = dir == Direction::Incoming ? graph.citers(i) : graph.references(i);
    NegativeSample out;
    out.total = graph.num_docs() - 1 - linked.size();
    if (size >= out.total) {
        out.docs = all_negatives(graph, i, dir);
        return out;
    }
    std::vector<std::size_t> excluded(linked.begin(), linked.end());
    excluded.insert(std::lower_bound(excluded.begin(), excluded.end(), i), i);
    out.docs = select_from_complement(excluded, sample_without_replacement(out.total, size, rng));
    return out;
}

Vector update_phi_word(const Vector& link_grad, const Vector& elog_theta,
                       const Eigen::Ref<const Vector>& elog_beta_word) {
    Vector score = link_grad + elog_theta + elog_beta_word;
    const double top = score.maxCoeff();
    score = (score.array() - top).exp();
    score /= score.sum();
    return score;
}

Vector update_gamma(const Matrix& phi, double alpha_theta, std::size_t topics) {
    Vector gamma = Vector::Constant(static_cast<Eigen::Index>(topics), alpha_theta);
    if (phi.rows() > 0) gamma += phi.colwise().sum().transpose();
    return gamma.cwiseMax(kParamFloor);
}

void accumulate_word_counts(const Matrix& phi, std::span<const TokenId> tokens, Matrix& counts) {
    for (std::size_t n = 0; n < tokens.size(); ++n)
        counts.col(tokens[n]) += phi.row(static_cast<Eigen::Index>(n)).transpose();
}

Matrix lambda_hat(const Matrix& counts, double alpha_beta, std::size_t num_docs, std::size_t batch_size) {
    if (batch_size == 0) throw InvalidArgument("empty minibatch");
    const double scale = static_cast<double>(num_docs) / static_cast<double>(batch_size);
    return (scale * counts.array() + alpha_beta).matrix();
}

Matrix blend_lambda(const Matrix& lambda_prev, const Matrix& lambda_hat, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("learning rate must lie in (0,1]");
    return ((1.0 - rho) * lambda_prev + rho * lambda_hat).cwiseMax(kParamFloor);
}

double elbo_link_term(const LinkView& view, std::size_t i, std::size_t j) {
    if (view.authors.anonymous(i)) return 0.0;
    const bool x = view.graph.linked(i, j);
    const double c = view.precision(x);
    const auto prior = view.author_state.prior(i);
    const auto& as = view.authors.authors_of(i);
    auto phi_i = view.phi_bar.row(static_cast<Eigen::Index>(i));
    auto phi_j = view.phi_bar.row(static_cast<Eigen::Index>(j));
    const double log_norm = 0.5 * std::log(c / (2.0 * std::numbers::pi));
    double total = 0.0;
    for (std::size_t idx = 0; idx < as.size(); ++idx) {
        auto eta = view.author_state.eta.row(static_cast<Eigen::Index>(as[idx]));
        double r = (eta.array() * phi_i.array() * phi_j.array()).sum();
        double resid = (x ? 1.0 : 0.0) - r;
        total += prior[idx] * (log_norm - 0.5 * c * resid * resid);
    }
    return total;
}

double elbo_link_total(const LinkView& view) {
    double total = 0.0;
    const std::size_t D = view.graph.num_docs();
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            if (i != j) total += elbo_link_term(view, i, j);
    return total;
}

Vector document_link_gradient(std::size_t i, const Vector& phi_i, std::size_t n_words,
                              const DocumentLinks& links) {
    Vector g = Vector::Zero(phi_i.size());
    if (links.view == nullptr || n_words == 0) return g;
    const LinkView& view = *links.view;
    g += link_grad_incoming(view, i, phi_i, view.graph.citers(i), n_words);
    g += link_grad_outgoing(view, i, phi_i, view.graph.references(i), n_words);
    g += noisy_negative_grad(view, i, phi_i, Direction::Incoming, links.incoming.docs, links.incoming.total, n_words);
    g += noisy_negative_grad(view, i, phi_i, Direction::Outgoing, links.outgoing.docs, links.outgoing.total, n_words);
    return g;
}

DocumentFit fit_document(std::size_t i, std::span<const TokenId> tokens, const Vector& gamma_init,
                         const Vector& phi_bar_init, const Matrix& elog_beta, const DocumentLinks& links,
                         double alpha_theta, int passes) {
    const auto K = gamma_init.size();
    const std::size_t N = tokens.size();
    DocumentFit fit{gamma_init, phi_bar_init, Matrix(static_cast<Eigen::Index>(N), K)};
    if (N == 0) {
        fit.gamma = Vector::Constant(K, alpha_theta);
        return fit;
    }
    for (int pass = 0; pass < passes; ++pass) {
        const Vector grad = document_link_gradient(i, fit.phi_bar, N, links);
        const Vector elog_theta = dirichlet_expectation(fit.gamma);
        for (std::size_t n = 0; n < N; ++n)
            fit.phi.row(static_cast<Eigen::Index>(n)) =
                update_phi_word(grad, elog_theta, elog_beta.row(tokens[n]).transpose()).transpose();
        fit.gamma = update_gamma(fit.phi, alpha_theta, static_cast<std::size_t>(K));
        fit.phi_bar = fit.phi.colwise().sum().transpose() / static_cast<double>(N);
    }
    return fit;
}

}  // namespace ltai
