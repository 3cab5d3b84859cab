#pragma once

#include <span>
#include <vector>

#include "ltai/random.hpp"
#include "ltai/state.hpp"

namespace ltai {

/// psi(params_k) - psi(sum params). Throws InvalidArgument on a nonpositive entry.
Vector dirichlet_expectation(const Vector& params);

/// Row-wise dirichlet_expectation of a K x V topic-word matrix, returned
/// transposed (V x K) so a word's column is contiguous.
Matrix dirichlet_expectation_by_word(const Matrix& lambda);

enum class Direction { Incoming, Outgoing };

/// Gradient of the incoming link terms x_{i<-j}, j in `partners`, with
/// respect to phi_{in} (all topics at once; the per-word gradient carries
/// the 1/N_i factor).
///
///   sum_j (phi_bar_j * c_{i<-j} / N_i) * sum_{a in A_i} eta_a (x_{i<-j} - r_a) p(a|pi_i)
///
/// `phi_i` is document i's current mean responsibility; partners are read
/// from the view. Anonymous documents have no incoming terms.
Vector link_grad_incoming(const LinkView& view, std::size_t i, const Vector& phi_i,
                          std::span<const std::size_t> partners, std::size_t n_words);

/// Mirror of link_grad_incoming over terms x_{j<-i}: authors and pi come
/// from the cited document j.
Vector link_grad_outgoing(const LinkView& view, std::size_t i, const Vector& phi_i,
                          std::span<const std::size_t> partners, std::size_t n_words);

/// (d_minus / |sample|) * sum over sampled negative partners.
Vector noisy_negative_grad(const LinkView& view, std::size_t i, const Vector& phi_i, Direction dir,
                           std::span<const std::size_t> sample, std::size_t d_minus, std::size_t n_words);

struct NegativeSample {
    std::vector<std::size_t> docs;
    std::size_t total = 0;  // number of negative partners in that direction
};

/// Uniform sample of at most `size` partners j != i with no link in `dir`.
NegativeSample sample_negatives(const CitationGraph& graph, std::size_t i, Direction dir,
                                std::size_t size, Rng& rng);

/// Documents j != i with no link to i in direction `dir`, ascending.
std::vector<std::size_t> all_negatives(const CitationGraph& graph, std::size_t i, Direction dir);

/// phi_{ink} proportional to exp(link_grad_k + E[log theta_ik] + E[log beta_{k,w}]),
/// normalized with max subtraction.
Vector update_phi_word(const Vector& link_grad, const Vector& elog_theta,
                       const Eigen::Ref<const Vector>& elog_beta_word);

/// gamma_i = alpha_theta + sum_n phi_n, where phi is N x K.
Vector update_gamma(const Matrix& phi, double alpha_theta, std::size_t topics);

/// Expected topic-word counts of one document: K x V contribution sum_n phi_nk * onehot(w_n).
void accumulate_word_counts(const Matrix& phi, std::span<const TokenId> tokens, Matrix& counts);

/// lambda_hat = alpha_beta + (num_docs / batch_size) * counts. Throws on an empty minibatch.
Matrix lambda_hat(const Matrix& counts, double alpha_beta, std::size_t num_docs, std::size_t batch_size);

/// (1 - rho) * prev + rho * hat, floored at kParamFloor.
Matrix blend_lambda(const Matrix& lambda_prev, const Matrix& lambda_hat, double rho);

/// Jensen-bounded, Taylor-approximated log-likelihood of the pair x_{i<-j}:
///   sum_{a in A_i} p(a|pi_i) log N(x_{i<-j} | phi_i' diag(eta_a) phi_j, 1/c)
/// Zero for an anonymous cited document.
double elbo_link_term(const LinkView& view, std::size_t i, std::size_t j);

/// Sum of elbo_link_term over all ordered pairs i != j.
double elbo_link_total(const LinkView& view);

struct DocumentFit {
    Vector gamma;
    Vector phi_bar;
    Matrix phi;  // N x K, last pass
};

/// Link partners used while fitting one document.
struct DocumentLinks {
    const LinkView* view = nullptr;  // nullptr drops every link term
    NegativeSample incoming;
    NegativeSample outgoing;
};

/// Runs `passes` sweeps over document i. Each sweep computes the link
/// gradient once from the current phi_bar_i, updates every phi_in, then
/// gamma_i and phi_bar_i.
DocumentFit fit_document(std::size_t i, std::span<const TokenId> tokens, const Vector& gamma_init,
                         const Vector& phi_bar_init, const Matrix& elog_beta, const DocumentLinks& links,
                         double alpha_theta, int passes);

/// The summed link gradient a sweep would use; exposed for tests.
Vector document_link_gradient(std::size_t i, const Vector& phi_i, std::size_t n_words,
                              const DocumentLinks& links);

}  // namespace ltai
