#include "ltai/author_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltai/content_inference.hpp"
#include "ltai/error.hpp"

namespace ltai {

namespace {

std::size_t slot_of(const AuthorTable& authors, std::size_t doc, std::size_t a) {
    const auto& as = authors.authors_of(doc);
    return static_cast<std::size_t>(std::find(as.begin(), as.end(), a) - as.begin());
}

// Responsibilities with author `override_author` (if any) using `override_eta`.
std::vector<double> responsibilities(const LinkView& view, std::size_t i, std::size_t j, double x, double c,
                                     std::size_t override_author, const Vector* override_eta) {
    const auto& as = view.authors.authors_of(i);
    if (as.empty()) throw InvalidArgument("e_step_pi: document has no authors");
    const auto prior = view.author_state.prior(i);
    auto phi_i = view.phi_bar.row(static_cast<Eigen::Index>(i));
    auto phi_j = view.phi_bar.row(static_cast<Eigen::Index>(j));
    std::vector<double> logw(as.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < as.size(); ++idx) {
        double r;
        if (override_eta && as[idx] == override_author) {
            r = (override_eta->transpose().array() * phi_i.array() * phi_j.array()).sum();
        } else {
            auto eta = view.author_state.eta.row(static_cast<Eigen::Index>(as[idx]));
            r = (eta.array() * phi_i.array() * phi_j.array()).sum();
        }
        logw[idx] = std::log(prior[idx]) + log_link_kernel(x, r, c);
        top = std::max(top, logw[idx]);
    }
    if (!std::isfinite(top)) throw NumericError("e_step_pi: all author weights vanished");
    double total = 0.0;
    for (double& w : logw) {
        w = std::exp(w - top);
        total += w;
    }
    for (double& w : logw) w /= total;
    return logw;
}

}  // namespace

double log_link_kernel(double x, double r, double c) {
    const double d = x - r;
    return -0.5 * c * d * d;
}

std::vector<double> e_step_pi(const LinkView& view, std::size_t i, std::size_t j, double x, double c) {
    return responsibilities(view, i, j, x, c, 0, nullptr);
}

std::vector<double> e_step_pi(const LinkView& view, std::size_t i, std::size_t j) {
    const bool x = view.graph.linked(i, j);
    return responsibilities(view, i, j, x ? 1.0 : 0.0, view.precision(x), 0, nullptr);
}

std::size_t count_negative_rows(const CitationGraph& graph, const AuthorTable& authors, std::size_t a) {
    std::size_t total = 0;
    for (std::size_t i : authors.docs_of(a)) total += graph.num_docs() - 1 - graph.citers(i).size();
    return total;
}

std::vector<PairRow> sample_negative_rows(const CitationGraph& graph, const AuthorTable& authors,
                                          std::size_t a, std::size_t size, Rng& rng) {
    const auto& docs = authors.docs_of(a);
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    for (std::size_t i : docs) {
        counts.push_back(graph.num_docs() - 1 - graph.citers(i).size());
        total += counts.back();
    }
    const auto ranks = sample_without_replacement(total, size, rng);

    std::vector<PairRow> out;
    out.reserve(ranks.size());
    std::size_t r = 0;
    std::size_t offset = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::vector<std::size_t> local;
        while (r < ranks.size() && ranks[r] < offset + counts[d]) local.push_back(ranks[r++] - offset);
        offset += counts[d];
        if (local.empty()) continue;
        const std::size_t i = docs[d];
        const auto& linked = graph.citers(i);
        std::vector<std::size_t> excluded(linked.begin(), linked.end());
        excluded.insert(std::lower_bound(excluded.begin(), excluded.end(), i), i);
        for (std::size_t j : select_from_complement(excluded, local)) out.push_back({i, j});
    }
    return out;
}

PositiveRows positive_rows(const LinkView& view, std::size_t a) {
    PositiveRows out;
    for (std::size_t i : view.authors.docs_of(a)) {
        const std::size_t slot = slot_of(view.authors, i, a);
        for (std::size_t j : view.graph.citers(i)) {
            out.rows.push_back({i, j});
            out.responsibility.push_back(e_step_pi(view, i, j)[slot]);
        }
    }
    return out;
}

NormalEquations assemble_normal_equations(const Matrix& phi_bar, const PositiveRows& positives,
                                          std::span<const PairRow> negatives, std::size_t d_minus,
                                          double c_plus, double c_minus) {
    const auto K = phi_bar.cols();
    NormalEquations ne{Matrix::Zero(K, K), Vector::Zero(K)};
    Vector row(K);
    for (std::size_t n = 0; n < positives.rows.size(); ++n) {
        const auto& p = positives.rows[n];
        row = (phi_bar.row(static_cast<Eigen::Index>(p.cited)).array() *
               phi_bar.row(static_cast<Eigen::Index>(p.citing)).array()).transpose();
        ne.psi_c_psi.noalias() += c_plus * row * row.transpose();
        ne.psi_c_x.noalias() += (c_plus * positives.responsibility[n]) * row;
    }
    if (d_minus > 0) {
        if (negatives.empty()) throw InvalidArgument("negative row sample must be nonempty");
        Matrix neg = Matrix::Zero(K, K);
        for (const auto& p : negatives) {
            row = (phi_bar.row(static_cast<Eigen::Index>(p.cited)).array() *
                   phi_bar.row(static_cast<Eigen::Index>(p.citing)).array()).transpose();
            neg.noalias() += row * row.transpose();
        }
        ne.psi_c_psi += (c_minus * static_cast<double>(d_minus) / static_cast<double>(negatives.size())) * neg;
    }
    return ne;
}

Vector m_step_eta(const NormalEquations& ne, double alpha_eta) {
    const auto K = ne.psi_c_psi.rows();
    Matrix system = ne.psi_c_psi;
    system.diagonal().array() += alpha_eta;
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) throw NumericError("m_step_eta: Cholesky factorization failed");
    Vector eta = llt.solve(ne.psi_c_x);
    if (!eta.allFinite() || eta.size() != K) throw NumericError("m_step_eta: non-finite solution");
    return eta;
}

double update_pi_prior(std::span<const double> responsibilities, std::size_t denominator) {
    if (denominator == 0) throw InvalidArgument("update_pi_prior: zero denominator");
    double total = 0.0;
    for (double r : responsibilities) total += r;
    return total / static_cast<double>(denominator);
}

AuthorUpdate update_author(const LinkView& view, std::size_t a, const AuthorStepOptions& opts,
                           Rng& edge_rng, Rng& pi_rng) {
    AuthorUpdate out;
    out.author = a;
    const auto& graph = view.graph;
    const std::size_t D = graph.num_docs();

    const PositiveRows positives = positive_rows(view, a);
    const std::size_t d_minus = count_negative_rows(graph, view.authors, a);
    const auto negatives = sample_negative_rows(graph, view.authors, a, opts.se, edge_rng);
    const auto ne = assemble_normal_equations(view.phi_bar, positives, negatives, d_minus, view.c_plus, view.c_minus);
    out.eta = m_step_eta(ne, opts.alpha_eta);

    if (D < 2) return out;
    std::vector<double> resp;
    for (std::size_t i : view.authors.docs_of(a)) {
        const std::size_t slot = slot_of(view.authors, i, a);
        resp.clear();
        for (std::size_t j : graph.citers(i))
            resp.push_back(responsibilities(view, i, j, 1.0, view.c_plus, a, &out.eta)[slot]);

        NegativeSample neg = opts.exact_pi ? NegativeSample{all_negatives(graph, i, Direction::Incoming),
                                                            D - 1 - graph.citers(i).size()}
                                           : sample_negatives(graph, i, Direction::Incoming, opts.se, pi_rng);
        if (neg.total > 0) {
            double neg_sum = 0.0;
            for (std::size_t j : neg.docs)
                neg_sum += responsibilities(view, i, j, 0.0, view.c_minus, a, &out.eta)[slot];
            resp.push_back(neg_sum * static_cast<double>(neg.total) / static_cast<double>(neg.docs.size()));
        }
        out.pi.push_back({i, slot, update_pi_prior(resp, D - 1)});
    }
    return out;
}

void normalize_pi(AuthorState& state) {
    for (std::size_t i = 0; i < state.pi.size(); ++i) {
        if (state.pi[i].empty()) continue;
        state.pi[i] = state.prior(i);
    }
}

}  // namespace ltai
