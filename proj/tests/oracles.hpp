#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance driver. Each check builds its own fixture from a seed and
// returns the worst discrepancy it saw.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ltai/author_inference.hpp"
#include "ltai/content_inference.hpp"
#include "ltai/evaluation.hpp"
#include "test_util.hpp"

namespace test {

struct LinkFixture {
    ltai::Corpus corpus;
    ltai::Matrix phi_bar;
    ltai::AuthorState state;
    double c_plus = 10.0;
    double c_minus = 1.0;

    ltai::LinkView view() const {
        return {corpus.graph, corpus.authors, phi_bar, state, c_plus, c_minus};
    }
};

inline LinkFixture link_fixture(std::uint64_t seed, std::size_t D, std::size_t K, std::size_t V, std::size_t A,
                                double link_p) {
    LinkFixture f;
    f.corpus = random_corpus(D, V, A, link_p, seed);
    ltai::Rng rng(seed ^ 0x5eedULL);
    f.phi_bar = random_phi_bar(D, K, rng);
    f.state = random_author_state(f.corpus, K, rng);
    return f;
}

// Largest relative error between N_i * (incoming + outgoing link gradient)
// and central differences of the summed link bound in phi_bar(i, k).
inline double gradient_check(std::uint64_t seed, std::size_t D = 10, std::size_t K = 3, std::size_t V = 30) {
    LinkFixture f = link_fixture(seed, D, K, V, 4, 0.2);
    double worst = 0.0;
    const double h = 1e-5;
    for (std::size_t i = 0; i < D; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < D; ++j)
            if (j != i) others.push_back(j);
        const ltai::Vector phi_i = f.phi_bar.row(static_cast<Eigen::Index>(i)).transpose();
        const auto view = f.view();
        const ltai::Vector analytic =
            ltai::link_grad_incoming(view, i, phi_i, others, 1) + ltai::link_grad_outgoing(view, i, phi_i, others, 1);
        for (std::size_t k = 0; k < K; ++k) {
            const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(k);
            const double saved = f.phi_bar(r, c);
            f.phi_bar(r, c) = saved + h;
            const double up = ltai::elbo_link_total(f.view());
            f.phi_bar(r, c) = saved - h;
            const double down = ltai::elbo_link_total(f.view());
            f.phi_bar(r, c) = saved;
            const double fd = (up - down) / (2.0 * h);
            const double a = analytic[c];
            const double scale = std::max({std::abs(a), std::abs(fd), 1e-6});
            worst = std::max(worst, std::abs(a - fd) / scale);
        }
    }
    return worst;
}

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        std::size_t p = k;
        while (p > 0 && idx[p - 1] == n - k + p - 1) --p;
        if (p == 0) return;
        ++idx[p - 1];
        for (std::size_t q = p; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
}

struct EnumerationResult {
    double gradient_error = 0.0;  // mean noisy negative gradient vs exact
    double normal_error = 0.0;    // mean subsampled Psi'CPsi vs exact
    std::size_t subsets = 0;      // subsets enumerated for the gradient of doc 0
};

// D = 6 fixture where doc 0 has no incoming links (5 negative partners).
inline EnumerationResult enumeration_check(std::uint64_t seed, std::size_t sample = 2) {
    const std::size_t D = 6, K = 3;
    LinkFixture f = link_fixture(seed, D, K, 12, 3, 0.3);
    for (std::size_t j = 1; j < D; ++j) f.corpus.graph.remove(0, j);
    const auto view = f.view();
    EnumerationResult res;

    for (auto dir : {ltai::Direction::Incoming, ltai::Direction::Outgoing}) {
        for (std::size_t i = 0; i < D; ++i) {
            const auto negatives = ltai::all_negatives(f.corpus.graph, i, dir);
            if (negatives.size() < sample) continue;
            const ltai::Vector phi_i = f.phi_bar.row(static_cast<Eigen::Index>(i)).transpose();
            const ltai::Vector exact = dir == ltai::Direction::Incoming
                                           ? ltai::link_grad_incoming(view, i, phi_i, negatives, 1)
                                           : ltai::link_grad_outgoing(view, i, phi_i, negatives, 1);
            ltai::Vector mean = ltai::Vector::Zero(static_cast<Eigen::Index>(K));
            std::size_t count = 0;
            for_each_subset(negatives.size(), sample, [&](const std::vector<std::size_t>& idx) {
                std::vector<std::size_t> s;
                for (auto q : idx) s.push_back(negatives[q]);
                mean += ltai::noisy_negative_grad(view, i, phi_i, dir, s, negatives.size(), 1);
                ++count;
            });
            mean /= static_cast<double>(count);
            if (i == 0 && dir == ltai::Direction::Incoming) res.subsets = count;
            res.gradient_error = std::max(res.gradient_error, (mean - exact).cwiseAbs().maxCoeff());
        }
    }

    for (std::size_t a = 0; a < f.corpus.num_authors(); ++a) {
        std::vector<ltai::PairRow> rows;
        for (std::size_t i : f.corpus.authors.docs_of(a))
            for (std::size_t j = 0; j < D; ++j)
                if (j != i && !f.corpus.graph.linked(i, j)) rows.push_back({i, j});
        if (rows.size() < sample) continue;
        const ltai::PositiveRows none;
        const auto exact =
            ltai::assemble_normal_equations(f.phi_bar, none, rows, rows.size(), f.c_plus, f.c_minus).psi_c_psi;
        ltai::Matrix mean = ltai::Matrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
        std::size_t count = 0;
        for_each_subset(rows.size(), sample, [&](const std::vector<std::size_t>& idx) {
            std::vector<ltai::PairRow> s;
            for (auto q : idx) s.push_back(rows[q]);
            mean += ltai::assemble_normal_equations(f.phi_bar, none, s, rows.size(), f.c_plus, f.c_minus).psi_c_psi;
            ++count;
        });
        mean /= static_cast<double>(count);
        res.normal_error = std::max(res.normal_error, (mean - exact).cwiseAbs().maxCoeff());
    }
    return res;
}

// Norm of the gradient of
//   1/2 sum_rows c_r (t_r - psi_r' eta)^2 + alpha/2 |eta|^2
// at the eta returned by m_step_eta, rows enumerated by brute force.
inline double mstep_gradient_norm(std::uint64_t seed) {
    const std::size_t D = 10, K = 3;
    LinkFixture f = link_fixture(seed, D, K, 20, 3, 0.25);
    const auto view = f.view();
    const double alpha = 1.0;
    double worst = 0.0;
    for (std::size_t a = 0; a < f.corpus.num_authors(); ++a) {
        if (f.corpus.authors.docs_of(a).empty()) continue;
        const auto pos = ltai::positive_rows(view, a);
        std::vector<ltai::PairRow> neg;
        for (std::size_t i : f.corpus.authors.docs_of(a))
            for (std::size_t j = 0; j < D; ++j)
                if (j != i && !f.corpus.graph.linked(i, j)) neg.push_back({i, j});
        const auto ne = ltai::assemble_normal_equations(f.phi_bar, pos, neg, neg.size(), f.c_plus, f.c_minus);
        const ltai::Vector eta = ltai::m_step_eta(ne, alpha);

        ltai::Vector grad = alpha * eta;
        auto add_row = [&](std::size_t i, std::size_t j, double c, double target) {
            ltai::Vector psi = (f.phi_bar.row(static_cast<Eigen::Index>(i)).array() *
                                f.phi_bar.row(static_cast<Eigen::Index>(j)).array())
                                   .transpose();
            grad += c * (psi.dot(eta) - target) * psi;
        };
        for (std::size_t n = 0; n < pos.rows.size(); ++n)
            add_row(pos.rows[n].cited, pos.rows[n].citing, f.c_plus, pos.responsibility[n]);
        for (const auto& r : neg) add_row(r.cited, r.citing, f.c_minus, 0.0);
        worst = std::max(worst, grad.norm());
    }
    return worst;
}

// Rank with ties averaged, by sorting rather than counting.
inline double brute_rank(const std::vector<double>& scores, std::size_t target) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
    double first = 0, last = 0;
    bool seen = false;
    for (std::size_t p = 0; p < order.size(); ++p)
        if (scores[order[p]] == scores[target]) {
            if (!seen) first = static_cast<double>(p + 1);
            last = static_cast<double>(p + 1);
            seen = true;
        }
    return (first + last) / 2.0;
}

inline int brute_h_index(const std::vector<std::size_t>& counts) {
    int best = 0;
    for (std::size_t h = 0; h <= counts.size(); ++h) {
        const auto n = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [&](std::size_t c) { return c >= h; }));
        if (n >= h) best = static_cast<int>(h);
    }
    return best;
}

// Number of mismatches between mrr/average_rank and the sorting oracle.
inline std::size_t mrr_oracle_mismatches(std::uint64_t seed, std::size_t instances) {
    ltai::Rng rng(seed);
    std::size_t bad = 0;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t targets = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        std::vector<double> ranks, oracle;
        for (std::size_t q = 0; q < targets; ++q) {
            const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
            std::uniform_int_distribution<int> score(0, 6);  // coarse scores force ties
            std::vector<double> s(n);
            for (auto& x : s) x = score(rng);
            const std::size_t target = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            ranks.push_back(ltai::average_rank(s, target));
            oracle.push_back(brute_rank(s, target));
        }
        double reciprocal = 0.0;
        for (double r : oracle) reciprocal += 1.0 / r;
        if (ranks != oracle || ltai::mrr(ranks) != reciprocal / static_cast<double>(oracle.size())) ++bad;
    }
    return bad;
}

inline std::size_t h_index_oracle_mismatches(std::uint64_t seed, std::size_t instances) {
    ltai::Rng rng(seed);
    std::size_t bad = 0;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 25)(rng);
        std::uniform_int_distribution<std::size_t> c(0, 30);
        std::vector<std::size_t> counts(n);
        for (auto& x : counts) x = c(rng);
        if (ltai::h_index(counts) != brute_h_index(counts)) ++bad;
    }
    return bad;
}

}  // namespace test
