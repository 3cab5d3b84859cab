#pragma once

#include <span>
#include <vector>

#include "ltai/corpus.hpp"
#include "ltai/random.hpp"
#include "ltai/state.hpp"

namespace ltai {

struct NormalEquations {
    Matrix psi_c_psi;  // K x K, Psi' C Psi
    Vector psi_c_x;    // K, Psi' C X
};

/// A cited/citing pair as a row of Psi_a.
struct PairRow {
    std::size_t cited;
    std::size_t citing;
};

/// Log Gaussian kernel -c/2 (x - r)^2; the normalizer is shared across the
/// authors of one pair and cancels in every ratio taken here.
double log_link_kernel(double x, double r, double c);

/// Responsibilities of the authors of cited document i for the pair
/// x_{i<-j} = x under precision c:
///   pi_{i<-ja} ∝ pi_ia N(x | phi_i' diag(eta_a) phi_j, 1/c)
/// computed in log space. Throws NumericError if no author keeps mass.
std::vector<double> e_step_pi(const LinkView& view, std::size_t i, std::size_t j, double x, double c);

/// Same, with the observed x_{i<-j} and its precision.
std::vector<double> e_step_pi(const LinkView& view, std::size_t i, std::size_t j);

/// Negative rows of author a: pairs (i in D_a, j) with x_{i<-j} = 0, j != i.
std::size_t count_negative_rows(const CitationGraph& graph, const AuthorTable& authors, std::size_t a);

/// Uniform subset of size min(size, total) of author a's negative rows.
std::vector<PairRow> sample_negative_rows(const CitationGraph& graph, const AuthorTable& authors,
                                          std::size_t a, std::size_t size, Rng& rng);

/// Positive rows of author a with their responsibilities pi_{i<-ja}.
struct PositiveRows {
    std::vector<PairRow> rows;
    std::vector<double> responsibility;
};

PositiveRows positive_rows(const LinkView& view, std::size_t a);

/// Psi'CPsi = c+ Psi+'Psi+ + (c- d_minus / |negatives|) Psi-'Psi-,
/// Psi'CX = c+ Psi+' (pi * x). Rows are phi_bar_i ∘ phi_bar_j.
/// Throws InvalidArgument if negatives is empty while d_minus > 0.
NormalEquations assemble_normal_equations(const Matrix& phi_bar, const PositiveRows& positives,
                                          std::span<const PairRow> negatives, std::size_t d_minus,
                                          double c_plus, double c_minus);

/// eta_a = (Psi'CPsi + alpha_eta I)^{-1} Psi'CX via Cholesky.
Vector m_step_eta(const NormalEquations& ne, double alpha_eta);

/// pi_ia = (sum_j pi_{i<-ja}) / denominator.
double update_pi_prior(std::span<const double> responsibilities, std::size_t denominator);

struct AuthorUpdate {
    std::size_t author = 0;
    Vector eta;
    // (doc, slot in authors_of(doc), new pi entry)
    struct PiEntry {
        std::size_t doc;
        std::size_t slot;
        double value;
    };
    std::vector<PiEntry> pi;
};

struct AuthorStepOptions {
    std::size_t se = 500;
    double alpha_eta = 1.0;
    bool exact_pi = false;  // sum responsibilities over every partner j
};

/// One EM step for author a: E-step on positive pairs, M-step for eta_a,
/// then refreshed responsibilities averaged into pi_ia for each of a's
/// documents. Reads only the view; `edge_rng` draws the M-step negative
/// rows and `pi_rng` the per-document negative partners.
AuthorUpdate update_author(const LinkView& view, std::size_t a, const AuthorStepOptions& opts,
                           Rng& edge_rng, Rng& pi_rng);

/// Floors and renormalizes pi_i for every document.
void normalize_pi(AuthorState& state);

}  // namespace ltai
