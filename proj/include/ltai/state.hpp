#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ltai/corpus.hpp"

namespace ltai {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kParamFloor = 1e-100;
inline constexpr double kPiFloor = 1e-8;

struct HyperParams {
    std::size_t topics = 10;
    double alpha_theta = 1.0;
    double alpha_beta = 0.1;
    double alpha_eta = 1.0;
    double c_plus = 1000.0;
    double c_minus = 1.0;
    std::size_t sv = 500;  // negative partners per document update
    std::size_t se = 500;  // negative rows per author M-step
    std::size_t ss = 500;  // documents per minibatch
    std::size_t sa = 500;  // authors per iteration

    // Checks positivity and c_plus > c_minus.
    void validate() const;

    double precision(bool linked) const { return linked ? c_plus : c_minus; }
};

// rho_t = (tau0 + t)^(-kappa)
struct LearningRate {
    double tau0 = 64.0;
    double kappa = 0.7;

    void validate() const;
    double rho(std::uint64_t t) const;
};

// Variational parameters for the content side of the model.
struct VariationalState {
    Matrix gamma;    // D x K, doc-topic Dirichlet
    Matrix lambda;   // K x V, topic-word Dirichlet
    Matrix phi_bar;  // D x K, mean per-word responsibilities

    std::size_t num_docs() const { return static_cast<std::size_t>(gamma.rows()); }
    std::size_t topics() const { return static_cast<std::size_t>(gamma.cols()); }
};

struct AuthorState {
    Matrix eta;                           // A x K topical authority
    std::vector<std::vector<double>> pi;  // per doc, aligned with AuthorTable::authors_of

    // pi_i floored at kPiFloor and renormalized.
    std::vector<double> prior(std::size_t doc) const;
};

// Read-only view over everything a link term needs.
struct LinkView {
    const CitationGraph& graph;
    const AuthorTable& authors;
    const Matrix& phi_bar;
    const AuthorState& author_state;
    double c_plus;
    double c_minus;

    double precision(bool linked) const { return linked ? c_plus : c_minus; }
};

}  // namespace ltai
