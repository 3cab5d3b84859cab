#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ltai/corpus.hpp"
#include "ltai/state.hpp"

namespace ltai {

struct GenerativeConfig {
    std::size_t topics = 5;
    std::size_t docs = 500;
    std::size_t authors = 50;
    std::size_t vocab = 200;
    double doc_length = 60.0;  // Poisson mean, at least one token per document
    std::size_t min_authors_per_doc = 1;
    std::size_t max_authors_per_doc = 3;
    double alpha_theta = 1.0;
    double alpha_beta = 0.1;
    double alpha_eta = 1.0;
    double link_rate = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GroundTruth {
    Matrix theta;  // D x K
    Matrix beta;   // K x V
    Matrix eta;    // A x K
    Matrix zbar;   // D x K empirical topic proportions
    std::vector<std::vector<std::size_t>> z;  // per token topic
};

inline constexpr double kLinkProbFloor = 1e-6;

/// r = sum_k eta_k zbar_i,k zbar_j,k. Throws InvalidArgument on a length mismatch.
double link_mean(std::span<const double> eta, std::span<const double> zbar_i, std::span<const double> zbar_j);

/// Forward sample. Links are Bernoulli(clamp(link_rate * r, eps, 1 - eps))
/// with one author of the cited document drawn uniformly per pair. When
/// `eta_override` is given it replaces the sampled authority matrix.
std::pair<Corpus, GroundTruth> sample_corpus(const GenerativeConfig& config,
                                             const Matrix* eta_override = nullptr);

}  // namespace ltai
