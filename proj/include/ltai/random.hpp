#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ltai {

using Rng = std::mt19937_64;

// Independent streams keyed by purpose, so that skipping one kind of draw
// (e.g. negative sampling in plain-LDA mode) never shifts another.
enum class Stream : std::uint64_t {
    Init = 1,
    DocMinibatch,
    NegativeIncoming,
    NegativeOutgoing,
    AuthorMinibatch,
    EdgeSample,
    PiSample,
    Split,
    WordSplit,
    Corrupt,
    CitationRemoval,
    AuthorRemoval,
    Generate,
    Evaluation,
};

std::uint64_t mix_seed(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(mix_seed(seed, stream, a, b));
}

// Uniform subset of {0..n-1} of size min(k, n), returned in ascending order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

// Maps ascending ranks among the integers not in `excluded` (ascending) to
// those integers: rank r -> the r-th non-excluded value.
std::vector<std::size_t> select_from_complement(const std::vector<std::size_t>& excluded,
                                                const std::vector<std::size_t>& ranks);

}  // namespace ltai
