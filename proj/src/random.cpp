#include "ltai/random.hpp"

#include <algorithm>
#include <unordered_set>

namespace ltai {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    k = std::min(k, n);
    std::vector<std::size_t> out;
    out.reserve(k);
    if (k == n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    // Floyd's algorithm: k draws regardless of n.
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(k * 2);
    for (std::size_t j = n - k; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, j);
        std::size_t t = pick(rng);
        if (!chosen.insert(t).second) {
            chosen.insert(j);
            out.push_back(j);
        } else {
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> select_from_complement(const std::vector<std::size_t>& excluded,
                                                const std::vector<std::size_t>& ranks) {
    std::vector<std::size_t> out;
    out.reserve(ranks.size());
    std::size_t skipped = 0;
    auto ex = excluded.begin();
    for (std::size_t rank : ranks) {
        std::size_t value = rank + skipped;
        while (ex != excluded.end() && *ex <= value) {
            ++skipped;
            ++ex;
            value = rank + skipped;
        }
        out.push_back(value);
    }
    return out;
}

}  // namespace ltai
