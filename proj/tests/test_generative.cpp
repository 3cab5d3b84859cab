#include <doctest.h>

#include "ltai/error.hpp"
#include "ltai/generative.hpp"

using namespace ltai;

namespace {

GenerativeConfig small(std::uint64_t seed) {
    GenerativeConfig c;
    c.topics = 3;
    c.docs = 40;
    c.authors = 8;
    c.vocab = 30;
    c.doc_length = 20;
    c.seed = seed;
    return c;
}

bool rows_on_simplex(const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if ((m.row(r).array() < 0.0).any()) return false;
        if (std::abs(m.row(r).sum() - 1.0) > 1e-9) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("link_mean examples") {
    const std::vector<double> eta{2.0, 1.0}, a{1.0, 0.0}, b{0.0, 1.0}, half{0.5, 0.5};
    CHECK(link_mean(eta, a, a) == doctest::Approx(2.0));
    CHECK(link_mean(eta, a, b) == doctest::Approx(0.0));
    // 2*0.25 + 1*0.25 = 0.75; with eta (2,2) it is 1.0
    CHECK(link_mean(std::vector<double>{2.0, 2.0}, half, half) == doctest::Approx(1.0));
    CHECK_THROWS_AS(link_mean(eta, a, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("single topic gives theta of one") {
    auto cfg = small(3);
    cfg.topics = 1;
    const auto [corpus, truth] = sample_corpus(cfg);
    CHECK(truth.theta.cols() == 1);
    CHECK((truth.theta.array() == 1.0).all());
    CHECK((truth.zbar.array() == 1.0).all());
}

TEST_CASE("zero authority yields no links") {
    auto cfg = small(4);
    cfg.link_rate = 1.0;
    const Matrix zero = Matrix::Zero(static_cast<Eigen::Index>(cfg.authors), static_cast<Eigen::Index>(cfg.topics));
    const auto [corpus, truth] = sample_corpus(cfg, &zero);
    CHECK(corpus.graph.num_links() == 0);
    CHECK(truth.eta.norm() == 0.0);
}

TEST_CASE("sampled distributions are on the simplex and shapes match") {
    const auto [corpus, truth] = sample_corpus(small(5));
    CHECK(corpus.num_docs() == 40);
    CHECK(corpus.num_authors() == 8);
    CHECK(rows_on_simplex(truth.theta));
    CHECK(rows_on_simplex(truth.beta));
    CHECK(rows_on_simplex(truth.zbar));
    CHECK(truth.eta.rows() == 8);
    CHECK(truth.eta.allFinite());
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
        CHECK(!corpus.documents[d].tokens.empty());
        CHECK(truth.z[d].size() == corpus.documents[d].tokens.size());
        const auto n = corpus.authors.authors_of(d).size();
        CHECK(n >= 1);
        CHECK(n <= 3);
    }
}

TEST_CASE("empirical topic proportions approach theta for long documents") {
    auto cfg = small(6);
    cfg.docs = 5;
    cfg.doc_length = 10000;
    const auto [corpus, truth] = sample_corpus(cfg);
    CHECK((truth.zbar - truth.theta).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("sampling is reproducible under the seed") {
    const auto [c1, t1] = sample_corpus(small(7));
    const auto [c2, t2] = sample_corpus(small(7));
    const auto [c3, t3] = sample_corpus(small(8));
    CHECK(t1.theta == t2.theta);
    CHECK(t1.eta == t2.eta);
    CHECK(c1.graph.links() == c2.graph.links());
    for (std::size_t d = 0; d < c1.num_docs(); ++d) CHECK(c1.documents[d].tokens == c2.documents[d].tokens);
    CHECK(t1.theta != t3.theta);
}

TEST_CASE("configuration validation") {
    auto cfg = small(1);
    cfg.topics = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = small(1);
    cfg.min_authors_per_doc = 4;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = small(1);
    cfg.link_rate = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
