#include <doctest.h>

#include <fstream>

#include "ltai/error.hpp"
#include "ltai/generative.hpp"
#include "ltai/trainer.hpp"
#include "test_util.hpp"

using namespace ltai;

namespace {

Corpus small_corpus(std::uint64_t seed = 1) {
    GenerativeConfig g;
    g.topics = 3;
    g.docs = 40;
    g.authors = 8;
    g.vocab = 40;
    g.doc_length = 25;
    g.link_rate = 0.3;
    g.seed = seed;
    return sample_corpus(g).first;
}

TrainConfig small_config() {
    TrainConfig c;
    c.hyper.topics = 3;
    c.hyper.c_plus = 10.0;
    c.hyper.ss = 16;
    c.hyper.sv = 8;
    c.hyper.se = 20;
    c.hyper.sa = 4;
    c.max_iters = 6;
    c.seed = 3;
    return c;
}

void check_same(const TrainedModel& a, const TrainedModel& b) {
    CHECK(a.content.gamma == b.content.gamma);
    CHECK(a.content.lambda == b.content.lambda);
    CHECK(a.content.phi_bar == b.content.phi_bar);
    CHECK(a.authors.eta == b.authors.eta);
    CHECK(a.authors.pi == b.authors.pi);
    CHECK(a.iteration == b.iteration);
    CHECK(a.doc_updates == b.doc_updates);
}

}  // namespace

TEST_CASE("checkpoint round-trips exactly") {
    const Corpus c = small_corpus();
    auto cfg = small_config();
    cfg.max_iters = 2;
    const auto model = train(c, cfg).model;
    const auto path = test::scratch_dir("ckpt") / "m.ckpt";
    save_checkpoint(model, path);
    const auto back = load_checkpoint(path);
    check_same(model, back);
    CHECK(back.hyper.c_plus == model.hyper.c_plus);
    CHECK(back.hyper.topics == 3);
    CHECK(back.rate.tau0 == model.rate.tau0);
    CHECK(back.mode == model.mode);
    CHECK(back.seed == model.seed);
    CHECK(back.vocabulary == model.vocabulary);
    CHECK(back.doc_ids == model.doc_ids);
    CHECK(back.author_names == model.author_names);
    CHECK(back.doc_authors == model.doc_authors);
    CHECK(back.doc_citations == model.doc_citations);
}

TEST_CASE("damaged checkpoints are rejected") {
    const Corpus c = small_corpus();
    auto cfg = small_config();
    cfg.max_iters = 1;
    const auto dir = test::scratch_dir("ckpt_bad");
    save_checkpoint(train(c, cfg).model, dir / "m.ckpt");
    const std::string bytes = test::read_file(dir / "m.ckpt");

    test::write_file(dir / "cut.ckpt", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(dir / "cut.ckpt"), CheckpointError);

    std::string flipped = bytes;
    flipped[flipped.size() / 2] = static_cast<char>(flipped[flipped.size() / 2] ^ 0x40);
    test::write_file(dir / "flip.ckpt", flipped);
    CHECK_THROWS_AS(load_checkpoint(dir / "flip.ckpt"), CheckpointError);

    std::string version = bytes;
    version[8] = static_cast<char>(version[8] + 1);  // first byte after the 8-byte magic
    test::write_file(dir / "ver.ckpt", version);
    CHECK_THROWS_AS(load_checkpoint(dir / "ver.ckpt"), CheckpointVersionError);

    test::write_file(dir / "junk.ckpt", "hello");
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), CheckpointError);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
}

TEST_CASE("resuming from a checkpoint reproduces an uninterrupted run") {
    const Corpus c = small_corpus();
    auto cfg = small_config();
    const auto full = train(c, cfg).model;

    auto half = cfg;
    half.max_iters = 3;
    const auto path = test::scratch_dir("resume") / "m.ckpt";
    save_checkpoint(train(c, half).model, path);
    const auto loaded = load_checkpoint(path);
    const auto resumed = train(c, cfg, nullptr, &loaded).model;
    check_same(full, resumed);
}

TEST_CASE("results do not depend on the thread count") {
    const Corpus c = small_corpus(2);
    auto cfg = small_config();
    cfg.threads = 1;
    const auto one = train(c, cfg).model;
    cfg.threads = 4;
    const auto four = train(c, cfg).model;
    check_same(one, four);
}

TEST_CASE("separate mode's content phase is the plain-LDA run") {
    const Corpus c = small_corpus(3);
    auto cfg = small_config();
    cfg.mode = Mode::PlainLda;
    const auto plain = train(c, cfg).model;
    cfg.mode = Mode::Separate;
    cfg.sep_author_iters = 3;
    const auto sep = train(c, cfg).model;
    CHECK(sep.content.gamma == plain.content.gamma);
    CHECK(sep.content.lambda == plain.content.lambda);
    CHECK(sep.content.phi_bar == plain.content.phi_bar);
    CHECK(sep.authors.eta != plain.authors.eta);
    CHECK(sep.mode == Mode::Separate);
}

TEST_CASE("plain LDA leaves the author state untouched") {
    const Corpus c = small_corpus(4);
    auto cfg = small_config();
    cfg.mode = Mode::PlainLda;
    const auto init = initialize_model(c, cfg);
    const auto trained = train(c, cfg).model;
    CHECK(trained.authors.eta == init.authors.eta);
    CHECK(trained.hyper.c_plus == 0.0);
    CHECK(trained.hyper.c_minus == 0.0);
}

TEST_CASE("a corpus without links drives authority to zero") {
    Corpus c = small_corpus(5);
    for (const auto& l : c.graph.links()) c.graph.remove(l.cited, l.citing);
    auto cfg = small_config();
    cfg.batch = true;
    cfg.max_iters = 3;
    const auto m = train(c, cfg).model;
    CHECK(m.authors.eta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("held-out monitor converges and is recorded") {
    const Corpus c = small_corpus(6);
    auto cfg = small_config();
    cfg.max_iters = 40;
    cfg.eval_every = 2;
    cfg.tolerance = 1e-2;
    cfg.patience = 2;
    HeldOutWords monitor;
    Corpus train_corpus = c;
    for (std::size_t d = 0; d < 10; ++d) {
        auto split = split_document_words(c.documents[d].tokens, 0.5, d);
        train_corpus.documents[d].tokens = split.observed;
        monitor.docs.push_back(d);
        monitor.heldout.push_back(split.heldout);
    }
    std::size_t seen = 0;
    const auto r = train(train_corpus, cfg, &monitor, nullptr, [&](const MetricRecord&) { ++seen; });
    CHECK(r.converged);
    CHECK(seen == r.history.size());
    CHECK(r.history.front().iteration == 0);
    for (const auto& m : r.history) {
        REQUIRE(m.heldout_log_predictive.has_value());
        CHECK(*m.heldout_log_predictive < 0.0);
    }
    CHECK(*r.history.back().heldout_log_predictive > *r.history.front().heldout_log_predictive);
}

TEST_CASE("TrainConfig validation") {
    auto cfg = small_config();
    cfg.mode = Mode::PlainLda;
    cfg.corrupt_percent = 10;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = small_config();
    cfg.constant_c = 2.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = small_config();
    cfg.corrupt_percent = 120;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = small_config();
    cfg.hyper.c_plus = 0.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
