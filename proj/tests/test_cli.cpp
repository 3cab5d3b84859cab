#include <doctest.h>

#include <sstream>

#include "ltai/cli.hpp"
#include "test_util.hpp"

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = ltai::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string count_lines_with(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) ++n;
    return std::to_string(n);
}

}  // namespace

TEST_CASE("stats on the two-document fixture") {
    const auto r = run({"stats", "--corpus-dir", (test::data_dir() / "two_docs").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("num_docs") != std::string::npos);
    CHECK(r.out.find("0.5") != std::string::npos);
}

TEST_CASE("argument errors exit non-zero") {
    CHECK(run({"evaluate", "--task", "words"}).code != 0);
    CHECK(run({"stats"}).code != 0);
    CHECK(run({"stats", "--corpus-dir", "x", "--bogus"}).code != 0);
    CHECK(run({"frobnicate"}).code != 0);
    const auto dir = (test::data_dir() / "two_docs").string();
    CHECK(run({"train", "--corpus-dir", dir, "--plain-lda", "--c-pos", "5"}).code != 0);
    CHECK(run({"train", "--corpus-dir", dir, "--plain-lda", "--separate"}).code != 0);
    CHECK(run({"stats", "--corpus-dir", "/nonexistent/dir"}).code != 0);
}

TEST_CASE("generate, train, evaluate and report end to end") {
    const auto root = test::scratch_dir("cli_e2e");
    const auto data = (root / "data").string();
    REQUIRE(run({"generate", "--topics", "3", "--docs", "60", "--authors", "10", "--vocab", "40", "--doc-length",
                 "30", "--link-rate", "0.3", "--seed", "2", "--out", data})
                .code == 0);
    CHECK(std::filesystem::exists(root / "data" / "ground_truth.ckpt"));

    auto train = [&](const std::string& out, const std::string& holdout) {
        return run({"train", "--corpus-dir", data, "--out", out, "--topics", "3", "--c-pos", "10", "--max-iters", "4",
                    "--eval-every", "2", "--holdout", holdout, "--seed", "5", "--deterministic"});
    };
    const auto a = (root / "a").string(), b = (root / "b").string();
    REQUIRE(train(a, "words").code == 0);
    REQUIRE(train(b, "words").code == 0);
    const std::string metrics = test::read_file(root / "a" / "metrics.jsonl");
    CHECK(!metrics.empty());
    CHECK(metrics == test::read_file(root / "b" / "metrics.jsonl"));
    CHECK(test::read_file(root / "a" / "model.ckpt") == test::read_file(root / "b" / "model.ckpt"));

    const auto words = run({"evaluate", "--task", "words", "--model", a + "/model.ckpt"});
    REQUIRE(words.code == 0);
    CHECK(words.out.find("# mean_log_predictive") != std::string::npos);

    const auto c = (root / "c").string();
    REQUIRE(train(c, "citations").code == 0);
    const auto cites = run({"evaluate", "--task", "citations", "--model", c + "/model.ckpt"});
    REQUIRE(cites.code == 0);
    CHECK(cites.out.find("# mrr") != std::string::npos);
    CHECK(cites.out.find("random_baseline_mrr") != std::string::npos);

    const auto d = (root / "d").string();
    REQUIRE(train(d, "authors").code == 0);
    const auto authors = run({"evaluate", "--task", "authors", "--model", d + "/model.ckpt", "--baseline", "h-index"});
    REQUIRE(authors.code == 0);
    CHECK(authors.out.find("# mrr") != std::string::npos);

    const auto rep = run({"report", "--model", (root / "data" / "ground_truth.ckpt").string(), "--top-n", "4"});
    REQUIRE(rep.code == 0);
    CHECK(count_lines_with(rep.out, "# topic") == "3");
    CHECK(rep.out.find("rank\tauthor\ttopical_authority\th_index\tcites\tpapers") != std::string::npos);
}

TEST_CASE("resume appends to the metric log") {
    const auto root = test::scratch_dir("cli_resume");
    const auto data = (root / "data").string();
    REQUIRE(run({"generate", "--topics", "2", "--docs", "30", "--authors", "6", "--vocab", "20", "--seed", "1",
                 "--out", data})
                .code == 0);
    const auto out = (root / "run").string();
    const std::vector<std::string> base{"train", "--corpus-dir", data, "--out", out, "--topics", "2", "--c-pos",
                                        "10", "--eval-every", "1", "--deterministic", "--holdout", "none"};
    auto first = base;
    first.insert(first.end(), {"--max-iters", "2"});
    REQUIRE(run(first).code == 0);
    const auto before = test::read_file(root / "run" / "metrics.jsonl");
    auto second = base;
    second.insert(second.end(), {"--max-iters", "4", "--resume", out + "/model.ckpt"});
    REQUIRE(run(second).code == 0);
    const auto after = test::read_file(root / "run" / "metrics.jsonl");
    CHECK(after.size() > before.size());
    CHECK(after.rfind(before, 0) == 0);
}
