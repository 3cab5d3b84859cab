#include "ltai/protocol.hpp"

#include <fstream>
#include <sstream>

#include "ltai/error.hpp"
#include "ltai/parallel.hpp"
#include "ltai/random.hpp"

namespace ltai {

namespace {

std::size_t require_doc(const Corpus& corpus, const std::string& id, const std::string& file, std::size_t line) {
    auto doc = corpus.find_document(id);
    if (!doc) throw ReferenceError(file + ":" + std::to_string(line) + ": unknown document " + id);
    return *doc;
}

std::vector<std::string> tab_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) out.push_back(f);
    return out;
}

}  // namespace

WordTask prepare_word_task(const Corpus& corpus, const SplitSpec& split, Warnings* warnings) {
    WordTask task{corpus, {}};
    const auto docs = split_test_documents(corpus, split, warnings);
    for (std::size_t i : docs.test_ids) {
        auto words = split_document_words(corpus.documents[i].tokens, split.word_holdout_fraction,
                                          mix_seed(split.seed, Stream::WordSplit, i), warnings);
        if (words.heldout.empty()) continue;
        task.train_corpus.documents[i].tokens = std::move(words.observed);
        task.targets.docs.push_back(i);
        task.targets.heldout.push_back(std::move(words.heldout));
    }
    return task;
}

EvalReport evaluate_words(const TrainedModel& model, const Corpus& train_corpus, const HeldOutWords& targets,
                          int passes, std::size_t threads) {
    EvalReport report;
    report.task = "words";
    report.aggregate_name = "mean_log_predictive";
    std::vector<double> values(targets.docs.size());
    parallel_for(targets.docs.size(), threads, [&](std::size_t n) {
        const std::size_t i = targets.docs[n];
        values[n] = word_log_predictive(model, train_corpus, i, train_corpus.documents[i].tokens, targets.heldout[n],
                                        passes);
    });
    double total = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) {
        report.items.emplace_back(train_corpus.documents[targets.docs[n]].id, values[n]);
        total += values[n];
    }
    if (values.empty()) throw InvalidArgument("evaluate_words: no targets");
    report.aggregate = total / static_cast<double>(values.size());
    report.config["refit_passes"] = std::to_string(passes);
    return report;
}

CitationTask prepare_citation_task(const Corpus& corpus, const SplitSpec& split) {
    const auto docs = split_test_documents(corpus, split);
    auto removal = remove_one_citation_per_test_doc(corpus, docs.test_ids, split.seed);
    return {std::move(removal.reduced), std::move(removal.removed), std::move(removal.skipped)};
}

EvalReport evaluate_citations(const TrainedModel& model, const Corpus& reduced, const std::vector<Link>& targets,
                              std::size_t threads) {
    EvalReport report;
    report.task = "citations";
    report.aggregate_name = "mrr";
    std::vector<RankResult> ranks(targets.size());
    parallel_for(targets.size(), threads, [&](std::size_t n) {
        const auto candidates = citation_candidates(reduced.graph, targets[n].cited);
        ranks[n] = citation_rank(model, reduced, targets[n], candidates);
    });
    std::vector<double> values;
    for (const auto& r : ranks) {
        report.items.emplace_back(r.target, r.rank);
        values.push_back(r.rank);
    }
    report.aggregate = mrr(values);
    return report;
}

AuthorTask prepare_author_task(const Corpus& corpus, const SplitSpec& split) {
    AuthorTask task{corpus, {}, {}};
    const auto docs = split_test_documents(corpus, split);
    for (std::size_t t : docs.test_ids) {
        const auto& as = corpus.authors.authors_of(t);
        if (as.empty() || corpus.graph.citers(t).empty()) {
            task.skipped.push_back(t);
            continue;
        }
        Rng rng = make_rng(split.seed, Stream::AuthorRemoval, t);
        std::uniform_int_distribution<std::size_t> pick(0, as.size() - 1);
        const std::size_t a = as[pick(rng)];
        task.reduced.authors.unassign(t, a);
        task.targets.push_back({t, a});
    }
    return task;
}

EvalReport evaluate_authors(const TrainedModel& model, const Corpus& reduced, const std::vector<AuthorTarget>& targets,
                            const Matrix* authority, std::optional<double> c_plus) {
    EvalReport report;
    report.task = "authors";
    report.aggregate_name = "mrr";
    const double c = c_plus.value_or(model.hyper.c_plus);
    if (!(c > 0.0)) throw InvalidArgument("evaluate_authors: positive precision required");
    const Matrix& weights = authority ? *authority : model.authors.eta;
    std::vector<std::size_t> candidates(reduced.num_authors());
    for (std::size_t a = 0; a < candidates.size(); ++a) candidates[a] = a;

    std::vector<double> values;
    for (const auto& t : targets) {
        const auto& citing = reduced.graph.citers(t.doc);
        if (citing.empty()) {
            report.skipped.push_back(reduced.documents[t.doc].id);
            continue;
        }
        RankResult r = author_rank(model.content.phi_bar, weights, t.doc, citing, t.author, candidates, c);
        report.items.emplace_back(reduced.documents[t.doc].id + ":" + reduced.authors.name(t.author), r.rank);
        values.push_back(r.rank);
    }
    report.aggregate = mrr(values);
    report.config["c_plus"] = std::to_string(c);
    return report;
}

Corpus align_to_model(const Corpus& corpus, const TrainedModel& model) {
    Corpus out = corpus;
    out.vocabulary = Vocabulary();
    for (const auto& t : model.vocabulary) out.vocabulary.add(t);
    for (auto& doc : out.documents)
        for (TokenId& tok : doc.tokens) {
            auto id = out.vocabulary.find(corpus.vocabulary.term(tok));
            if (!id) throw ReferenceError("term '" + corpus.vocabulary.term(tok) + "' is not in the model vocabulary");
            tok = *id;
        }
    out.authors = AuthorTable(corpus.num_docs());
    for (const auto& name : model.author_names) out.authors.add_author(name);
    for (std::size_t i = 0; i < corpus.num_docs(); ++i)
        for (std::size_t a : corpus.authors.authors_of(i)) {
            auto id = out.authors.find(corpus.authors.name(a));
            if (!id) throw ReferenceError("author '" + corpus.authors.name(a) + "' is not in the model");
            out.authors.assign(i, *id);
        }
    return out;
}

void write_word_targets(const Corpus& train_corpus, const HeldOutWords& targets, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t n = 0; n < targets.docs.size(); ++n) {
        out << train_corpus.documents[targets.docs[n]].id << '\t';
        for (std::size_t m = 0; m < targets.heldout[n].size(); ++m)
            out << (m ? " " : "") << train_corpus.vocabulary.term(targets.heldout[n][m]);
        out << '\n';
    }
}

HeldOutWords read_word_targets(const Corpus& train_corpus, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    HeldOutWords targets;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(path.string(), lineno, "expected <doc_id>\\t<tokens>");
        targets.docs.push_back(require_doc(train_corpus, line.substr(0, tab), path.string(), lineno));
        std::vector<TokenId> toks;
        std::istringstream ss(line.substr(tab + 1));
        std::string term;
        while (ss >> term) {
            auto id = train_corpus.vocabulary.find(term);
            if (!id) throw ReferenceError(path.string() + ":" + std::to_string(lineno) + ": unknown term " + term);
            toks.push_back(*id);
        }
        targets.heldout.push_back(std::move(toks));
    }
    return targets;
}

void write_citation_targets(const Corpus& corpus, const std::vector<Link>& targets, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& l : targets) out << corpus.documents[l.citing].id << '\t' << corpus.documents[l.cited].id << '\n';
}

std::vector<Link> read_citation_targets(const Corpus& corpus, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<Link> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = tab_fields(line);
        if (f.size() != 2) throw ParseError(path.string(), lineno, "expected <citing_doc_id>\\t<cited_doc_id>");
        out.push_back({require_doc(corpus, f[1], path.string(), lineno), require_doc(corpus, f[0], path.string(), lineno)});
    }
    return out;
}

void write_author_targets(const Corpus& corpus, const std::vector<AuthorTarget>& targets,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& t : targets) out << corpus.documents[t.doc].id << '\t' << corpus.authors.name(t.author) << '\n';
}

std::vector<AuthorTarget> read_author_targets(const Corpus& corpus, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<AuthorTarget> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = tab_fields(line);
        if (f.size() != 2) throw ParseError(path.string(), lineno, "expected <doc_id>\\t<author>");
        auto a = corpus.authors.find(f[1]);
        if (!a) throw ReferenceError(path.string() + ":" + std::to_string(lineno) + ": unknown author " + f[1]);
        out.push_back({require_doc(corpus, f[0], path.string(), lineno), *a});
    }
    return out;
}

}  // namespace ltai
