#include "ltai/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "ltai/error.hpp"
#include "ltai/random.hpp"

namespace ltai {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return fields;
}

std::vector<std::string> split_spaces(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

void warn(Warnings* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

void insert_sorted(std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

bool erase_sorted(std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) return false;
    v.erase(it);
    return true;
}

}  // namespace

TokenId Vocabulary::add(const std::string& term) {
    auto [it, inserted] = index_.try_emplace(term, static_cast<TokenId>(terms_.size()));
    if (inserted) terms_.push_back(term);
    return it->second;
}

std::optional<TokenId> Vocabulary::find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

CitationGraph::CitationGraph(std::size_t num_docs) : citers_(num_docs), references_(num_docs) {}

bool CitationGraph::add(std::size_t cited, std::size_t citing) {
    if (cited >= num_docs() || citing >= num_docs())
        throw InvalidArgument("citation references a document outside the graph");
    if (cited == citing) throw InvalidArgument("self-citation is not allowed");
    if (linked(cited, citing)) return false;
    insert_sorted(citers_[cited], citing);
    insert_sorted(references_[citing], cited);
    ++num_links_;
    return true;
}

bool CitationGraph::remove(std::size_t cited, std::size_t citing) {
    if (cited >= num_docs() || citing >= num_docs()) return false;
    if (!erase_sorted(citers_[cited], citing)) return false;
    erase_sorted(references_[citing], cited);
    --num_links_;
    return true;
}

bool CitationGraph::linked(std::size_t cited, std::size_t citing) const {
    const auto& c = citers_.at(cited);
    return std::binary_search(c.begin(), c.end(), citing);
}

std::vector<Link> CitationGraph::links() const {
    std::vector<Link> out;
    out.reserve(num_links_);
    for (std::size_t j = 0; j < references_.size(); ++j)
        for (std::size_t i : references_[j]) out.push_back({i, j});
    return out;
}

std::size_t AuthorTable::add_author(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, names_.size());
    if (inserted) {
        names_.push_back(name);
        docs_of_.emplace_back();
    }
    return it->second;
}

std::optional<std::size_t> AuthorTable::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void AuthorTable::assign(std::size_t doc, std::size_t a) {
    if (doc >= authors_of_.size() || a >= names_.size())
        throw InvalidArgument("author assignment out of range");
    auto& as = authors_of_[doc];
    if (std::find(as.begin(), as.end(), a) != as.end()) return;
    as.push_back(a);
    insert_sorted(docs_of_[a], doc);
}

void AuthorTable::unassign(std::size_t doc, std::size_t a) {
    auto& as = authors_of_.at(doc);
    auto it = std::find(as.begin(), as.end(), a);
    if (it == as.end()) return;
    as.erase(it);
    erase_sorted(docs_of_.at(a), doc);
}

std::optional<std::size_t> Corpus::find_document(const std::string& id) const {
    for (std::size_t i = 0; i < documents.size(); ++i)
        if (documents[i].id == id) return i;
    return std::nullopt;
}

void Corpus::validate() const {
    const std::size_t D = documents.size();
    if (graph.num_docs() != D) throw ReferenceError("citation graph size does not match document count");
    if (authors.num_docs() != D) throw ReferenceError("author table size does not match document count");
    std::set<std::string> ids;
    for (const auto& doc : documents) {
        if (!ids.insert(doc.id).second) throw InvalidArgument("duplicate document id " + doc.id);
        for (TokenId t : doc.tokens)
            if (t >= vocabulary.size()) throw ReferenceError("token id out of vocabulary in " + doc.id);
    }
    for (std::size_t a = 0; a < authors.num_authors(); ++a)
        for (std::size_t d : authors.docs_of(a)) {
            const auto& as = authors.authors_of(d);
            if (std::find(as.begin(), as.end(), a) == as.end())
                throw ReferenceError("author table is inconsistent");
        }
}

Corpus load_corpus(const std::filesystem::path& documents_path,
                   const std::filesystem::path& authors_path,
                   const std::filesystem::path& citations_path,
                   Warnings* warnings) {
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> doc_index;

    {
        auto in = open_input(documents_path);
        const std::string file = documents_path.string();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            strip_cr(line);
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw ParseError(file, lineno, "expected <doc_id>\\t<tokens>");
            std::string id = line.substr(0, tab);
            if (id.empty()) throw ParseError(file, lineno, "empty document id");
            if (!doc_index.emplace(id, corpus.documents.size()).second)
                throw ParseError(file, lineno, "duplicate document id " + id);
            Document doc{id, {}};
            for (const auto& term : split_spaces(line.substr(tab + 1)))
                doc.tokens.push_back(corpus.vocabulary.add(term));
            corpus.documents.push_back(std::move(doc));
        }
    }

    const std::size_t D = corpus.documents.size();
    corpus.graph = CitationGraph(D);
    corpus.authors = AuthorTable(D);

    auto lookup = [&](const std::string& file, std::size_t lineno, const std::string& id) {
        auto it = doc_index.find(id);
        if (it == doc_index.end()) throw ReferenceError(file + ":" + std::to_string(lineno) + ": unknown document " + id);
        return it->second;
    };

    {
        auto in = open_input(authors_path);
        const std::string file = authors_path.string();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            strip_cr(line);
            if (line.empty()) continue;
            auto fields = split_tabs(line);
            if (fields.size() < 2 || fields[0].empty())
                throw ParseError(file, lineno, "expected <doc_id>\\t<author>...");
            std::size_t doc = lookup(file, lineno, fields[0]);
            for (std::size_t f = 1; f < fields.size(); ++f) {
                if (fields[f].empty()) throw ParseError(file, lineno, "empty author name");
                corpus.authors.assign(doc, corpus.authors.add_author(fields[f]));
            }
        }
    }

    {
        auto in = open_input(citations_path);
        const std::string file = citations_path.string();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            strip_cr(line);
            if (line.empty()) continue;
            auto fields = split_tabs(line);
            if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
                throw ParseError(file, lineno, "expected <citing_doc_id>\\t<cited_doc_id>");
            std::size_t citing = lookup(file, lineno, fields[0]);
            std::size_t cited = lookup(file, lineno, fields[1]);
            if (citing == cited) {
                warn(warnings, file + ":" + std::to_string(lineno) + ": self-citation dropped");
                continue;
            }
            if (!corpus.graph.add(cited, citing))
                warn(warnings, file + ":" + std::to_string(lineno) + ": duplicate citation dropped");
        }
    }

    for (std::size_t i = 0; i < D; ++i)
        if (corpus.authors.anonymous(i))
            warn(warnings, "document " + corpus.documents[i].id + " has no authors; treated as anonymous");

    corpus.validate();
    return corpus;
}

void write_corpus(const Corpus& corpus,
                  const std::filesystem::path& documents_path,
                  const std::filesystem::path& authors_path,
                  const std::filesystem::path& citations_path) {
    {
        auto out = open_output(documents_path);
        for (const auto& doc : corpus.documents) {
            out << doc.id << '\t';
            for (std::size_t n = 0; n < doc.tokens.size(); ++n) {
                if (n) out << ' ';
                out << corpus.vocabulary.term(doc.tokens[n]);
            }
            out << '\n';
        }
    }
    {
        auto out = open_output(authors_path);
        for (std::size_t i = 0; i < corpus.num_docs(); ++i) {
            const auto& as = corpus.authors.authors_of(i);
            if (as.empty()) continue;
            out << corpus.documents[i].id;
            for (std::size_t a : as) out << '\t' << corpus.authors.name(a);
            out << '\n';
        }
    }
    {
        auto out = open_output(citations_path);
        for (const Link& l : corpus.graph.links())
            out << corpus.documents[l.citing].id << '\t' << corpus.documents[l.cited].id << '\n';
    }
}

Corpus load_corpus_dir(const std::filesystem::path& dir, Warnings* warnings) {
    return load_corpus(dir / "documents.tsv", dir / "authors.tsv", dir / "citations.tsv", warnings);
}

void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_corpus(corpus, dir / "documents.tsv", dir / "authors.tsv", dir / "citations.tsv");
}

StatsReport corpus_stats(const Corpus& corpus) {
    StatsReport s;
    s.vocab_size = corpus.vocab_size();
    s.num_docs = corpus.num_docs();
    s.num_authors = corpus.num_authors();
    if (s.num_docs > 0)
        s.avg_cites_per_doc = static_cast<double>(corpus.graph.num_links()) / static_cast<double>(s.num_docs);
    if (s.num_authors > 0) {
        double received = 0.0;
        for (std::size_t a = 0; a < s.num_authors; ++a)
            for (std::size_t d : corpus.authors.docs_of(a))
                received += static_cast<double>(corpus.graph.citers(d).size());
        s.avg_cites_per_author = received / static_cast<double>(s.num_authors);
    }
    return s;
}

std::string format_stats(const StatsReport& stats) {
    std::ostringstream out;
    out << "vocab_size: " << stats.vocab_size << '\n'
        << "num_docs: " << stats.num_docs << '\n'
        << "num_authors: " << stats.num_authors << '\n'
        << std::setprecision(6) << std::fixed
        << "avg_cites_per_doc: " << stats.avg_cites_per_doc << '\n'
        << "avg_cites_per_author: " << stats.avg_cites_per_author << '\n';
    return out.str();
}

void SplitSpec::validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InvalidArgument("test_fraction must lie in (0,1)");
    if (!(word_holdout_fraction > 0.0 && word_holdout_fraction < 1.0))
        throw InvalidArgument("word_holdout_fraction must lie in (0,1)");
}

DocumentSplit split_test_documents(const Corpus& corpus, const SplitSpec& spec, Warnings* warnings) {
    spec.validate();
    const std::size_t D = corpus.num_docs();
    const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(D)));
    if (n_test == 0) warn(warnings, "test split is empty after rounding");

    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(spec.seed, Stream::Split);
    std::shuffle(order.begin(), order.end(), rng);

    DocumentSplit split;
    split.test_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    std::sort(split.train_ids.begin(), split.train_ids.end());
    return split;
}

WordSplit split_document_words(const std::vector<TokenId>& tokens, double fraction,
                               std::uint64_t seed, Warnings* warnings) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("word holdout fraction must lie in (0,1)");
    const std::size_t N = tokens.size();
    // Round half up on the observed side.
    auto n_observed = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(N) + 0.5));
    n_observed = std::min(n_observed, N);
    if (N < 2) warn(warnings, "document has fewer than 2 tokens; held-out part is empty");

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, Stream::WordSplit);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<bool> keep(N, false);
    for (std::size_t n = 0; n < n_observed; ++n) keep[order[n]] = true;

    WordSplit out;
    for (std::size_t n = 0; n < N; ++n) (keep[n] ? out.observed : out.heldout).push_back(tokens[n]);
    return out;
}

Corpus corrupt_links(const Corpus& corpus, double percent, std::uint64_t seed) {
    if (!(percent >= 0.0 && percent <= 100.0)) throw InvalidArgument("percent must lie in [0,100]");
    Corpus out = corpus;
    const auto links = corpus.graph.links();
    const std::size_t L = links.size();
    const auto n_move = static_cast<std::size_t>(std::llround(percent / 100.0 * static_cast<double>(L)));
    if (n_move == 0) return out;

    const std::size_t D = corpus.num_docs();
    const std::size_t capacity = D * (D - 1);
    // Replacements must avoid every original link, including the removed ones.
    if (capacity < L + n_move)
        throw InvalidArgument("graph too dense to displace " + std::to_string(n_move) + " links");

    Rng rng = make_rng(seed, Stream::Corrupt);
    for (std::size_t idx : sample_without_replacement(L, n_move, rng)) out.graph.remove(links[idx].cited, links[idx].citing);

    std::uniform_int_distribution<std::size_t> pick(0, D - 1);
    std::size_t placed = 0;
    while (placed < n_move) {
        std::size_t cited = pick(rng);
        std::size_t citing = pick(rng);
        if (cited == citing || corpus.graph.linked(cited, citing) || out.graph.linked(cited, citing)) continue;
        out.graph.add(cited, citing);
        ++placed;
    }
    return out;
}

CitationRemoval remove_one_citation_per_test_doc(const Corpus& corpus,
                                                 const std::vector<std::size_t>& test_ids,
                                                 std::uint64_t seed) {
    CitationRemoval result{corpus, {}, {}};
    auto& graph = result.reduced.graph;
    for (std::size_t t : test_ids) {
        std::vector<Link> eligible;
        for (std::size_t j : graph.citers(t)) eligible.push_back({t, j});
        for (std::size_t i : graph.references(t)) eligible.push_back({i, t});
        if (eligible.empty()) {
            result.skipped.push_back(t);
            continue;
        }
        Rng rng = make_rng(seed, Stream::CitationRemoval, t);
        std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
        Link chosen = eligible[pick(rng)];
        graph.remove(chosen.cited, chosen.citing);
        result.removed.push_back(chosen);
    }
    return result;
}

}  // namespace ltai

namespace ltai {

Corpus prepare_tokens(const Corpus& corpus, std::size_t min_count) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& doc : corpus.documents)
        for (TokenId t : doc.tokens) ++freq[lower(corpus.vocabulary.term(t))];

    Corpus out;
    out.graph = corpus.graph;
    out.authors = corpus.authors;
    for (const auto& doc : corpus.documents) {
        Document d{doc.id, {}};
        for (TokenId t : doc.tokens) {
            std::string term = lower(corpus.vocabulary.term(t));
            if (freq[term] >= min_count) d.tokens.push_back(out.vocabulary.add(term));
        }
        out.documents.push_back(std::move(d));
    }
    return out;
}

}  // namespace ltai
