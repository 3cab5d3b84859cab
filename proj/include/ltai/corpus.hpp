#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ltai {

using TokenId = std::uint32_t;

class Vocabulary {
public:
    // Returns the id of `term`, appending it if unseen.
    TokenId add(const std::string& term);
    std::optional<TokenId> find(const std::string& term) const;

    const std::string& term(TokenId id) const { return terms_.at(id); }
    const std::vector<std::string>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TokenId> index_;
};

struct Document {
    std::string id;
    std::vector<TokenId> tokens;
};

// x_{cited <- citing} = 1, i.e. `citing` cites `cited`.
struct Link {
    std::size_t cited;
    std::size_t citing;

    auto operator<=>(const Link&) const = default;
};

class CitationGraph {
public:
    CitationGraph() = default;
    explicit CitationGraph(std::size_t num_docs);

    // Returns false if the link was already present. Self-links and
    // out-of-range ids throw InvalidArgument.
    bool add(std::size_t cited, std::size_t citing);
    bool remove(std::size_t cited, std::size_t citing);
    bool linked(std::size_t cited, std::size_t citing) const;

    // Documents that cite `i` (incoming), ascending.
    const std::vector<std::size_t>& citers(std::size_t i) const { return citers_.at(i); }
    // Documents cited by `j` (outgoing), ascending.
    const std::vector<std::size_t>& references(std::size_t j) const { return references_.at(j); }

    std::size_t num_docs() const { return citers_.size(); }
    std::size_t num_links() const { return num_links_; }

    // All links ordered by (citing, cited).
    std::vector<Link> links() const;

private:
    std::vector<std::vector<std::size_t>> citers_;
    std::vector<std::vector<std::size_t>> references_;
    std::size_t num_links_ = 0;
};

class AuthorTable {
public:
    AuthorTable() = default;
    explicit AuthorTable(std::size_t num_docs) : authors_of_(num_docs) {}

    std::size_t add_author(const std::string& name);
    std::optional<std::size_t> find(const std::string& name) const;

    // Appends author `a` to document `doc`; no-op if already present.
    void assign(std::size_t doc, std::size_t a);
    void unassign(std::size_t doc, std::size_t a);

    const std::vector<std::size_t>& authors_of(std::size_t doc) const { return authors_of_.at(doc); }
    const std::vector<std::size_t>& docs_of(std::size_t a) const { return docs_of_.at(a); }
    const std::string& name(std::size_t a) const { return names_.at(a); }
    const std::vector<std::string>& names() const { return names_; }

    bool anonymous(std::size_t doc) const { return authors_of_.at(doc).empty(); }
    std::size_t num_authors() const { return names_.size(); }
    std::size_t num_docs() const { return authors_of_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> authors_of_;
    std::vector<std::vector<std::size_t>> docs_of_;
};

struct Corpus {
    Vocabulary vocabulary;
    std::vector<Document> documents;
    CitationGraph graph;
    AuthorTable authors;

    std::size_t num_docs() const { return documents.size(); }
    std::size_t vocab_size() const { return vocabulary.size(); }
    std::size_t num_authors() const { return authors.num_authors(); }

    std::optional<std::size_t> find_document(const std::string& id) const;

    // Throws ReferenceError / InvalidArgument on any cross-reference mismatch.
    void validate() const;
};

using Warnings = std::vector<std::string>;

Corpus load_corpus(const std::filesystem::path& documents_path,
                   const std::filesystem::path& authors_path,
                   const std::filesystem::path& citations_path,
                   Warnings* warnings = nullptr);

void write_corpus(const Corpus& corpus,
                  const std::filesystem::path& documents_path,
                  const std::filesystem::path& authors_path,
                  const std::filesystem::path& citations_path);

// `dir`/documents.tsv, authors.tsv, citations.tsv
Corpus load_corpus_dir(const std::filesystem::path& dir, Warnings* warnings = nullptr);
void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir);

// Lowercases every token and drops terms whose corpus frequency (after
// lowercasing) is below `min_count`. The vocabulary is rebuilt in order of
// first appearance.
Corpus prepare_tokens(const Corpus& corpus, std::size_t min_count);

struct StatsReport {
    std::size_t vocab_size = 0;
    std::size_t num_docs = 0;
    std::size_t num_authors = 0;
    double avg_cites_per_doc = 0.0;
    double avg_cites_per_author = 0.0;
};

StatsReport corpus_stats(const Corpus& corpus);
std::string format_stats(const StatsReport& stats);

struct SplitSpec {
    double test_fraction = 1.0 / 3.0;
    double word_holdout_fraction = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DocumentSplit {
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> test_ids;
};

DocumentSplit split_test_documents(const Corpus& corpus, const SplitSpec& spec,
                                   Warnings* warnings = nullptr);

struct WordSplit {
    std::vector<TokenId> observed;
    std::vector<TokenId> heldout;
};

// `fraction` is the held-out share; the observed side gets the rounded-up half.
WordSplit split_document_words(const std::vector<TokenId>& tokens, double fraction,
                               std::uint64_t seed, Warnings* warnings = nullptr);

// Displaces round(percent/100 * |links|) true links onto uniformly chosen
// absent, non-self pairs.
Corpus corrupt_links(const Corpus& corpus, double percent, std::uint64_t seed);

struct CitationRemoval {
    Corpus reduced;
    std::vector<Link> removed;
    std::vector<std::size_t> skipped;
};

CitationRemoval remove_one_citation_per_test_doc(const Corpus& corpus,
                                                 const std::vector<std::size_t>& test_ids,
                                                 std::uint64_t seed);

}  // namespace ltai
