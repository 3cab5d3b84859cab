#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ltai/corpus.hpp"
#include "ltai/evaluation.hpp"
#include "ltai/model.hpp"
#include "ltai/trainer.hpp"

namespace ltai {

// Word prediction: test documents keep only their observed half for training.
struct WordTask {
    Corpus train_corpus;
    HeldOutWords targets;
};

WordTask prepare_word_task(const Corpus& corpus, const SplitSpec& split, Warnings* warnings = nullptr);
EvalReport evaluate_words(const TrainedModel& model, const Corpus& train_corpus, const HeldOutWords& targets,
                          int passes = 20, std::size_t threads = 1);

// Citation prediction: one link removed per linked test document.
struct CitationTask {
    Corpus reduced;
    std::vector<Link> targets;
    std::vector<std::size_t> skipped;
};

CitationTask prepare_citation_task(const Corpus& corpus, const SplitSpec& split);
EvalReport evaluate_citations(const TrainedModel& model, const Corpus& reduced, const std::vector<Link>& targets,
                              std::size_t threads = 1);

// Author prediction: one author removed per cited test document.
struct AuthorTarget {
    std::size_t doc;
    std::size_t author;
};

struct AuthorTask {
    Corpus reduced;
    std::vector<AuthorTarget> targets;
    std::vector<std::size_t> skipped;
};

AuthorTask prepare_author_task(const Corpus& corpus, const SplitSpec& split);

// `authority` replaces the model's eta when given (topical h-index
// baseline); `c_plus` defaults to the model's positive precision.
EvalReport evaluate_authors(const TrainedModel& model, const Corpus& reduced, const std::vector<AuthorTarget>& targets,
                            const Matrix* authority = nullptr, std::optional<double> c_plus = std::nullopt);

// Re-indexes vocabulary and authors to the model's order so a corpus read
// back from disk lines up with the trained arrays. Throws ReferenceError for
// a term or author the model does not know.
Corpus align_to_model(const Corpus& corpus, const TrainedModel& model);

// Target files written next to a trained model so `evaluate` can replay the task.
void write_word_targets(const Corpus& train_corpus, const HeldOutWords& targets, const std::filesystem::path& path);
HeldOutWords read_word_targets(const Corpus& train_corpus, const std::filesystem::path& path);
void write_citation_targets(const Corpus& corpus, const std::vector<Link>& targets, const std::filesystem::path& path);
std::vector<Link> read_citation_targets(const Corpus& corpus, const std::filesystem::path& path);
void write_author_targets(const Corpus& corpus, const std::vector<AuthorTarget>& targets,
                          const std::filesystem::path& path);
std::vector<AuthorTarget> read_author_targets(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace ltai
