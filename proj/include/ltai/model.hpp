#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltai/corpus.hpp"
#include "ltai/state.hpp"

namespace ltai {

enum class Mode {
    Full,
    PlainLda,   // link terms dropped, authors never touched
    ConstantC,  // one precision for positive and negative links
    Separate,   // content to convergence first, then authors on frozen topics
};

const char* mode_name(Mode mode);
Mode parse_mode(const std::string& name);

// Everything needed to resume training or to predict.
struct TrainedModel {
    VariationalState content;
    AuthorState authors;
    HyperParams hyper;  // effective values (mode adjustments applied)
    LearningRate rate;
    Mode mode = Mode::Full;
    std::uint64_t seed = 0;
    std::uint64_t iteration = 0;
    std::uint64_t doc_updates = 0;
    bool ground_truth = false;

    std::vector<std::string> vocabulary;
    std::vector<std::string> doc_ids;
    std::vector<std::string> author_names;
    std::vector<std::vector<std::size_t>> doc_authors;
    std::vector<std::size_t> doc_citations;  // citations received within the corpus

    bool uses_links() const { return mode != Mode::PlainLda; }

    Matrix theta() const;  // normalized gamma rows
    Matrix beta() const;   // normalized lambda rows

    // Rebuilds the author table recorded in the model.
    AuthorTable author_table() const;
};

// Copies corpus metadata (names, authorship, citation counts) into the model.
void attach_metadata(TrainedModel& model, const Corpus& corpus);

}  // namespace ltai
