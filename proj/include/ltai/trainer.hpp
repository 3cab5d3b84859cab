#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "ltai/corpus.hpp"
#include "ltai/model.hpp"

namespace ltai {

// Held-out words of documents whose observed half sits in the training corpus.
struct HeldOutWords {
    std::vector<std::size_t> docs;
    std::vector<std::vector<TokenId>> heldout;
};

struct TrainConfig {
    HyperParams hyper;
    LearningRate rate;
    std::size_t max_iters = 200;
    std::size_t eval_every = 5;
    double tolerance = 1e-4;       // relative change of the held-out predictive
    std::size_t patience = 5;      // consecutive evaluations under tolerance
    Mode mode = Mode::Full;
    double corrupt_percent = 0.0;  // LTAI-n%: displaced links before training
    std::optional<double> constant_c;  // ConstantC precision, defaults to c_minus
    bool batch = false;            // S_S = D, rho = 1, every negative partner
    bool exact_pi = false;
    int doc_passes = 2;
    int eval_passes = 20;
    std::size_t sep_author_iters = 20;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const;
    // Hyperparameters after mode adjustments (plain LDA zeroes both precisions).
    HyperParams effective_hyper(std::size_t num_docs) const;
};

struct MetricRecord {
    std::uint64_t iteration = 0;
    std::uint64_t doc_updates = 0;
    double elapsed_seconds = 0.0;
    std::optional<double> heldout_log_predictive;
};

struct TrainResult {
    TrainedModel model;
    std::vector<MetricRecord> history;
    bool converged = false;
};

using MetricSink = std::function<void(const MetricRecord&)>;

// Fresh model state for `corpus` under `config`.
TrainedModel initialize_model(const Corpus& corpus, const TrainConfig& config);

// Runs the docs -> authors -> lambda loop until convergence on `monitor`
// (if given) or max_iters total iterations. `resume` continues from a
// previous model's state and iteration counter.
TrainResult train(const Corpus& corpus, const TrainConfig& config, const HeldOutWords* monitor = nullptr,
                  const TrainedModel* resume = nullptr, const MetricSink& sink = {});

// One iteration in place; returns the number of document updates made.
std::size_t train_iteration(TrainedModel& model, const Corpus& corpus, const TrainConfig& config,
                            bool update_content, bool update_authors);

// Mean over monitored documents of the per-word log predictive.
double heldout_log_predictive(const TrainedModel& model, const Corpus& corpus, const HeldOutWords& monitor,
                              int passes, std::size_t threads = 1);

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace ltai
