#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ltai/corpus.hpp"
#include "ltai/model.hpp"

namespace ltai {

struct RankResult {
    std::string target;
    double rank = 1.0;  // average rank under ties
    std::size_t candidates = 0;
};

struct EvalReport {
    std::string task;
    std::string aggregate_name;  // "mrr" or "mean_log_predictive"
    std::vector<std::pair<std::string, double>> items;
    double aggregate = 0.0;
    std::vector<std::string> skipped;
    std::map<std::string, std::string> config;
};

// Rows `<item_id>\t<value>`, then `# <aggregate_name>\t<value>` and
// `# items\t<n>`, preceded by `# key\tvalue` config lines.
void write_eval_report(const EvalReport& report, std::ostream& out);

/// Mean over held-out tokens of log sum_k theta_k beta_{k,w}. Throws on an
/// empty holdout.
double word_log_predictive(const Vector& theta_bar, const Matrix& beta_bar, std::span<const TokenId> heldout);

/// Re-fits document i's topic proportions from `observed` with every global
/// parameter frozen, then scores `heldout`. Link terms use the model's
/// current phi_bar for partners.
double word_log_predictive(const TrainedModel& model, const Corpus& corpus, std::size_t doc,
                           std::span<const TokenId> observed, std::span<const TokenId> heldout, int passes = 20);

/// Theta bar of document `doc` re-fit from `observed`.
Vector refit_theta(const TrainedModel& model, const Corpus& corpus, std::size_t doc,
                   std::span<const TokenId> observed, int passes);

/// 1 + #(better) + (#ties - 1) / 2, higher scores are better.
double average_rank(std::span<const double> scores, std::size_t target);

/// log sum_a pi_{i<-ja} N(1 | r_a, 1/c_plus), with responsibilities taken at x = 1.
double citation_log_score(const TrainedModel& model, const AuthorTable& authors, const CitationGraph& graph,
                          std::size_t cited, std::size_t citing);

/// Candidates for citing `cited`: every document except `cited` and its current citers.
std::vector<std::size_t> citation_candidates(const CitationGraph& graph, std::size_t cited);

/// Throws InvalidArgument when `removed.citing` is not a candidate.
RankResult citation_rank(const TrainedModel& model, const Corpus& corpus, const Link& removed,
                         std::span<const std::size_t> candidates);

/// sum_{j in citing} log N(1 | phi_i' diag(authority_a) phi_j, 1/c_plus)
double author_log_score(const Matrix& phi_bar, const Eigen::Ref<const Vector>& authority, std::size_t doc,
                        std::span<const std::size_t> citing, double c_plus);

/// Rank of `true_author` among `candidates` by author_log_score. Throws if
/// the citing set is empty or the true author is not a candidate.
RankResult author_rank(const Matrix& phi_bar, const Matrix& authority, std::size_t doc,
                       std::span<const std::size_t> citing, std::size_t true_author,
                       std::span<const std::size_t> candidates, double c_plus);

/// (1/n) sum 1/rank. Throws on an empty list.
double mrr(std::span<const double> ranks);

/// Largest h with at least h entries >= h.
int h_index(std::vector<std::size_t> citation_counts);

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A x K h-index within clusters formed by argmax_k theta_bar_ik.
IntMatrix topical_h_index(const Matrix& theta_bar, const Corpus& corpus);

/// Mean over targets of H_n / n for each target's candidate count n.
double random_baseline_mrr(std::span<const std::size_t> candidate_counts);

}  // namespace ltai
