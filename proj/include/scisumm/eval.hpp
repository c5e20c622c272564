#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scisumm/embedding.hpp"

namespace scisumm {

struct MetricScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool warning = false;  // scored as zero because an input was too short
};

MetricScore make_score(double precision, double recall);

/// Clipped n-gram overlap. A reference shorter than n scores zero with `warning` set.
MetricScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                    std::size_t n);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS over the flattened token sequences.
MetricScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

/// Greedy cosine matching of token vectors (rows); negative cosines clamp to 0.
template <typename DerivedC, typename DerivedR>
MetricScore bertscore(const Eigen::MatrixBase<DerivedC>& candidate,
                      const Eigen::MatrixBase<DerivedR>& reference) {
  if (candidate.rows() == 0 || reference.rows() == 0) {
    MetricScore empty;
    empty.warning = true;
    return empty;
  }
  if (candidate.cols() != reference.cols()) {
    throw DimensionMismatch("bertscore: token vector dimensions differ");
  }
  Matrix<double> sim(candidate.rows(), reference.rows());
  for (Eigen::Index i = 0; i < candidate.rows(); ++i) {
    for (Eigen::Index j = 0; j < reference.rows(); ++j) {
      sim(i, j) = std::max(0.0, static_cast<double>(cosine(candidate.row(i), reference.row(j))));
    }
  }
  const double precision = sim.rowwise().maxCoeff().mean();
  const double recall = sim.colwise().maxCoeff().mean();
  return make_score(precision, recall);
}

struct Histogram {
  double bin_width = 0.005;
  double start = 0.0;
  std::vector<std::size_t> counts;
};

/// Bins of fixed width starting at the minimum; floor(range / width) + 1 bins.
Histogram histogram(std::span<const double> values, double bin_width = 0.005);

struct DocumentScores {
  std::string id;
  MetricScore rouge1;
  MetricScore rouge2;
  MetricScore rougeL;
  std::optional<MetricScore> bert;
  bool bert_truncated = false;
};

struct CorpusMeans {
  MetricScore rouge1;
  MetricScore rouge2;
  MetricScore rougeL;
  std::optional<MetricScore> bert;
};

struct EvalReport {
  std::vector<DocumentScores> documents;  // sorted by id
  CorpusMeans mean;
  std::vector<std::string> unmatched_candidates;
  std::vector<std::string> unmatched_references;
  std::string histogram_metric;  // "bertscore_f1" or "rouge1_f1"
  Histogram histogram;
};

/// Scores candidate/reference pairs matched by id. Token vectors come from
/// `token_source` when given (BERTScore is skipped otherwise); texts longer
/// than `max_tokens` are cut and flagged.
EvalReport evaluate_corpus(const std::map<std::string, std::string>& candidates,
                           const std::map<std::string, std::string>& references,
                           const EmbeddingProvider* token_source = nullptr,
                           std::size_t max_tokens = 512);

nlohmann::json to_json(const EvalReport& report);
/// Table with R1/R2/RL x F/R columns, scores in percent.
std::string format_table(const EvalReport& report);
/// `bin_start,count` lines with a header row.
std::string histogram_csv(const Histogram& h);
std::string histogram_gnuplot(const std::string& csv_path);

}  // namespace scisumm
