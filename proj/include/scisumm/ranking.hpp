#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scisumm/embedding.hpp"

namespace scisumm {

/// Pairwise max(0, cosine) between rows of `vectors`; zero diagonal.
template <typename Derived>
Matrix<typename Derived::Scalar> similarity_matrix(const Eigen::MatrixBase<Derived>& vectors) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = vectors.rows();
  Matrix<Scalar> sim = Matrix<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar c = std::max(Scalar(0), cosine(vectors.row(i), vectors.row(j)));
      sim(i, j) = c;
      sim(j, i) = c;
    }
  }
  return sim;
}

template <typename Scalar>
Matrix<Scalar> similarity_matrix(const BasicEmbeddingMatrix<Scalar>& embeddings) {
  return similarity_matrix(embeddings.vectors);
}

template <typename Scalar>
struct PageRankOptions {
  Scalar damping = Scalar(0.85);
  Scalar tol = Scalar(1e-6);
  int max_iter = 100;
};

template <typename Scalar>
struct PageRankResult {
  Vector<Scalar> scores;
  int iterations = 0;
  bool converged = false;  // false: `scores` is the last iterate
};

/// Damped power iteration on the row-normalized weight matrix. Rows without
/// any weight jump uniformly. Stops when the L1 change drops below `tol`.
template <typename Derived>
PageRankResult<typename Derived::Scalar> pagerank(
    const Eigen::MatrixBase<Derived>& weights,
    const PageRankOptions<typename Derived::Scalar>& options = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = weights.rows();
  PageRankResult<Scalar> result;
  if (n == 0) {
    result.converged = true;
    return result;
  }

  Matrix<Scalar> transition(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar row_sum = weights.row(i).sum();
    if (row_sum > Scalar(0)) {
      transition.row(i) = weights.row(i) / row_sum;
    } else {
      transition.row(i).setConstant(Scalar(1) / static_cast<Scalar>(n));
    }
  }
  const Matrix<Scalar> step = transition.transpose();
  const Scalar teleport = (Scalar(1) - options.damping) / static_cast<Scalar>(n);

  Vector<Scalar> x = Vector<Scalar>::Constant(n, Scalar(1) / static_cast<Scalar>(n));
  for (int it = 0; it < options.max_iter; ++it) {
    Vector<Scalar> next = (options.damping * (step * x)).array() + teleport;
    const Scalar change = (next - x).template lpNorm<1>();
    x.swap(next);
    result.iterations = it + 1;
    if (change < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.scores = x / x.sum();
  return result;
}

struct RankResult {
  std::vector<double> scores;
  std::vector<std::size_t> kept;  // ascending
  double cutoff_ratio = 0.0;
};

/// Number of sentences removed by a cutoff ratio: floor(ratio * n).
std::size_t removed_count(std::size_t n, double cutoff_ratio);

/// Sentence indices by descending score, ties to the lower index.
std::vector<std::size_t> rank_order(std::span<const double> scores);

/// Drops the floor(ratio * n) lowest-scoring sentences; among equal scores the
/// higher index goes first.
RankResult select_content(std::span<const double> scores, double cutoff_ratio);

struct MmrConfig {
  double lambda = 0.5;
  std::size_t budget_words = 600;
  Vector<double> query;
  std::size_t max_sentences = std::numeric_limits<std::size_t>::max();
};

/// Marginal relevance of candidate `i` given the already selected set.
template <typename DerivedE, typename DerivedQ>
typename DerivedE::Scalar mmr_score(const Eigen::MatrixBase<DerivedE>& vectors,
                                    const Eigen::MatrixBase<DerivedQ>& query, double lambda,
                                    Eigen::Index i, std::span<const std::size_t> selected) {
  using Scalar = typename DerivedE::Scalar;
  const Scalar relevance = cosine(vectors.row(i), query.transpose());
  Scalar redundancy = Scalar(0);
  bool any = false;
  for (std::size_t j : selected) {
    const Scalar s = cosine(vectors.row(i), vectors.row(static_cast<Eigen::Index>(j)));
    redundancy = any ? std::max(redundancy, s) : s;
    any = true;
  }
  return Scalar(lambda) * relevance - Scalar(1 - lambda) * redundancy;
}

/// Greedy maximal-marginal-relevance selection. Returns indices in pick order;
/// stops before the pick that would exceed `budget_words` (the first pick is
/// always taken).
template <typename Derived>
std::vector<std::size_t> mmr_select(const Eigen::MatrixBase<Derived>& vectors,
                                    std::span<const std::size_t> word_counts,
                                    const MmrConfig& config) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (config.query.size() != vectors.cols()) {
    throw DimensionMismatch("mmr_select: query dimension does not match embeddings");
  }
  if (word_counts.size() != n) throw DimensionMismatch("mmr_select: word counts do not match");

  std::vector<std::size_t> selected;
  std::vector<bool> taken(n, false);
  std::size_t words = 0;
  while (selected.size() < n && selected.size() < config.max_sentences) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double s = static_cast<double>(
          mmr_score(vectors, config.query, config.lambda, static_cast<Eigen::Index>(i), selected));
      if (best == n || s > best_score) {
        best = i;
        best_score = s;
      }
    }
    if (!selected.empty() && words + word_counts[best] > config.budget_words) break;
    selected.push_back(best);
    taken[best] = true;
    words += word_counts[best];
  }
  return selected;
}

inline std::vector<std::size_t> mmr_select(const EmbeddingMatrix& embeddings,
                                           std::span<const std::size_t> word_counts,
                                           const MmrConfig& config) {
  return mmr_select(embeddings.vectors, word_counts, config);
}

}  // namespace scisumm
