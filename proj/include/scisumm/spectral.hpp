#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "scisumm/embedding.hpp"
#include "scisumm/errors.hpp"
#include "scisumm/sent_graph.hpp"

namespace scisumm {

/// clamp(round-half-up(extended_ratio * n_kept), 1, n_kept).
std::size_t num_clusters(std::size_t n_kept, double extended_ratio);

/// L = I - D^{-1/2} A D^{-1/2}; zero-degree rows stay identity rows.
template <typename Derived>
Matrix<typename Derived::Scalar> normalized_laplacian(const Eigen::MatrixBase<Derived>& adjacency) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = adjacency.rows();
  Vector<Scalar> inv_sqrt_degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar d = adjacency.row(i).sum();
    inv_sqrt_degree(i) = d > Scalar(0) ? Scalar(1) / std::sqrt(d) : Scalar(0);
  }
  Matrix<Scalar> laplacian = -(inv_sqrt_degree.asDiagonal() * adjacency * inv_sqrt_degree.asDiagonal());
  laplacian.diagonal().array() += Scalar(1);
  return laplacian;
}

template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> values;   // ascending
  Matrix<Scalar> vectors;  // column k pairs with values(k)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Throws ConvergenceError after `max_sweeps`.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> eig_sym(const Eigen::MatrixBase<Derived>& input,
                                                 int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw DimensionMismatch("eig_sym: matrix is not square");
  if (!input.allFinite()) throw Error("eig_sym: matrix has non-finite entries");

  Matrix<Scalar> a = input;
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar norm = a.norm();
  const Scalar threshold =
      static_cast<Scalar>(std::max<Eigen::Index>(n, 1)) * std::numeric_limits<Scalar>::epsilon() * norm;

  auto off_diagonal = [&] {
    Scalar sum = Scalar(0);
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) sum += a(p, q) * a(p, q);
    }
    return std::sqrt(Scalar(2) * sum);
  };

  SymmetricEigen<Scalar> result;
  bool converged = off_diagonal() <= threshold;
  while (!converged && result.sweeps < max_sweeps) {
    ++result.sweeps;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        Scalar t;
        if (std::abs(theta) > Scalar(1e150)) {
          t = Scalar(1) / (Scalar(2) * theta);
        } else {
          t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
              (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        }
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal() <= threshold;
  }
  if (!converged) {
    throw ConvergenceError("eig_sym: Jacobi rotations did not converge in " +
                           std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  result.values.resize(n);
  result.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    result.values(k) = a(src, src);
    auto col = v.col(src);
    // Sign convention: the largest-magnitude component is positive.
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    result.vectors.col(k) = col(arg) < Scalar(0) ? Vector<Scalar>(-col) : Vector<Scalar>(col);
  }
  return result;
}

/// Deterministic across platforms: 53 high bits of a mt19937_64 draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct KMeansOptions {
  int max_iter = 50;
  double tol = 1e-6;  // relative centroid shift
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  RowMatrix<double> centroids;
  std::vector<double> objective;  // within-cluster squared distance after each assignment
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations. An emptied cluster takes
/// the point farthest from its own centroid.
KMeansResult kmeans(const RowMatrix<double>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

struct ClusterSet {
  std::size_t k = 0;
  double extended_ratio = 0.0;
  std::map<std::size_t, std::size_t> assignment;  // sentence index -> cluster id
  std::vector<std::vector<std::size_t>> clusters;  // members ascending; ids ordered by first member
};

struct SpectralOptions {
  KMeansOptions kmeans;
};

/// Isolated nodes become singletons; the rest are split by k-means on the
/// row-normalized eigenvectors of the smallest Laplacian eigenvalues. The
/// total cluster count is num_clusters(|nodes|, extended_ratio): when there
/// are more isolated nodes than singleton slots, the surplus (latest first)
/// is merged into one cluster.
ClusterSet spectral_cluster(const SentenceGraph& graph, double extended_ratio, std::uint64_t seed,
                            const SpectralOptions& options = {});

}  // namespace scisumm
