#include "scisumm/spectral.hpp"

namespace scisumm {

namespace {

double squared_distance(const RowMatrix<double>& points, Eigen::Index i,
                        const RowMatrix<double>& centroids, Eigen::Index c) {
  return (points.row(i) - centroids.row(c)).squaredNorm();
}

RowMatrix<double> kmeanspp_seed(const RowMatrix<double>& points, std::size_t k,
                                std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  RowMatrix<double> centroids(static_cast<Eigen::Index>(k), points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  auto pick = [&](Eigen::Index idx, std::size_t slot) {
    chosen[static_cast<std::size_t>(idx)] = true;
    centroids.row(static_cast<Eigen::Index>(slot)) = points.row(idx);
  };

  auto first = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n));
  pick(std::min(first, n - 1), 0);

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(points, i, centroids, 0);

  for (std::size_t slot = 1; slot < k; ++slot) {
    double total = 0.0;
    for (double d : d2) total += d;
    Eigen::Index next = -1;
    if (total > 0.0) {
      const double r = uniform01(rng) * total;
      double cumulative = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = d2[static_cast<std::size_t>(i)];
        if (d <= 0.0) continue;
        cumulative += d;
        next = i;
        if (cumulative > r) break;
      }
    } else {
      uniform01(rng);  // keep the draw count independent of the data
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
      }
    }
    pick(next, slot);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centroids, static_cast<Eigen::Index>(slot)));
    }
  }
  return centroids;
}

// Nearest-centroid assignment (ties to the lower id), then empty-cluster repair.
double assign(const RowMatrix<double>& points, RowMatrix<double>& centroids,
              std::vector<std::size_t>& labels) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centroids.rows();
  std::vector<double> cost(static_cast<std::size_t>(n));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_d = squared_distance(points, i, centroids, 0);
    for (Eigen::Index c = 1; c < k; ++c) {
      const double d = squared_distance(points, i, centroids, c);
      if (d < best_d) {
        best = c;
        best_d = d;
      }
    }
    labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    cost[static_cast<std::size_t>(i)] = best_d;
    ++sizes[static_cast<std::size_t>(best)];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] != 0) continue;
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto li = labels[static_cast<std::size_t>(i)];
      if (sizes[li] < 2) continue;
      if (far < 0 || cost[static_cast<std::size_t>(i)] > cost[static_cast<std::size_t>(far)]) far = i;
    }
    if (far < 0) break;  // fewer points than clusters
    --sizes[labels[static_cast<std::size_t>(far)]];
    labels[static_cast<std::size_t>(far)] = static_cast<std::size_t>(c);
    sizes[static_cast<std::size_t>(c)] = 1;
    cost[static_cast<std::size_t>(far)] = 0.0;
    centroids.row(c) = points.row(far);
  }
  double objective = 0.0;
  for (double d : cost) objective += d;
  return objective;
}

ClusterSet finalize(std::vector<std::vector<std::size_t>> groups, double ratio) {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  groups.erase(std::remove_if(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); }),
               groups.end());
  std::sort(groups.begin(), groups.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  ClusterSet set;
  set.extended_ratio = ratio;
  set.k = groups.size();
  for (std::size_t c = 0; c < groups.size(); ++c) {
    for (std::size_t member : groups[c]) set.assignment[member] = c;
  }
  set.clusters = std::move(groups);
  return set;
}

}  // namespace

std::size_t num_clusters(std::size_t n_kept, double extended_ratio) {
  if (n_kept == 0) return 0;
  if (!(extended_ratio > 0.0 && extended_ratio <= 1.0)) {
    throw ConfigError("extended_ratio must lie in (0, 1]");
  }
  const double raw = std::floor(extended_ratio * static_cast<double>(n_kept) + 0.5 + 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, n_kept);
}

KMeansResult kmeans(const RowMatrix<double>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || k > n) throw Error("kmeans: k must lie in [1, number of points]");
  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids = kmeanspp_seed(points, k, rng);
  result.labels.assign(n, 0);

  std::vector<std::size_t> previous;
  for (int it = 0; it < options.max_iter; ++it) {
    result.objective.push_back(assign(points, result.centroids, result.labels));
    result.iterations = it + 1;
    if (it > 0 && result.labels == previous) break;
    previous = result.labels;

    RowMatrix<double> updated = RowMatrix<double>::Zero(static_cast<Eigen::Index>(k), points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      updated.row(static_cast<Eigen::Index>(result.labels[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[result.labels[i]];
    }
    double shift = 0.0;
    double scale = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const auto row = static_cast<Eigen::Index>(c);
      if (counts[c] == 0) {
        updated.row(row) = result.centroids.row(row);
      } else {
        updated.row(row) /= static_cast<double>(counts[c]);
      }
      shift += (updated.row(row) - result.centroids.row(row)).norm();
      scale += result.centroids.row(row).norm();
    }
    result.centroids = std::move(updated);
    if (shift <= options.tol * std::max(scale, 1e-300)) {
      result.objective.push_back(assign(points, result.centroids, result.labels));
      break;
    }
  }
  return result;
}

ClusterSet spectral_cluster(const SentenceGraph& graph, double extended_ratio, std::uint64_t seed,
                            const SpectralOptions& options) {
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw Error("spectral_cluster: graph has no nodes");
  const std::size_t k = num_clusters(n, extended_ratio);

  const Matrix<double> adjacency = graph.adjacency();
  std::vector<std::size_t> isolated;   // positions
  std::vector<std::size_t> connected;  // positions
  for (std::size_t p = 0; p < n; ++p) {
    (adjacency.row(static_cast<Eigen::Index>(p)).sum() > 0.0 ? connected : isolated).push_back(p);
  }

  const std::size_t k_connected =
      connected.empty() ? 0
                        : std::clamp<std::size_t>(k > isolated.size() ? k - isolated.size() : 0, 1,
                                                  connected.size());
  const std::size_t slots = k - k_connected;

  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> merged;  // isolated nodes sharing one cluster
  if (isolated.size() <= slots) {
    for (std::size_t p : isolated) groups.push_back({graph.nodes[p]});
  } else if (slots == 0) {
    for (std::size_t p : isolated) merged.push_back(graph.nodes[p]);
  } else {
    for (std::size_t r = 0; r < isolated.size(); ++r) {
      if (r + 1 < slots) {
        groups.push_back({graph.nodes[isolated[r]]});
      } else {
        merged.push_back(graph.nodes[isolated[r]]);
      }
    }
  }

  if (!connected.empty()) {
    std::vector<std::vector<std::size_t>> parts(k_connected);
    if (k_connected == 1) {
      for (std::size_t p : connected) parts[0].push_back(graph.nodes[p]);
    } else if (k_connected == connected.size()) {
      for (std::size_t r = 0; r < connected.size(); ++r) parts[r].push_back(graph.nodes[connected[r]]);
    } else {
      const auto m = static_cast<Eigen::Index>(connected.size());
      Matrix<double> sub(m, m);
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
          sub(r, c) = adjacency(static_cast<Eigen::Index>(connected[static_cast<std::size_t>(r)]),
                                static_cast<Eigen::Index>(connected[static_cast<std::size_t>(c)]));
        }
      }
      const auto eig = eig_sym(normalized_laplacian(sub));
      RowMatrix<double> embedding = eig.vectors.leftCols(static_cast<Eigen::Index>(k_connected));
      for (Eigen::Index r = 0; r < m; ++r) {
        const double norm = embedding.row(r).norm();
        if (norm > 0.0) embedding.row(r) /= norm;
      }
      const KMeansResult km = kmeans(embedding, k_connected, seed, options.kmeans);
      for (std::size_t r = 0; r < connected.size(); ++r) {
        parts[km.labels[r]].push_back(graph.nodes[connected[r]]);
      }
    }
    if (slots == 0 && !merged.empty()) {
      parts[0].insert(parts[0].end(), merged.begin(), merged.end());
      merged.clear();
    }
    for (auto& part : parts) groups.push_back(std::move(part));
  }
  if (!merged.empty()) groups.push_back(std::move(merged));
  return finalize(std::move(groups), extended_ratio);
}

}  // namespace scisumm
