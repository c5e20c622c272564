#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "scisumm/spectral.hpp"

using namespace scisumm;

namespace {

SentenceGraph graph_from(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                         double weight = 1.0) {
  SentenceGraph g;
  g.nodes.resize(n);
  std::iota(g.nodes.begin(), g.nodes.end(), std::size_t{0});
  for (auto [i, j] : pairs) {
    SentenceEdge e;
    e.i = std::min(i, j);
    e.j = std::max(i, j);
    e.weight = weight;
    e.reasons = static_cast<ReasonSet>(LinkReason::Similarity);
    g.edges.push_back(e);
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const auto& a, const auto& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
  return g;
}

std::vector<std::pair<std::size_t, std::size_t>> clique(std::size_t from, std::size_t to) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = from; i < to; ++i) {
    for (std::size_t j = i + 1; j < to; ++j) out.emplace_back(i, j);
  }
  return out;
}

std::set<std::set<std::size_t>> partition(const ClusterSet& c) {
  std::set<std::set<std::size_t>> out;
  for (const auto& members : c.clusters) out.emplace(members.begin(), members.end());
  return out;
}

// Random graph made of connected components of size >= 2 (no isolated nodes).
Eigen::MatrixXd random_components(std::mt19937_64& rng, std::size_t& component_count) {
  std::uniform_int_distribution<std::size_t> parts(1, 4), size(2, 5);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  component_count = parts(rng);
  std::vector<std::size_t> sizes(component_count);
  for (auto& s : sizes) s = size(rng);
  const auto n = static_cast<Eigen::Index>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index offset = 0;
  for (std::size_t s : sizes) {
    const auto m = static_cast<Eigen::Index>(s);
    for (Eigen::Index i = 1; i < m; ++i) {
      const Eigen::Index parent = offset + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(i));
      a(offset + i, parent) = a(parent, offset + i) = w(rng);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        if (rng() % 3 == 0) a(offset + i, offset + j) = a(offset + j, offset + i) = w(rng);
      }
    }
    offset += m;
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(n);
  for (Eigen::Index i = 0; i < n; ++i) p.indices()(i) = perm[static_cast<std::size_t>(i)];
  return p * a * p.transpose();
}

}  // namespace

TEST(NumClusters, Examples) {
  EXPECT_EQ(num_clusters(100, 0.3), 30u);
  EXPECT_EQ(num_clusters(1, 0.3), 1u);
  EXPECT_EQ(num_clusters(10, 0.3), 3u);
  EXPECT_EQ(num_clusters(5, 0.3), 2u);  // 1.5 rounds half up
  EXPECT_EQ(num_clusters(4, 1.0), 4u);
  EXPECT_EQ(num_clusters(0, 0.3), 0u);
  EXPECT_THROW(num_clusters(4, 0.0), ConfigError);
  EXPECT_THROW(num_clusters(4, 1.5), ConfigError);
}

TEST(Laplacian, ClosedForms) {
  EXPECT_TRUE(normalized_laplacian(Eigen::MatrixXd::Zero(3, 3)).isIdentity(0));
  Eigen::Matrix2d a;
  a << 0, 1, 1, 0;
  Eigen::Matrix2d want;
  want << 1, -1, -1, 1;
  EXPECT_TRUE(normalized_laplacian(a).isApprox(want, 1e-15));
  const auto e = eig_sym(normalized_laplacian(a));
  EXPECT_NEAR(e.values(0), 0.0, 1e-14);
  EXPECT_NEAR(e.values(1), 2.0, 1e-14);

  Eigen::Matrix4d two_edges = Eigen::Matrix4d::Zero();
  two_edges(0, 1) = two_edges(1, 0) = 1;
  two_edges(2, 3) = two_edges(3, 2) = 1;
  const auto v = eig_sym(normalized_laplacian(two_edges)).values;
  EXPECT_NEAR(v(0), 0.0, 1e-14);
  EXPECT_NEAR(v(1), 0.0, 1e-14);
  EXPECT_NEAR(v(2), 2.0, 1e-14);
}

TEST(EigSym, Examples) {
  EXPECT_TRUE(eig_sym(Eigen::Matrix3d::Identity()).values.isApprox(Eigen::Vector3d(1, 1, 1)));
  Eigen::Matrix3d d = Eigen::Vector3d(3, 1, 2).asDiagonal();
  EXPECT_TRUE(eig_sym(d).values.isApprox(Eigen::Vector3d(1, 2, 3)));
  Eigen::Matrix2d m;
  m << 2, 1, 1, 2;
  const auto e = eig_sym(m);
  EXPECT_NEAR(e.values(0), 1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 3.0, 1e-14);
  EXPECT_EQ(e.vectors.rows(), 2);
}

TEST(EigSym, MatchesEigenSolverOnRandomSymmetric) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 15;
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) b(i, j) = g(rng);
    }
    const Eigen::MatrixXd m = (b + b.transpose()) / 2.0;
    const auto got = eig_sym(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
    EXPECT_LT((got.values - ref.eigenvalues()).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, m.norm()));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double residual = (m * got.vectors.col(k) - got.values(k) * got.vectors.col(k)).norm();
      EXPECT_LE(residual, 1e-8 * std::max(m.norm(), 1e-300));
    }
    const Eigen::MatrixXd gram = got.vectors.transpose() * got.vectors;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(n, n)).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(EigSym, RejectsBadInput) {
  EXPECT_THROW(eig_sym(Eigen::MatrixXd::Zero(2, 3)), DimensionMismatch);
  Eigen::Matrix2d nan_matrix;
  nan_matrix << 1, std::nan(""), std::nan(""), 1;
  EXPECT_THROW(eig_sym(nan_matrix), Error);
  std::mt19937_64 rng(1);
  const auto m = oracle::random_similarity(rng, 8);
  EXPECT_THROW(eig_sym(m, 0), ConvergenceError);
}

TEST(EigSym, ZeroEigenvalueMultiplicityIsComponentCount) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t planted = 0;
    const auto a = random_components(rng, planted);
    ASSERT_EQ(oracle::components(a), planted);
    const Eigen::MatrixXd l = normalized_laplacian(a);
    const auto e = eig_sym(l);
    std::size_t zeros = 0;
    for (Eigen::Index k = 0; k < e.values.size(); ++k) zeros += std::abs(e.values(k)) < 1e-8 ? 1 : 0;
    EXPECT_EQ(zeros, planted);
    EXPECT_GE(e.values.minCoeff(), -1e-12);
    EXPECT_LE(e.values.maxCoeff(), 2.0 + 1e-12);
    for (Eigen::Index k = 0; k < e.values.size(); ++k) {
      EXPECT_LE((l * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm(), 1e-8 * l.norm());
    }
  }
}

TEST(KMeans, ObjectiveNonIncreasingAndDeterministic) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 40; ++trial) {
    RowMatrix<double> pts(30, 3);
    for (Eigen::Index i = 0; i < 30; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) pts(i, j) = g(rng) + static_cast<double>(i % 3) * 2.0;
    }
    const std::size_t k = 1 + static_cast<std::size_t>(trial % 6);
    const auto r = kmeans(pts, k, static_cast<std::uint64_t>(trial));
    for (std::size_t s = 1; s < r.objective.size(); ++s) EXPECT_LE(r.objective[s], r.objective[s - 1] + 1e-12);
    std::set<std::size_t> used(r.labels.begin(), r.labels.end());
    EXPECT_EQ(used.size(), k);
    const auto again = kmeans(pts, k, static_cast<std::uint64_t>(trial));
    EXPECT_EQ(again.labels, r.labels);
  }
  RowMatrix<double> one(1, 2);
  one << 1, 2;
  EXPECT_THROW(kmeans(one, 2, 0), Error);
}

TEST(KMeans, DuplicatePointsStillFillEveryCluster) {
  RowMatrix<double> pts = RowMatrix<double>::Zero(4, 2);
  const auto r = kmeans(pts, 3, 7);
  EXPECT_EQ(std::set<std::size_t>(r.labels.begin(), r.labels.end()).size(), 3u);
}

TEST(Spectral, TwoCliquesRecoveredForEverySeed) {
  auto pairs = clique(0, 5);
  const auto second = clique(5, 10);
  pairs.insert(pairs.end(), second.begin(), second.end());
  const auto g = graph_from(10, pairs);
  const std::set<std::set<std::size_t>> want = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = spectral_cluster(g, 0.2, seed);
    EXPECT_EQ(c.k, 2u);
    EXPECT_EQ(partition(c), want) << seed;
  }
}

TEST(Spectral, SmallCases) {
  const auto single = spectral_cluster(graph_from(1, {}), 0.3, 13);
  EXPECT_EQ(single.k, 1u);
  EXPECT_EQ(single.clusters, (std::vector<std::vector<std::size_t>>{{0}}));

  const auto all_single = spectral_cluster(graph_from(4, clique(0, 4)), 1.0, 13);
  EXPECT_EQ(all_single.k, 4u);
  EXPECT_THROW(spectral_cluster(SentenceGraph{}, 0.3, 13), Error);
}

TEST(Spectral, IsolatedNodesBecomeSingletons) {
  // 0..5 clique, 6 and 7 isolated; k = round(0.4 * 8) = 3.
  const auto c = spectral_cluster(graph_from(8, clique(0, 6)), 0.4, 13);
  EXPECT_EQ(c.k, 3u);
  EXPECT_EQ(partition(c), (std::set<std::set<std::size_t>>{{0, 1, 2, 3, 4, 5}, {6}, {7}}));
}

TEST(Spectral, SurplusIsolatedNodesMerge) {
  // 0..3 clique, 4..8 isolated; k = round(0.3 * 9) = 3, so one slot for the
  // clique, one singleton and one merged cluster of the remaining isolated nodes.
  const auto c = spectral_cluster(graph_from(9, clique(0, 4)), 0.3, 13);
  EXPECT_EQ(c.k, 3u);
  EXPECT_EQ(partition(c), (std::set<std::set<std::size_t>>{{0, 1, 2, 3}, {4}, {5, 6, 7, 8}}));

  // With no slot left the isolated nodes join the connected cluster.
  const auto all_isolated = spectral_cluster(graph_from(3, {}), 0.3, 13);
  EXPECT_EQ(all_isolated.k, 1u);
  const auto joined = spectral_cluster(graph_from(5, {{0, 1}}), 0.2, 13);
  EXPECT_EQ(joined.k, 1u);
}

TEST(Spectral, AssignmentInvariants) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 25;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng() % 5 == 0) pairs.emplace_back(i, j);
      }
    }
    const auto g = graph_from(n, pairs, 0.7);
    const double ratio = 0.1 + 0.1 * static_cast<double>(trial % 9);
    const auto c = spectral_cluster(g, ratio, 13);
    EXPECT_GE(c.k, 1u);
    EXPECT_LE(c.k, num_clusters(n, ratio));
    EXPECT_EQ(c.clusters.size(), c.k);
    EXPECT_EQ(c.assignment.size(), n);
    std::size_t total = 0;
    for (std::size_t id = 0; id < c.clusters.size(); ++id) {
      ASSERT_FALSE(c.clusters[id].empty());
      if (id > 0) {
        EXPECT_LT(c.clusters[id - 1].front(), c.clusters[id].front());
      }
      for (std::size_t m : c.clusters[id]) EXPECT_EQ(c.assignment.at(m), id);
      total += c.clusters[id].size();
    }
    EXPECT_EQ(total, n);
    const auto again = spectral_cluster(g, ratio, 13);
    EXPECT_EQ(again.clusters, c.clusters);
  }
}

TEST(Spectral, PermutationEquivariance) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    // Three cliques of sizes 3..5 under a random relabeling.
    std::vector<std::size_t> sizes = {3 + rng() % 3, 3 + rng() % 3, 3 + rng() % 3};
    const std::size_t n = sizes[0] + sizes[1] + sizes[2];
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), std::size_t{0});
    std::shuffle(label.begin(), label.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> pairs, relabeled;
    std::size_t offset = 0;
    for (std::size_t s : sizes) {
      const auto c = clique(offset, offset + s);
      pairs.insert(pairs.end(), c.begin(), c.end());
      offset += s;
    }
    for (auto [i, j] : pairs) relabeled.emplace_back(label[i], label[j]);
    const double ratio = 3.0 / static_cast<double>(n);
    const auto base = partition(spectral_cluster(graph_from(n, pairs), ratio, 13));
    std::set<std::set<std::size_t>> mapped;
    for (const auto& members : base) {
      std::set<std::size_t> m;
      for (std::size_t x : members) m.insert(label[x]);
      mapped.insert(m);
    }
    EXPECT_EQ(partition(spectral_cluster(graph_from(n, relabeled), ratio, 13)), mapped);
    EXPECT_EQ(base.size(), 3u);
  }
}

TEST(Spectral, NodesAreSentenceIndices) {
  SentenceGraph g;
  g.nodes = {2, 5, 9};
  g.edges = {{2, 5, 1.0, static_cast<ReasonSet>(LinkReason::Entity)}};
  const auto c = spectral_cluster(g, 0.67, 13);
  EXPECT_EQ(partition(c), (std::set<std::set<std::size_t>>{{2, 5}, {9}}));
  EXPECT_EQ(c.assignment.count(9), 1u);
}
