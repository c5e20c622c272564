#include "scisumm/ranking.hpp"

#include <algorithm>
#include <numeric>

namespace scisumm {

std::size_t removed_count(std::size_t n, double cutoff_ratio) {
  if (!(cutoff_ratio >= 0.0 && cutoff_ratio < 1.0)) {
    throw ConfigError("cutoff_ratio must lie in [0, 1)");
  }
  // The epsilon keeps products such as 0.29 * 100 from flooring one short.
  const auto removed = static_cast<std::size_t>(std::floor(cutoff_ratio * static_cast<double>(n) + 1e-9));
  return std::min(removed, n == 0 ? 0 : n - 1);
}

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

RankResult select_content(std::span<const double> scores, double cutoff_ratio) {
  RankResult result;
  result.cutoff_ratio = cutoff_ratio;
  result.scores.assign(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  const std::size_t keep = n - removed_count(n, cutoff_ratio);
  auto order = rank_order(scores);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  result.kept = std::move(order);
  return result;
}

}  // namespace scisumm
