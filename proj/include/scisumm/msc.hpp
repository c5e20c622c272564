#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scisumm/ingest.hpp"

namespace scisumm {

/// Token salience from PageRank over the content-word co-occurrence graph.
using KeyphraseScores = std::map<std::string, double, std::less<>>;

/// Adjacent content tokens co-occur (window 2); stopwords and punctuation
/// are excluded. Scores sum to 1; empty when the cluster has no content word.
KeyphraseScores extract_keyphrases(std::span<const SentenceRecord> sentences);

struct WordNode {
  std::string token;    // lowercase
  std::string surface;  // case of the first occupant
  std::vector<std::pair<std::size_t, std::size_t>> occupants;  // (sentence, token position)
};

struct WordEdge {
  std::size_t frequency = 0;  // sentences traversing the edge
  double weight = 0.0;
};

/// Directed word graph over one cluster. Node 0 is START, node 1 is END.
struct WordGraph {
  static constexpr std::size_t kStart = 0;
  static constexpr std::size_t kEnd = 1;

  std::vector<WordNode> nodes;
  std::map<std::pair<std::size_t, std::size_t>, WordEdge> edges;
  std::vector<std::vector<std::size_t>> sentence_paths;  // START ... END per sentence
  std::vector<std::vector<std::size_t>> successors;      // ascending node ids

  std::size_t frequency(std::size_t node) const;
  const WordEdge* edge(std::size_t from, std::size_t to) const;
  /// Tokens reached by following sentence `s` through the graph.
  std::vector<std::string> reconstruct(std::size_t s) const;
};

/// Maps each token onto an existing node with the same lowercase form or a
/// new node. Content words map when unambiguous; ambiguous ones go to the
/// candidate with the most matching neighbours, then the most occupants.
/// Stopwords and punctuation map only when some neighbour matches.
WordGraph build_word_graph(std::span<const SentenceRecord> sentences);

struct PathCandidate {
  std::vector<std::size_t> nodes;  // START ... END
  double cost = 0.0;               // sum of edge weights
  std::size_t words() const { return nodes.size() >= 2 ? nodes.size() - 2 : 0; }
};

bool is_valid_path(const WordGraph& graph, std::span<const std::size_t> nodes);

/// Yen's loopless paths from START to END in ascending cost. Paths outside
/// [min_words, max_words] are skipped; stops after `k` accepted paths or
/// `k * exploration_factor` enumerated ones.
std::vector<PathCandidate> k_shortest_paths(const WordGraph& graph, std::size_t k,
                                            std::size_t min_words, std::size_t max_words,
                                            std::size_t exploration_factor = 10);

/// Every START->END path, by depth-first search (loopless).
std::vector<PathCandidate> enumerate_paths(const WordGraph& graph, std::size_t max_paths = 100000);

/// cost / (words * (1 + sum of keyphrase scores of path tokens)); lower wins.
double score_path(const WordGraph& graph, std::span<const std::size_t> nodes,
                  const KeyphraseScores& keyphrases);

struct CompressionConfig {
  std::size_t k_paths = 100;
  std::size_t min_words = 8;
  std::size_t max_words = 26;
};

enum class CompressionKind { Compressed, Verbatim, Fallback };

struct CompressionResult {
  std::size_t cluster_id = 0;
  std::size_t min_index = 0;  // smallest sentence index in the cluster
  std::string text;
  std::vector<std::string> tokens;  // lowercase tokens of the output
  std::vector<std::size_t> path;    // word-graph path when compressed
  std::optional<double> score;
  CompressionKind kind = CompressionKind::Compressed;
  bool fallback_used = false;
  bool truncated = false;
  std::size_t candidates = 0;
  std::size_t word_count() const { return tokens.size(); }
};

/// Joins with spaces, attaches punctuation to the preceding token and
/// capitalizes the first character.
std::string detokenize(std::span<const std::string> tokens);

/// `scores` aligns with `sentences` and picks the fallback sentence.
CompressionResult compress_cluster(std::span<const SentenceRecord> sentences,
                                   std::span<const double> scores, const CompressionConfig& config);

struct SummarySentence {
  std::string text;
  std::size_t cluster_id = 0;
  std::size_t min_index = 0;
  std::size_t word_count = 0;
  bool fallback_used = false;
  bool truncated = false;
};

struct SummaryResult {
  std::vector<SummarySentence> sentences;
  std::size_t total_words = 0;

  std::string text() const;  // one sentence per line
};

/// Orders by cluster minimum index and appends until the next sentence would
/// pass `cap_words`; the first sentence is always kept (truncated if needed).
SummaryResult assemble_summary(std::span<const CompressionResult> results, std::size_t cap_words);

}  // namespace scisumm
