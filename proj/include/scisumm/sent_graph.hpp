#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scisumm/embedding.hpp"
#include "scisumm/ingest.hpp"

namespace scisumm {

enum class LinkReason : std::uint8_t {
  Deverbal = 1u << 0,
  Entity = 1u << 1,
  Discourse = 1u << 2,
  Similarity = 1u << 3,
};

using ReasonSet = std::uint8_t;

constexpr ReasonSet operator|(ReasonSet set, LinkReason r) {
  return static_cast<ReasonSet>(set | static_cast<std::uint8_t>(r));
}
constexpr bool has_reason(ReasonSet set, LinkReason r) {
  return (set & static_cast<std::uint8_t>(r)) != 0;
}
constexpr ReasonSet kLinguisticReasons = static_cast<ReasonSet>(
    static_cast<std::uint8_t>(LinkReason::Deverbal) | static_cast<std::uint8_t>(LinkReason::Entity) |
    static_cast<std::uint8_t>(LinkReason::Discourse));

/// Comma-joined reason names in fixed order: deverbal,entity,discourse,similarity.
std::string reasons_to_string(ReasonSet set);

struct SentenceEdge {
  std::size_t i = 0;  // sentence index, i < j
  std::size_t j = 0;
  double weight = 0.0;
  ReasonSet reasons = 0;
};

struct SentenceGraph {
  std::vector<std::size_t> nodes;  // kept sentence indices, ascending
  std::vector<SentenceEdge> edges;  // sorted by (i, j)

  /// Dense adjacency over `nodes` positions.
  Matrix<double> adjacency() const;
  std::size_t position(std::size_t sentence_index) const;
};

/// Number of sentences of the document containing each token (lowercase).
using DocumentFrequency = std::map<std::string, std::size_t, std::less<>>;
DocumentFrequency document_frequency(std::span<const SentenceRecord> sentences);

/// True when `noun` is a nominalization of `verb` under the suffix rules
/// (-tion/-sion/-ion, -ment, -al, -ance/-ence, -ing), allowing a dropped
/// final "e" or a doubled final consonant on the verb stem.
bool is_nominalization(std::string_view verb, std::string_view noun);

/// Some token of `b` nominalizes some token of `a`.
bool link_deverbal(const SentenceRecord& a, const SentenceRecord& b);

/// `a` and `b` share a non-initial capitalized token, or a non-initial
/// content token whose document frequency is at most `rare_df`.
bool link_entity_continuation(const SentenceRecord& a, const SentenceRecord& b,
                              const DocumentFrequency& df, std::size_t rare_df = 2);

const std::vector<std::vector<std::string>>& discourse_markers();

/// `b` opens with a discourse marker.
bool link_discourse_marker(const SentenceRecord& b);

struct GraphOptions {
  double tau = 0.6;
  std::size_t lexical_window = 3;  // kept positions apart for deverbal/entity
  std::size_t rare_df = 2;
};

SentenceGraph build_sentence_graph(std::span<const SentenceRecord> sentences,
                                   const EmbeddingMatrix& embeddings,
                                   std::span<const std::size_t> kept, const GraphOptions& options,
                                   const DocumentFrequency& df);
SentenceGraph build_sentence_graph(std::span<const SentenceRecord> sentences,
                                   const EmbeddingMatrix& embeddings,
                                   std::span<const std::size_t> kept, double tau);

/// One `i j weight reason,reason` line per edge.
std::string dump_graph(const SentenceGraph& graph);

}  // namespace scisumm
