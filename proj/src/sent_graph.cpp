#include "scisumm/sent_graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <set>

namespace scisumm {

namespace {

bool all_alpha(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

bool has_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool is_content_token(std::string_view token) {
  return has_alpha(token) && !is_punctuation(token) && !is_stopword(token);
}

std::set<std::string, std::less<>> capitalized_tokens(const SentenceRecord& s) {
  std::set<std::string, std::less<>> out;
  for (std::size_t k = 1; k < s.surface.size(); ++k) {
    const auto c = static_cast<unsigned char>(s.surface[k].front());
    if (std::isupper(c) && is_content_token(s.tokens[k])) out.insert(s.tokens[k]);
  }
  return out;
}

std::set<std::string, std::less<>> content_tokens(const SentenceRecord& s) {
  std::set<std::string, std::less<>> out;
  for (std::size_t k = 1; k < s.tokens.size(); ++k) {
    if (is_content_token(s.tokens[k])) out.insert(s.tokens[k]);
  }
  return out;
}

}  // namespace

std::string reasons_to_string(ReasonSet set) {
  static constexpr std::array<std::pair<LinkReason, const char*>, 4> kNames = {{
      {LinkReason::Deverbal, "deverbal"},
      {LinkReason::Entity, "entity"},
      {LinkReason::Discourse, "discourse"},
      {LinkReason::Similarity, "similarity"},
  }};
  std::string out;
  for (const auto& [reason, name] : kNames) {
    if (!has_reason(set, reason)) continue;
    if (!out.empty()) out.push_back(',');
    out += name;
  }
  return out;
}

Matrix<double> SentenceGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Matrix<double> a = Matrix<double>::Zero(n, n);
  for (const auto& e : edges) {
    const auto p = static_cast<Eigen::Index>(position(e.i));
    const auto q = static_cast<Eigen::Index>(position(e.j));
    a(p, q) = e.weight;
    a(q, p) = e.weight;
  }
  return a;
}

std::size_t SentenceGraph::position(std::size_t sentence_index) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), sentence_index);
  if (it == nodes.end() || *it != sentence_index) {
    throw Error("sentence " + std::to_string(sentence_index) + " is not a graph node");
  }
  return static_cast<std::size_t>(it - nodes.begin());
}

DocumentFrequency document_frequency(std::span<const SentenceRecord> sentences) {
  DocumentFrequency df;
  for (const auto& s : sentences) {
    std::set<std::string_view> seen(s.tokens.begin(), s.tokens.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  return df;
}

bool is_nominalization(std::string_view verb, std::string_view noun) {
  if (verb.size() < 3 || noun.size() <= verb.size() - 1 || verb == noun) return false;
  if (!all_alpha(verb) || !all_alpha(noun) || is_stopword(verb)) return false;

  static constexpr std::array<std::string_view, 8> kSuffixes = {
      "tion", "sion", "ion", "ment", "al", "ance", "ence", "ing"};

  std::array<std::string, 3> stems;
  std::size_t stem_count = 0;
  stems[stem_count++] = std::string(verb);
  if (verb.back() == 'e') stems[stem_count++] = std::string(verb.substr(0, verb.size() - 1));
  if (!is_vowel(verb.back())) stems[stem_count++] = std::string(verb) + verb.back();

  for (std::size_t k = 0; k < stem_count; ++k) {
    const std::string& stem = stems[k];
    if (noun.size() <= stem.size() || noun.substr(0, stem.size()) != stem) continue;
    const std::string_view rest = noun.substr(stem.size());
    if (std::find(kSuffixes.begin(), kSuffixes.end(), rest) != kSuffixes.end()) return true;
  }
  return false;
}

bool link_deverbal(const SentenceRecord& a, const SentenceRecord& b) {
  const std::set<std::string_view> verbs(a.tokens.begin(), a.tokens.end());
  const std::set<std::string_view> nouns(b.tokens.begin(), b.tokens.end());
  for (auto verb : verbs) {
    if (verb.size() < 3) continue;
    for (auto noun : nouns) {
      if (noun.compare(0, 3, verb.substr(0, 3)) != 0) continue;
      if (is_nominalization(verb, noun)) return true;
    }
  }
  return false;
}

bool link_entity_continuation(const SentenceRecord& a, const SentenceRecord& b,
                              const DocumentFrequency& df, std::size_t rare_df) {
  const auto caps_a = capitalized_tokens(a);
  const auto caps_b = capitalized_tokens(b);
  for (const auto& t : caps_a) {
    if (caps_b.count(t) != 0) return true;
  }
  const auto content_a = content_tokens(a);
  const auto content_b = content_tokens(b);
  for (const auto& t : content_a) {
    if (content_b.count(t) == 0) continue;
    auto it = df.find(t);
    if (it != df.end() && it->second <= rare_df) return true;
  }
  return false;
}

const std::vector<std::vector<std::string>>& discourse_markers() {
  static const std::vector<std::vector<std::string>> kMarkers = {
      {"however"},     {"therefore"},    {"thus"},          {"hence"},
      {"moreover"},    {"furthermore"},  {"besides"},       {"nevertheless"},
      {"consequently"}, {"in", "addition"}, {"in", "contrast"}, {"as", "a", "result"},
      {"on", "the", "other", "hand"},    {"but"},           {"also"},
  };
  return kMarkers;
}

bool link_discourse_marker(const SentenceRecord& b) {
  for (const auto& marker : discourse_markers()) {
    if (marker.size() > b.tokens.size()) continue;
    if (std::equal(marker.begin(), marker.end(), b.tokens.begin())) return true;
  }
  return false;
}

SentenceGraph build_sentence_graph(std::span<const SentenceRecord> sentences,
                                   const EmbeddingMatrix& embeddings,
                                   std::span<const std::size_t> kept, const GraphOptions& options,
                                   const DocumentFrequency& df) {
  SentenceGraph graph;
  graph.nodes.assign(kept.begin(), kept.end());
  std::sort(graph.nodes.begin(), graph.nodes.end());
  graph.nodes.erase(std::unique(graph.nodes.begin(), graph.nodes.end()), graph.nodes.end());

  const std::size_t m = graph.nodes.size();
  for (std::size_t p = 0; p < m; ++p) {
    const std::size_t i = graph.nodes[p];
    const SentenceRecord& a = sentences[i];
    for (std::size_t q = p + 1; q < m; ++q) {
      const std::size_t j = graph.nodes[q];
      const SentenceRecord& b = sentences[j];
      ReasonSet reasons = 0;

      double sim = 0.0;
      if (!embeddings.oov[i] && !embeddings.oov[j]) {
        sim = cosine(embeddings.row(static_cast<Eigen::Index>(i)),
                     embeddings.row(static_cast<Eigen::Index>(j)));
        if (sim >= options.tau) reasons = reasons | LinkReason::Similarity;
      }
      if (q == p + 1 && link_discourse_marker(b)) reasons = reasons | LinkReason::Discourse;
      if (q - p <= options.lexical_window) {
        if (link_deverbal(a, b) || link_deverbal(b, a)) reasons = reasons | LinkReason::Deverbal;
        if (link_entity_continuation(a, b, df, options.rare_df)) {
          reasons = reasons | LinkReason::Entity;
        }
      }
      if (reasons == 0) continue;
      const double weight = (reasons & kLinguisticReasons) != 0 ? 1.0 : sim;
      graph.edges.push_back({i, j, weight, reasons});
    }
  }
  return graph;
}

SentenceGraph build_sentence_graph(std::span<const SentenceRecord> sentences,
                                   const EmbeddingMatrix& embeddings,
                                   std::span<const std::size_t> kept, double tau) {
  GraphOptions options;
  options.tau = tau;
  return build_sentence_graph(sentences, embeddings, kept, options, document_frequency(sentences));
}

std::string dump_graph(const SentenceGraph& graph) {
  std::string out;
  char buffer[64];
  for (const auto& e : graph.edges) {
    std::snprintf(buffer, sizeof buffer, "%zu %zu %.6f ", e.i, e.j, e.weight);
    out += buffer;
    out += reasons_to_string(e.reasons);
    out.push_back('\n');
  }
  return out;
}

}  // namespace scisumm
