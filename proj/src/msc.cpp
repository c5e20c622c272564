#include "scisumm/msc.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <queue>
#include <set>

#include "scisumm/ranking.hpp"

namespace scisumm {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool is_content(std::string_view token) { return !is_punctuation(token) && !is_stopword(token); }

bool attaches_left(std::string_view token) {
  static constexpr std::string_view kClosing = ".,;:!?)]}%\"'";
  return token.size() == 1 && kClosing.find(token.front()) != std::string_view::npos;
}

bool attaches_right(std::string_view token) {
  return token.size() == 1 && (token == "(" || token == "[" || token == "{");
}

struct SpurSearch {
  const WordGraph& graph;
  const std::vector<bool>& blocked_nodes;
  const std::set<std::pair<std::size_t, std::size_t>>& blocked_edges;

  std::optional<std::vector<std::size_t>> run(std::size_t source) const {
    const std::size_t n = graph.nodes.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> prev(n, kNone);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      if (u == WordGraph::kEnd) break;
      for (std::size_t v : graph.successors[u]) {
        if (blocked_nodes[v] || blocked_edges.count({u, v}) != 0) continue;
        const double nd = d + graph.edge(u, v)->weight;
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
          queue.emplace(nd, v);
        }
      }
    }
    if (prev[WordGraph::kEnd] == kNone && source != WordGraph::kEnd) return std::nullopt;
    std::vector<std::size_t> path;
    for (std::size_t v = WordGraph::kEnd; v != kNone; v = prev[v]) {
      path.push_back(v);
      if (v == source) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }
};

double path_cost(const WordGraph& graph, std::span<const std::size_t> nodes) {
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) cost += graph.edge(nodes[i], nodes[i + 1])->weight;
  return cost;
}

struct CandidateOrder {
  bool operator()(const PathCandidate& a, const PathCandidate& b) const {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.nodes < b.nodes;
  }
};

CompressionResult whole_sentence(const SentenceRecord& sentence, std::size_t max_words,
                                 CompressionKind kind) {
  CompressionResult r;
  r.kind = kind;
  r.fallback_used = true;
  if (sentence.word_count > max_words) {
    r.truncated = true;
    r.tokens.assign(sentence.tokens.begin(), sentence.tokens.begin() + static_cast<long>(max_words));
    r.text = detokenize(std::span<const std::string>(sentence.surface.data(), max_words));
  } else {
    r.tokens = sentence.tokens;
    r.text = sentence.text;
  }
  return r;
}

}  // namespace

KeyphraseScores extract_keyphrases(std::span<const SentenceRecord> sentences) {
  std::map<std::string, std::size_t, std::less<>> ids;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (is_content(t)) ids.emplace(t, 0);
    }
  }
  KeyphraseScores scores;
  if (ids.empty()) return scores;
  std::size_t next = 0;
  for (auto& [token, id] : ids) id = next++;

  Matrix<double> weights = Matrix<double>::Zero(static_cast<Eigen::Index>(ids.size()),
                                                static_cast<Eigen::Index>(ids.size()));
  for (const auto& s : sentences) {
    for (std::size_t p = 0; p + 1 < s.tokens.size(); ++p) {
      const auto& a = s.tokens[p];
      const auto& b = s.tokens[p + 1];
      if (a == b || !is_content(a) || !is_content(b)) continue;
      const auto ia = static_cast<Eigen::Index>(ids.find(a)->second);
      const auto ib = static_cast<Eigen::Index>(ids.find(b)->second);
      weights(ia, ib) += 1.0;
      weights(ib, ia) += 1.0;
    }
  }
  PageRankOptions<double> options;
  options.tol = 1e-12;
  options.max_iter = 1000;
  const auto ranked = pagerank(weights, options);
  for (const auto& [token, id] : ids) scores.emplace(token, ranked.scores(static_cast<Eigen::Index>(id)));
  return scores;
}

std::size_t WordGraph::frequency(std::size_t node) const {
  if (node == kStart || node == kEnd) return sentence_paths.size();
  return nodes[node].occupants.size();
}

const WordEdge* WordGraph::edge(std::size_t from, std::size_t to) const {
  auto it = edges.find({from, to});
  return it == edges.end() ? nullptr : &it->second;
}

std::vector<std::string> WordGraph::reconstruct(std::size_t s) const {
  std::vector<std::string> out;
  const auto& path = sentence_paths[s];
  for (std::size_t i = 1; i + 1 < path.size(); ++i) out.push_back(nodes[path[i]].token);
  return out;
}

WordGraph build_word_graph(std::span<const SentenceRecord> sentences) {
  WordGraph g;
  g.nodes.push_back({"<s>", "<s>", {}});
  g.nodes.push_back({"</s>", "</s>", {}});
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_token;

  auto token_at = [&](std::size_t s, std::ptrdiff_t p) -> std::string_view {
    const auto& toks = sentences[s].tokens;
    if (p < 0) return "<s>";
    if (static_cast<std::size_t>(p) >= toks.size()) return "</s>";
    return toks[static_cast<std::size_t>(p)];
  };

  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& toks = sentences[s].tokens;
    std::vector<std::size_t> mapping(toks.size(), kNone);

    auto candidates = [&](std::size_t p) {
      std::vector<std::size_t> out;
      auto it = by_token.find(toks[p]);
      if (it == by_token.end()) return out;
      for (std::size_t v : it->second) {
        const auto& occ = g.nodes[v].occupants;
        if (occ.empty() || occ.back().first != s) out.push_back(v);
      }
      return out;
    };
    auto overlap = [&](std::size_t v, std::size_t p) {
      std::size_t count = 0;
      const auto pp = static_cast<std::ptrdiff_t>(p);
      for (const auto& [s2, p2] : g.nodes[v].occupants) {
        const auto q = static_cast<std::ptrdiff_t>(p2);
        if (token_at(s2, q - 1) == token_at(s, pp - 1)) ++count;
        if (token_at(s2, q + 1) == token_at(s, pp + 1)) ++count;
      }
      return count;
    };
    auto place = [&](std::size_t p, std::size_t v) {
      g.nodes[v].occupants.emplace_back(s, p);
      mapping[p] = v;
    };
    auto fresh = [&](std::size_t p) {
      const std::size_t v = g.nodes.size();
      g.nodes.push_back({toks[p], sentences[s].surface[p], {}});
      by_token[toks[p]].push_back(v);
      place(p, v);
    };
    // Highest overlap, then most occupants, then lowest id.
    auto best_of = [&](const std::vector<std::size_t>& cands, std::size_t p, std::size_t& best_overlap) {
      std::size_t best = kNone;
      best_overlap = 0;
      for (std::size_t v : cands) {
        const std::size_t o = overlap(v, p);
        if (best == kNone || o > best_overlap ||
            (o == best_overlap && g.nodes[v].occupants.size() > g.nodes[best].occupants.size())) {
          best = v;
          best_overlap = o;
        }
      }
      return best;
    };

    std::vector<std::size_t> ambiguous;
    for (std::size_t p = 0; p < toks.size(); ++p) {
      if (!is_content(toks[p])) continue;
      const auto cands = candidates(p);
      if (cands.empty()) {
        fresh(p);
      } else if (cands.size() == 1) {
        place(p, cands.front());
      } else {
        ambiguous.push_back(p);
      }
    }
    for (std::size_t p : ambiguous) {
      const auto cands = candidates(p);
      std::size_t o = 0;
      if (cands.empty()) {
        fresh(p);
      } else {
        place(p, best_of(cands, p, o));
      }
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < toks.size(); ++p) {
        if (mapping[p] != kNone) continue;
        if (is_punctuation(toks[p]) != (pass == 1)) continue;
        const auto cands = candidates(p);
        std::size_t o = 0;
        const std::size_t best = best_of(cands, p, o);
        if (best != kNone && o > 0) {
          place(p, best);
        } else {
          fresh(p);
        }
      }
    }

    std::vector<std::size_t> path;
    path.reserve(toks.size() + 2);
    path.push_back(WordGraph::kStart);
    path.insert(path.end(), mapping.begin(), mapping.end());
    path.push_back(WordGraph::kEnd);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) ++g.edges[{path[i], path[i + 1]}].frequency;
    g.sentence_paths.push_back(std::move(path));
  }

  // Node positions per sentence for the distance term of the edge weights.
  std::vector<std::map<std::size_t, std::size_t>> positions(g.sentence_paths.size());
  for (std::size_t s = 0; s < g.sentence_paths.size(); ++s) {
    for (std::size_t i = 0; i < g.sentence_paths[s].size(); ++i) positions[s][g.sentence_paths[s][i]] = i;
  }
  for (auto& [key, e] : g.edges) {
    const auto [u, v] = key;
    double inverse_distance = 0.0;
    for (const auto& pos : positions) {
      auto pu = pos.find(u);
      auto pv = pos.find(v);
      if (pu == pos.end() || pv == pos.end() || pu->second >= pv->second) continue;
      inverse_distance += 1.0 / static_cast<double>(pv->second - pu->second);
    }
    const auto fu = static_cast<double>(g.frequency(u));
    const auto fv = static_cast<double>(g.frequency(v));
    e.weight = ((fu + fv) / inverse_distance) / (fu * fv);
  }

  // Sentence-initial capitals are not part of the word; prefer a mid-sentence occupant's case.
  for (std::size_t v = 2; v < g.nodes.size(); ++v) {
    for (const auto& [s, p] : g.nodes[v].occupants) {
      if (p == 0) continue;
      g.nodes[v].surface = sentences[s].surface[p];
      break;
    }
  }

  g.successors.assign(g.nodes.size(), {});
  for (const auto& [key, e] : g.edges) g.successors[key.first].push_back(key.second);
  return g;
}

bool is_valid_path(const WordGraph& graph, std::span<const std::size_t> nodes) {
  if (nodes.size() < 2 || nodes.front() != WordGraph::kStart || nodes.back() != WordGraph::kEnd) {
    return false;
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i] >= graph.nodes.size() || graph.edge(nodes[i], nodes[i + 1]) == nullptr) return false;
  }
  return true;
}

std::vector<PathCandidate> k_shortest_paths(const WordGraph& graph, std::size_t k,
                                            std::size_t min_words, std::size_t max_words,
                                            std::size_t exploration_factor) {
  std::vector<PathCandidate> accepted;
  if (k == 0) return accepted;
  const std::vector<bool> none(graph.nodes.size(), false);
  const std::set<std::pair<std::size_t, std::size_t>> no_edges;
  auto first = SpurSearch{graph, none, no_edges}.run(WordGraph::kStart);
  if (!first) return accepted;

  std::vector<PathCandidate> found;
  std::set<std::vector<std::size_t>> seen;
  std::set<PathCandidate, CandidateOrder> pending;
  const std::size_t limit = std::max<std::size_t>(k, k * exploration_factor);

  auto accept = [&](PathCandidate c) {
    seen.insert(c.nodes);
    if (c.words() >= min_words && c.words() <= max_words) accepted.push_back(c);
    found.push_back(std::move(c));
  };
  accept({*first, path_cost(graph, *first)});

  while (accepted.size() < k && found.size() < limit) {
    const std::vector<std::size_t> last = found.back().nodes;
    for (std::size_t i = 0; i + 1 < last.size(); ++i) {
      const std::size_t spur = last[i];
      const std::span<const std::size_t> root(last.data(), i + 1);
      std::set<std::pair<std::size_t, std::size_t>> blocked_edges;
      for (const auto& p : found) {
        if (p.nodes.size() > i + 1 && std::equal(root.begin(), root.end(), p.nodes.begin())) {
          blocked_edges.emplace(p.nodes[i], p.nodes[i + 1]);
        }
      }
      std::vector<bool> blocked_nodes(graph.nodes.size(), false);
      for (std::size_t r = 0; r < i; ++r) blocked_nodes[root[r]] = true;

      auto spur_path = SpurSearch{graph, blocked_nodes, blocked_edges}.run(spur);
      if (!spur_path) continue;
      std::vector<std::size_t> total(root.begin(), root.end() - 1);
      total.insert(total.end(), spur_path->begin(), spur_path->end());
      if (seen.count(total) != 0) continue;
      PathCandidate c{std::move(total), 0.0};
      c.cost = path_cost(graph, c.nodes);
      pending.insert(std::move(c));
    }
    // Drop candidates already promoted through another spur.
    while (!pending.empty() && seen.count(pending.begin()->nodes) != 0) pending.erase(pending.begin());
    if (pending.empty()) break;
    PathCandidate next = *pending.begin();
    pending.erase(pending.begin());
    accept(std::move(next));
  }
  return accepted;
}

std::vector<PathCandidate> enumerate_paths(const WordGraph& graph, std::size_t max_paths) {
  std::vector<PathCandidate> out;
  std::vector<std::size_t> stack{WordGraph::kStart};
  std::vector<bool> on_path(graph.nodes.size(), false);
  on_path[WordGraph::kStart] = true;
  auto dfs = [&](auto&& self, std::size_t u) -> void {
    if (out.size() >= max_paths) return;
    if (u == WordGraph::kEnd) {
      out.push_back({stack, path_cost(graph, stack)});
      return;
    }
    for (std::size_t v : graph.successors[u]) {
      if (on_path[v]) continue;
      on_path[v] = true;
      stack.push_back(v);
      self(self, v);
      stack.pop_back();
      on_path[v] = false;
    }
  };
  dfs(dfs, WordGraph::kStart);
  return out;
}

double score_path(const WordGraph& graph, std::span<const std::size_t> nodes,
                  const KeyphraseScores& keyphrases) {
  const std::size_t words = nodes.size() >= 2 ? nodes.size() - 2 : 0;
  if (words == 0) return std::numeric_limits<double>::infinity();
  double salience = 0.0;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    auto it = keyphrases.find(graph.nodes[nodes[i]].token);
    if (it != keyphrases.end()) salience += it->second;
  }
  return path_cost(graph, nodes) / (static_cast<double>(words) * (1.0 + salience));
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  bool glue = true;
  for (const auto& t : tokens) {
    if (!glue && !attaches_left(t)) out.push_back(' ');
    out += t;
    glue = attaches_right(t);
  }
  if (!out.empty()) out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
  return out;
}

CompressionResult compress_cluster(std::span<const SentenceRecord> sentences,
                                   std::span<const double> scores, const CompressionConfig& config) {
  if (sentences.empty()) throw Error("compress_cluster: empty cluster");
  std::size_t min_index = sentences.front().index;
  for (const auto& s : sentences) min_index = std::min(min_index, s.index);

  CompressionResult result;
  if (sentences.size() == 1) {
    result = whole_sentence(sentences.front(), config.max_words, CompressionKind::Verbatim);
  } else {
    const WordGraph graph = build_word_graph(sentences);
    const KeyphraseScores keyphrases = extract_keyphrases(sentences);
    const auto candidates = k_shortest_paths(graph, config.k_paths, config.min_words, config.max_words);
    if (candidates.empty()) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < sentences.size(); ++i) {
        if (i < scores.size() && scores[i] > scores[best]) best = i;
      }
      result = whole_sentence(sentences[best], config.max_words, CompressionKind::Fallback);
    } else {
      std::size_t best = 0;
      double best_score = score_path(graph, candidates[0].nodes, keyphrases);
      for (std::size_t c = 1; c < candidates.size(); ++c) {
        const double s = score_path(graph, candidates[c].nodes, keyphrases);
        if (s < best_score) {
          best = c;
          best_score = s;
        }
      }
      const auto& path = candidates[best].nodes;
      std::vector<std::string> surface;
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        result.tokens.push_back(graph.nodes[path[i]].token);
        surface.push_back(graph.nodes[path[i]].surface);
      }
      result.text = detokenize(surface);
      result.path = path;
      result.score = best_score;
      result.kind = CompressionKind::Compressed;
      result.fallback_used = false;
    }
    result.candidates = candidates.size();
  }
  result.min_index = min_index;
  return result;
}

std::string SummaryResult::text() const {
  std::string out;
  for (const auto& s : sentences) {
    out += s.text;
    out.push_back('\n');
  }
  return out;
}

SummaryResult assemble_summary(std::span<const CompressionResult> results, std::size_t cap_words) {
  std::vector<const CompressionResult*> ordered;
  for (const auto& r : results) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->min_index < b->min_index; });

  SummaryResult summary;
  for (const CompressionResult* r : ordered) {
    const std::size_t words = r->word_count();
    if (!summary.sentences.empty() && summary.total_words + words > cap_words) break;
    SummarySentence s;
    s.cluster_id = r->cluster_id;
    s.min_index = r->min_index;
    s.fallback_used = r->fallback_used;
    s.truncated = r->truncated;
    if (summary.sentences.empty() && words > cap_words) {
      // Only the surface text is stored on results; re-split it to cut.
      const auto surface = tokenize_surface(r->text);
      const std::size_t keep = std::min(cap_words, surface.size());
      s.text = detokenize(std::span<const std::string>(surface.data(), keep));
      s.word_count = keep;
      s.truncated = true;
    } else {
      s.text = r->text;
      s.word_count = words;
    }
    summary.total_words += s.word_count;
    summary.sentences.push_back(std::move(s));
  }
  return summary;
}

}  // namespace scisumm
