#include "scisumm/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "scisumm/ranking.hpp"

namespace scisumm {

namespace {

constexpr std::size_t kNoCluster = std::numeric_limits<std::size_t>::max();

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::string normalize_key(std::string_view key) {
  std::string out = trim(key);
  for (char& c : out) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

double parse_double(std::string_view key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || value.front() == '-' || end != value.c_str() + value.size() ||
      errno == ERANGE) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

std::string json_scalar(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_unsigned()) return std::to_string(value.get<std::uint64_t>());
  if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
  if (value.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << value.get<double>();
    return os.str();
  }
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  throw ConfigError("config: expected a scalar value, got " + value.dump());
}

Vector<double> centroid(const EmbeddingMatrix& e) {
  Vector<double> c = Vector<double>::Zero(e.dim());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (!e.oov[static_cast<std::size_t>(i)]) c += e.row(i).transpose();
  }
  return c;
}

Vector<double> mmr_query(const Document& document, const EmbeddingMatrix& e,
                         const EmbeddingProvider& provider) {
  if (!document.title.empty()) {
    auto q = provider.embed_query(document.title, document.id);
    if (q && q->size() == e.dim() && !q->isZero(0)) return *q;
    if (q && q->size() != e.dim()) {
      throw ContractViolation("query vector dimension does not match sentence vectors");
    }
  }
  return centroid(e);
}

CompressionResult verbatim(const SentenceRecord& s, std::size_t cluster_id) {
  CompressionResult r;
  r.cluster_id = cluster_id;
  r.min_index = s.index;
  r.text = s.text;
  r.tokens = s.tokens;
  r.kind = CompressionKind::Verbatim;
  return r;
}

std::vector<std::size_t> word_counts(const Document& document) {
  std::vector<std::size_t> counts;
  counts.reserve(document.sentences.size());
  for (const auto& s : document.sentences) counts.push_back(s.word_count);
  return counts;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  const std::string n = normalize_key(name);
  if (n == "pagerank" || n == "pr") return Strategy::PageRank;
  if (n == "mmr") return Strategy::Mmr;
  throw ConfigError("strategy: expected pagerank or mmr, got '" + std::string(name) + "'");
}

Mode parse_mode(std::string_view name) {
  const std::string n = normalize_key(name);
  if (n == "abstractive") return Mode::Abstractive;
  if (n == "extractive") return Mode::Extractive;
  throw ConfigError("mode: expected abstractive or extractive, got '" + std::string(name) + "'");
}

std::string to_string(Strategy strategy) {
  return strategy == Strategy::PageRank ? "pagerank" : "mmr";
}

std::string to_string(Mode mode) { return mode == Mode::Abstractive ? "abstractive" : "extractive"; }

void PipelineConfig::set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  if (key == "provider") {
    provider.kind = parse_provider_kind(value);
  } else if (key == "provider_source" || key == "source" || key == "vectors") {
    provider.source = value;
  } else if (key == "provider_url" || key == "url") {
    provider.kind = ProviderKind::ExternalService;
    provider.source = value;
  } else if (key == "batch_size") {
    provider.batch_size = parse_unsigned(key, value);
  } else if (key == "strategy") {
    strategy = parse_strategy(value);
  } else if (key == "mode") {
    mode = parse_mode(value);
  } else if (key == "cutoff_ratio") {
    cutoff_ratio = parse_double(key, value);
  } else if (key == "lambda") {
    lambda = parse_double(key, value);
  } else if (key == "extended_ratio") {
    extended_ratio = parse_double(key, value);
  } else if (key == "tau") {
    tau = parse_double(key, value);
  } else if (key == "damping") {
    damping = parse_double(key, value);
  } else if (key == "max_sentence_words") {
    max_sentence_words = parse_unsigned(key, value);
  } else if (key == "min_sentence_words") {
    min_sentence_words = parse_unsigned(key, value);
  } else if (key == "cap_words") {
    cap_words = parse_unsigned(key, value);
  } else if (key == "min_summary_words") {
    min_summary_words = parse_unsigned(key, value);
  } else if (key == "k_paths") {
    k_paths = parse_unsigned(key, value);
  } else if (key == "lexical_window") {
    lexical_window = parse_unsigned(key, value);
  } else if (key == "rare_df") {
    rare_df = parse_unsigned(key, value);
  } else if (key == "seed") {
    seed = parse_unsigned(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(raw_key) + "'");
  }
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
  };
  require(cutoff_ratio >= 0.0 && cutoff_ratio < 1.0, "cutoff_ratio must lie in [0, 1)");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  require(extended_ratio > 0.0 && extended_ratio <= 1.0, "extended_ratio must lie in (0, 1]");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(damping > 0.0 && damping < 1.0, "damping must lie in (0, 1)");
  require(min_sentence_words >= 1, "min_sentence_words must be positive");
  require(max_sentence_words >= min_sentence_words,
          "max_sentence_words must not be below min_sentence_words");
  require(cap_words >= 1, "cap_words must be positive");
  require(min_summary_words <= cap_words, "min_summary_words must not exceed cap_words");
  require(k_paths >= 1, "k_paths must be positive");
  require(provider.batch_size >= 1, "batch_size must be positive");
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"provider", scisumm::to_string(provider.kind)},
          {"provider_source", provider.source},
          {"batch_size", provider.batch_size},
          {"strategy", scisumm::to_string(strategy)},
          {"mode", scisumm::to_string(mode)},
          {"cutoff_ratio", cutoff_ratio},
          {"lambda", lambda},
          {"extended_ratio", extended_ratio},
          {"tau", tau},
          {"damping", damping},
          {"max_sentence_words", max_sentence_words},
          {"min_sentence_words", min_sentence_words},
          {"cap_words", cap_words},
          {"min_summary_words", min_summary_words},
          {"k_paths", k_paths},
          {"lexical_window", lexical_window},
          {"rare_df", rare_df},
          {"seed", seed}};
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json root;
    try {
      root = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    for (const auto& [key, value] : root.items()) {
      if (key == "provider" && value.is_object()) {
        for (const auto& [pk, pv] : value.items()) {
          config.set(pk == "kind" ? "provider" : (pk == "source" ? "provider_source" : pk),
                     json_scalar(pv));
        }
      } else {
        config.set(key, json_scalar(value));
      }
    }
  } else {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
      }
      config.set(line.substr(0, eq), line.substr(eq + 1));
    }
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_environment(PipelineConfig& config) {
  if (const char* url = std::getenv("LONGSUMM_PROVIDER_URL"); url != nullptr && *url != '\0') {
    config.set("provider_url", url);
  }
  if (const char* seed = std::getenv("LONGSUMM_SEED"); seed != nullptr && *seed != '\0') {
    config.set("seed", seed);
  }
}

PipelineOutput summarize(const Document& document, const PipelineConfig& config,
                         const EmbeddingProvider& provider) {
  config.validate();
  const auto& sentences = document.sentences;
  const std::size_t n = sentences.size();
  if (n == 0) throw EmptyDocumentError("document '" + document.id + "' has no sentences");

  PipelineOutput out;
  out.document_id = document.id;
  StageTrace& trace = out.trace;

  if (n == 1) {
    trace.scores = {1.0};
    trace.kept = {0};
    trace.graph.nodes = {0};
    out.compressions.push_back(verbatim(sentences.front(), 0));
    out.summary = assemble_summary(out.compressions, config.cap_words);
    return out;
  }

  EmbeddingMatrix embeddings = provider.embed_sentences(sentences, document.id);
  if (static_cast<std::size_t>(embeddings.size()) != n) {
    throw ContractViolation("provider returned " + std::to_string(embeddings.size()) +
                            " vectors for " + std::to_string(n) + " sentences");
  }
  embeddings.validate();

  PageRankOptions<double> pr_options;
  pr_options.damping = config.damping;
  const auto pr = pagerank(similarity_matrix(embeddings), pr_options);
  trace.scores.assign(pr.scores.data(), pr.scores.data() + pr.scores.size());
  trace.pagerank_converged = pr.converged;

  const std::vector<std::size_t> counts = word_counts(document);
  std::vector<std::size_t> order;  // selection order, best first
  if (config.strategy == Strategy::PageRank) {
    order = rank_order(trace.scores);
  } else {
    MmrConfig mmr;
    mmr.lambda = config.lambda;
    mmr.query = mmr_query(document, embeddings, provider);
    if (config.mode == Mode::Extractive) {
      mmr.budget_words = config.cap_words;
    } else {
      mmr.budget_words = std::numeric_limits<std::size_t>::max();
      mmr.max_sentences = n - removed_count(n, config.cutoff_ratio);
    }
    order = mmr_select(embeddings, counts, mmr);
    trace.selection_order = order;
  }

  if (config.mode == Mode::Extractive) {
    std::size_t words = 0;
    for (std::size_t idx : order) {
      if (!trace.kept.empty() && words + counts[idx] > config.cap_words) continue;
      trace.kept.push_back(idx);
      words += counts[idx];
      if (words >= config.cap_words) break;
    }
    std::sort(trace.kept.begin(), trace.kept.end());
    for (std::size_t idx : trace.kept) out.compressions.push_back(verbatim(sentences[idx], kNoCluster));
    out.summary = assemble_summary(out.compressions, config.cap_words);
    return out;
  }

  if (config.strategy == Strategy::PageRank) {
    trace.kept = select_content(trace.scores, config.cutoff_ratio).kept;
  } else {
    trace.kept = order;
    std::sort(trace.kept.begin(), trace.kept.end());
  }

  GraphOptions graph_options;
  graph_options.tau = config.tau;
  graph_options.lexical_window = config.lexical_window;
  graph_options.rare_df = config.rare_df;
  trace.graph = build_sentence_graph(sentences, embeddings, trace.kept, graph_options,
                                     document_frequency(sentences));
  trace.clusters = spectral_cluster(trace.graph, config.extended_ratio, config.seed);

  CompressionConfig msc;
  msc.k_paths = config.k_paths;
  msc.min_words = config.min_sentence_words;
  msc.max_words = config.max_sentence_words;
  std::set<std::vector<std::string>> emitted;
  for (std::size_t c = 0; c < trace.clusters.clusters.size(); ++c) {
    std::vector<SentenceRecord> members;
    std::vector<double> member_scores;
    for (std::size_t idx : trace.clusters.clusters[c]) {
      members.push_back(sentences[idx]);
      member_scores.push_back(trace.scores[idx]);
    }
    CompressionResult r = compress_cluster(members, member_scores, msc);
    r.cluster_id = c;
    trace.candidate_counts.push_back(r.candidates);
    emitted.insert(r.tokens);
    out.compressions.push_back(std::move(r));
  }

  out.summary = assemble_summary(out.compressions, config.cap_words);
  const std::size_t floor_words = std::min(config.min_summary_words, document.total_words());
  if (out.summary.total_words < floor_words) {
    std::size_t words = out.summary.total_words;
    for (std::size_t idx : rank_order(trace.scores)) {
      if (words >= floor_words) break;
      if (emitted.count(sentences[idx].tokens) != 0) continue;
      if (words + counts[idx] > config.cap_words) continue;
      out.compressions.push_back(verbatim(sentences[idx], kNoCluster));
      emitted.insert(sentences[idx].tokens);
      trace.topped_up.push_back(idx);
      words += counts[idx];
    }
    out.summary = assemble_summary(out.compressions, config.cap_words);
  }
  return out;
}

nlohmann::json trace_json(const StageTrace& trace) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : trace.graph.edges) {
    edges.push_back({e.i, e.j, e.weight, reasons_to_string(e.reasons)});
  }
  return {{"scores", trace.scores},
          {"pagerank_converged", trace.pagerank_converged},
          {"selection_order", trace.selection_order},
          {"kept", trace.kept},
          {"edges", edges},
          {"k", trace.clusters.k},
          {"clusters", trace.clusters.clusters},
          {"candidate_counts", trace.candidate_counts},
          {"topped_up", trace.topped_up}};
}

nlohmann::json report_json(const PipelineOutput& output, const PipelineConfig& config) {
  nlohmann::json sentences = nlohmann::json::array();
  nlohmann::json fallback = nlohmann::json::array();
  for (const auto& s : output.summary.sentences) {
    nlohmann::json cluster = nullptr;
    if (s.cluster_id < output.trace.clusters.clusters.size()) cluster = s.cluster_id;
    sentences.push_back({{"text", s.text},
                         {"cluster", cluster},
                         {"first_sentence", s.min_index},
                         {"words", s.word_count},
                         {"fallback", s.fallback_used},
                         {"truncated", s.truncated}});
    fallback.push_back(s.fallback_used);
  }
  return {{"id", output.document_id},
          {"sentences", sentences},
          {"clusters", output.trace.clusters.clusters},
          {"kept", output.trace.kept},
          {"scores", output.trace.scores},
          {"fallback", fallback},
          {"total_words", output.summary.total_words},
          {"config", config.to_json()}};
}

}  // namespace scisumm
