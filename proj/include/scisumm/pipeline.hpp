#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scisumm/embedding.hpp"
#include "scisumm/ingest.hpp"
#include "scisumm/msc.hpp"
#include "scisumm/sent_graph.hpp"
#include "scisumm/spectral.hpp"

namespace scisumm {

enum class Strategy { PageRank, Mmr };
enum class Mode { Abstractive, Extractive };

Strategy parse_strategy(std::string_view name);
Mode parse_mode(std::string_view name);
std::string to_string(Strategy strategy);
std::string to_string(Mode mode);

struct PipelineConfig {
  ProviderConfig provider;
  Strategy strategy = Strategy::PageRank;
  Mode mode = Mode::Abstractive;
  double cutoff_ratio = 0.25;
  double lambda = 0.5;
  double extended_ratio = 0.3;
  double tau = 0.6;
  std::size_t max_sentence_words = 26;
  std::size_t min_sentence_words = 8;
  std::size_t cap_words = 600;
  std::size_t min_summary_words = 60;
  std::size_t k_paths = 100;
  std::size_t lexical_window = 3;
  std::size_t rare_df = 2;
  double damping = 0.85;
  std::uint64_t seed = 13;

  /// Sets one key from its textual value; unknown keys throw ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Throws ConfigError when a field lies outside its range.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Reads `key = value` lines (`#` comments) or a JSON object.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);
/// LONGSUMM_PROVIDER_URL selects the service provider; LONGSUMM_SEED sets the seed.
void apply_environment(PipelineConfig& config);

struct StageTrace {
  std::vector<double> scores;  // PageRank over all sentences
  bool pagerank_converged = true;
  std::vector<std::size_t> selection_order;  // MMR picks, empty for PageRank
  std::vector<std::size_t> kept;
  SentenceGraph graph;
  ClusterSet clusters;
  std::vector<std::size_t> candidate_counts;  // per cluster
  std::vector<std::size_t> topped_up;         // sentences added to reach the length floor
};

struct PipelineOutput {
  std::string document_id;
  SummaryResult summary;
  std::vector<CompressionResult> compressions;
  StageTrace trace;
};

/// Pure function of (document, config, provider output).
PipelineOutput summarize(const Document& document, const PipelineConfig& config,
                         const EmbeddingProvider& provider);

nlohmann::json trace_json(const StageTrace& trace);
/// {id, sentences, clusters, scores, fallback, total_words, config}.
nlohmann::json report_json(const PipelineOutput& output, const PipelineConfig& config);

}  // namespace scisumm
