#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scisumm/embedding.hpp"
#include "scisumm/errors.hpp"
#include "scisumm/eval.hpp"
#include "scisumm/ingest.hpp"
#include "scisumm/pipeline.hpp"

namespace fs = std::filesystem;
using namespace scisumm;

namespace {

enum Exit : int { kOk = 0, kInputError = 1, kProviderError = 2 };

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TransportError*>(&e) != nullptr ||
      dynamic_cast<const ContractViolation*>(&e) != nullptr ||
      dynamic_cast<const MissingVectorError*>(&e) != nullptr ||
      dynamic_cast<const DimensionMismatch*>(&e) != nullptr) {
    return kProviderError;
  }
  return kInputError;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

bool is_document_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".json" || ext == ".txt";
}

// Files named directly are kept; directories contribute their .json/.txt files.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && is_document_file(entry.path())) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

// Summary ids drop the `.summary.txt` (or plain extension) suffix.
std::string text_id(const fs::path& p) {
  std::string name = p.filename().string();
  for (const char* suffix : {".summary.txt", ".txt"}) {
    const std::string s(suffix);
    if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0) {
      return name.substr(0, name.size() - s.size());
    }
  }
  return p.stem().string();
}

std::map<std::string, std::string> read_text_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
  std::map<std::string, std::string> texts;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    texts[text_id(entry.path())] = read_file(entry.path());
  }
  return texts;
}

struct ProviderFlags {
  std::string kind;
  std::string source;
  std::string url;

  void add(CLI::App& app) {
    app.add_option("--provider", kind, "static | precomputed | service");
    app.add_option("--source", source, "Word-vector file or precomputed JSONL file/directory");
    app.add_option("--url", url, "Embedding service base URL");
  }

  bool given() const { return !kind.empty() || !source.empty() || !url.empty(); }

  void apply(ProviderConfig& config) const {
    if (!kind.empty()) config.kind = parse_provider_kind(kind);
    if (!source.empty()) config.source = source;
    if (!url.empty()) {
      config.kind = ProviderKind::ExternalService;
      config.source = url;
    }
  }
};

nlohmann::json statistic_json(const SummaryStatistic& s) {
  return {{"min", s.min}, {"max", s.max}, {"median", s.median}};
}

nlohmann::json stats_json(const CorpusStats& s) {
  return {{"documents", s.documents},
          {"sentence_counts", s.sentence_counts},
          {"median_sentence_lengths", s.median_sentence_lengths},
          {"corpus_size", statistic_json(s.corpus_size)},
          {"sentence_length_per_document_median", statistic_json(s.sentence_length)},
          {"sentence_length_pooled", statistic_json(s.sentence_length_pooled)}};
}

struct SummarizeFlags {
  std::vector<std::string> inputs;
  std::string config_path;
  std::string out_dir = ".";
  ProviderFlags provider;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> mode;
  std::optional<double> lambda;
  std::optional<double> cutoff_ratio;
  std::optional<double> extended_ratio;
  std::optional<double> tau;
  std::optional<std::size_t> cap_words;
  std::optional<std::size_t> max_sentence_words;
  std::optional<std::size_t> min_sentence_words;
  bool report = false;
  bool trace = false;
  unsigned jobs = 0;
};

PipelineConfig build_config(const SummarizeFlags& f) {
  PipelineConfig config = f.config_path.empty() ? PipelineConfig{} : load_config(f.config_path);
  apply_environment(config);
  f.provider.apply(config.provider);
  if (f.seed) config.seed = *f.seed;
  if (f.strategy) config.strategy = parse_strategy(*f.strategy);
  if (f.mode) config.mode = parse_mode(*f.mode);
  if (f.lambda) config.lambda = *f.lambda;
  if (f.cutoff_ratio) config.cutoff_ratio = *f.cutoff_ratio;
  if (f.extended_ratio) config.extended_ratio = *f.extended_ratio;
  if (f.tau) config.tau = *f.tau;
  if (f.cap_words) config.cap_words = *f.cap_words;
  if (f.max_sentence_words) config.max_sentence_words = *f.max_sentence_words;
  if (f.min_sentence_words) config.min_sentence_words = *f.min_sentence_words;
  if (config.cap_words < config.min_summary_words) config.min_summary_words = config.cap_words;
  config.validate();
  return config;
}

int run_summarize(const SummarizeFlags& f) {
  PipelineConfig config;
  std::unique_ptr<EmbeddingProvider> provider;
  try {
    config = build_config(f);
    if (config.provider.source.empty()) throw ConfigError("no embedding source configured");
    provider = make_provider(config.provider);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  const auto files = expand_inputs(f.inputs);
  if (files.empty()) {
    std::cerr << "error: no input documents\n";
    return kInputError;
  }
  fs::create_directories(f.out_dir);

  struct Outcome {
    int code = kOk;
    std::string message;
  };
  std::vector<Outcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      Outcome& o = outcomes[i];
      try {
        const Document doc = load_document(files[i].string());
        const PipelineOutput result = summarize(doc, config, *provider);
        const fs::path base = fs::path(f.out_dir) / doc.id;
        write_file(base.string() + ".summary.txt", result.summary.text());
        if (f.report) write_file(base.string() + ".report.json", report_json(result, config).dump(2) + "\n");
        if (f.trace) write_file(base.string() + ".trace.json", trace_json(result.trace).dump(2) + "\n");
        o.message = files[i].string() + " -> " + base.string() + ".summary.txt (" +
                    std::to_string(result.summary.total_words) + " words)";
      } catch (const std::exception& e) {
        o.code = exit_code_for(e);
        o.message = "error: " + files[i].string() + ": " + e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto threads = static_cast<std::size_t>(std::min<std::size_t>(f.jobs == 0 ? hw : f.jobs, files.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kOk;
  for (const auto& o : outcomes) {
    (o.code == kOk ? std::cout : std::cerr) << o.message << "\n";
    code = std::max(code, o.code);
  }
  return code;
}

struct EvaluateFlags {
  std::string cand;
  std::string ref;
  std::string out_dir = ".";
  ProviderFlags provider;
  bool gnuplot = false;
  std::size_t max_tokens = 512;
};

int run_evaluate(const EvaluateFlags& f) {
  try {
    const auto candidates = read_text_dir(f.cand);
    const auto references = read_text_dir(f.ref);
    std::unique_ptr<EmbeddingProvider> tokens;
    if (f.provider.given()) {
      ProviderConfig pc;
      f.provider.apply(pc);
      tokens = make_provider(pc);
    }
    const EvalReport report = evaluate_corpus(candidates, references, tokens.get(), f.max_tokens);
    fs::create_directories(f.out_dir);
    const fs::path out(f.out_dir);
    write_file(out / "eval.report.json", to_json(report).dump(2) + "\n");
    const std::string table = format_table(report);
    write_file(out / "eval.table.txt", table);
    write_file(out / "eval.histogram.csv", histogram_csv(report.histogram));
    if (f.gnuplot) write_file(out / "eval.histogram.gp", histogram_gnuplot("eval.histogram.csv"));
    std::cout << table;
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

struct StatsFlags {
  std::vector<std::string> inputs;
  std::vector<std::string> refs;
  std::string out;
};

int run_stats(const StatsFlags& f) {
  int code = kOk;
  auto load_all = [&](const std::vector<std::string>& inputs) {
    std::vector<Document> docs;
    for (const auto& p : expand_inputs(inputs)) {
      try {
        docs.push_back(load_document(p.string()));
      } catch (const std::exception& e) {
        std::cerr << "error: " << p.string() << ": " << e.what() << "\n";
        code = kInputError;
      }
    }
    return docs;
  };
  try {
    const auto papers = load_all(f.inputs);
    const auto refs = load_all(f.refs);
    const StatsReport report = corpus_stats(papers, refs);
    nlohmann::json j = {{"papers", stats_json(report.papers)}};
    if (report.references) j["references"] = stats_json(*report.references);
    const std::string text = j.dump(2) + "\n";
    if (f.out.empty()) {
      std::cout << text;
    } else {
      write_file(f.out, text);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return code;
}

int run_provider_check(const ProviderFlags& flags) {
  try {
    ProviderConfig pc;
    if (const char* url = std::getenv("LONGSUMM_PROVIDER_URL"); url != nullptr && *url != '\0') {
      pc.kind = ProviderKind::ExternalService;
      pc.source = url;
    }
    flags.apply(pc);
    if (pc.source.empty()) throw ConfigError("provider-check needs --url or --provider with --source");
    if (pc.kind == ProviderKind::ExternalService) {
      ServiceClient client(pc.source, pc.batch_size);
      const ServiceHealth h = client.health();
      const std::vector<std::string> probe = {"Provider check sentence."};
      const EmbeddingMatrix e = client.embed_texts(probe);
      if (static_cast<std::size_t>(e.dim()) != h.dim) {
        throw ContractViolation("service advertises dim " + std::to_string(h.dim) +
                                " but returned " + std::to_string(e.dim()));
      }
      std::cout << "ok: " << client.describe() << " model=" << h.model << " dim=" << h.dim << "\n";
    } else {
      const auto provider = make_provider(pc);
      std::cout << "ok: " << provider->describe() << "\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long scientific document summarization"};
  app.require_subcommand(1);

  SummarizeFlags sf;
  auto* summ = app.add_subcommand("summarize", "Summarize documents");
  summ->add_option("inputs", sf.inputs, "Document files or directories")->required();
  summ->add_option("--config", sf.config_path, "key=value or JSON config file");
  summ->add_option("--out", sf.out_dir, "Output directory");
  sf.provider.add(*summ);
  summ->add_option("--seed", sf.seed);
  summ->add_option("--strategy", sf.strategy, "pagerank | mmr");
  summ->add_option("--mode", sf.mode, "abstractive | extractive");
  summ->add_option("--lambda", sf.lambda);
  summ->add_option("--cutoff-ratio", sf.cutoff_ratio);
  summ->add_option("--extended-ratio", sf.extended_ratio);
  summ->add_option("--tau", sf.tau);
  summ->add_option("--cap-words", sf.cap_words);
  summ->add_option("--max-sentence-words", sf.max_sentence_words);
  summ->add_option("--min-sentence-words", sf.min_sentence_words);
  summ->add_flag("--report", sf.report, "Also write <id>.report.json");
  summ->add_flag("--trace", sf.trace, "Also write <id>.trace.json");
  summ->add_option("--jobs", sf.jobs, "Worker threads (0 = hardware concurrency)");

  EvaluateFlags ef;
  auto* eval = app.add_subcommand("evaluate", "Score summaries against references");
  eval->add_option("--cand", ef.cand, "Candidate summary directory")->required();
  eval->add_option("--ref", ef.ref, "Reference summary directory")->required();
  eval->add_option("--out", ef.out_dir, "Output directory");
  eval->add_option("--max-tokens", ef.max_tokens, "Token limit for BERTScore inputs");
  eval->add_flag("--gnuplot", ef.gnuplot, "Also write a gnuplot script for the histogram");
  ef.provider.add(*eval);

  StatsFlags stf;
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("inputs", stf.inputs, "Document files or directories")->required();
  stats->add_option("--refs", stf.refs, "Reference summary files or directories");
  stats->add_option("--out", stf.out, "Write JSON here instead of stdout");

  ProviderFlags pf;
  auto* check = app.add_subcommand("provider-check", "Probe an embedding provider");
  pf.add(*check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*summ) return run_summarize(sf);
  if (*eval) return run_evaluate(ef);
  if (*stats) return run_stats(stf);
  return run_provider_check(pf);
}
