#include "scisumm/embedding.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace scisumm {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool parse_double(std::string_view field, double& out) {
  const std::string tmp(field);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

bool is_integer(std::string_view field) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

void flag_zero_rows(EmbeddingMatrix& m) {
  m.oov.assign(static_cast<std::size_t>(m.vectors.rows()), false);
  for (Eigen::Index i = 0; i < m.vectors.rows(); ++i) {
    m.oov[static_cast<std::size_t>(i)] = m.vectors.row(i).isZero(0);
  }
}

std::vector<double> json_vector(const nlohmann::json& value, const std::string& what) {
  if (!value.is_array()) throw ContractViolation(what + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& x : value) {
    if (!x.is_number()) throw ContractViolation(what + ": expected an array of numbers");
    const double v = x.get<double>();
    if (!std::isfinite(v)) throw ContractViolation(what + ": non-finite value");
    out.push_back(v);
  }
  return out;
}

}  // namespace

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "static" || name == "static-word-vectors") return ProviderKind::StaticWordVectors;
  if (name == "precomputed" || name == "precomputed-file") return ProviderKind::PrecomputedFile;
  if (name == "service" || name == "external-service") return ProviderKind::ExternalService;
  throw ConfigError("unknown provider kind '" + std::string(name) + "'");
}

std::string to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::StaticWordVectors: return "static-word-vectors";
    case ProviderKind::PrecomputedFile: return "precomputed-file";
    case ProviderKind::ExternalService: return "external-service";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Static word vectors

StaticWordVectors StaticWordVectors::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open word-vector file '" + path + "'");
  StaticWordVectors model;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    // word2vec text files start with a "<count> <dim>" header.
    if (line_no == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) continue;
    if (fields.size() < 2) {
      throw ContractViolation(path + ":" + std::to_string(line_no) + ": missing vector values");
    }
    const std::size_t dim = fields.size() - 1;
    if (model.dim_ == 0) model.dim_ = dim;
    if (dim != model.dim_) {
      throw ContractViolation(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(model.dim_) + " values, found " + std::to_string(dim));
    }
    const std::string word(fields[0]);
    if (model.index_.count(word) != 0) continue;  // first occurrence wins
    model.index_.emplace(word, model.data_.size() / model.dim_);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!parse_double(fields[k], v)) {
        throw ContractViolation(path + ":" + std::to_string(line_no) + ": bad number '" +
                                std::string(fields[k]) + "'");
      }
      model.data_.push_back(v);
    }
  }
  if (model.dim_ == 0) throw ContractViolation("word-vector file '" + path + "' is empty");
  return model;
}

StaticWordVectors StaticWordVectors::from_map(
    const std::map<std::string, std::vector<double>>& vocab) {
  StaticWordVectors model;
  for (const auto& [word, vec] : vocab) {
    if (model.dim_ == 0) model.dim_ = vec.size();
    if (vec.size() != model.dim_ || vec.empty()) {
      throw ContractViolation("word vector for '" + word + "' has the wrong dimension");
    }
    model.index_.emplace(word, model.data_.size() / model.dim_);
    model.data_.insert(model.data_.end(), vec.begin(), vec.end());
  }
  if (model.dim_ == 0) throw ContractViolation("empty vocabulary");
  return model;
}

const double* StaticWordVectors::lookup(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return nullptr;
  return data_.data() + it->second * dim_;
}

bool StaticWordVectors::mean_pool(std::span<const std::string> tokens,
                                  Eigen::Ref<Eigen::RowVectorXd> out) const {
  out.setZero();
  std::size_t hits = 0;
  for (const auto& token : tokens) {
    const double* v = lookup(token);
    if (v == nullptr) continue;
    out += Eigen::Map<const Eigen::RowVectorXd>(v, static_cast<Eigen::Index>(dim_));
    ++hits;
  }
  if (hits == 0) return false;
  out /= static_cast<double>(hits);
  return true;
}

EmbeddingMatrix StaticWordVectors::embed_sentences(std::span<const SentenceRecord> sentences,
                                                   std::string_view) const {
  EmbeddingMatrix m;
  m.vectors = RowMatrix<double>::Zero(static_cast<Eigen::Index>(sentences.size()),
                                      static_cast<Eigen::Index>(dim_));
  m.oov.assign(sentences.size(), false);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const bool any = mean_pool(sentences[i].tokens, m.vectors.row(static_cast<Eigen::Index>(i)));
    // Pooled vectors of real words can still cancel to zero; flag those too.
    m.oov[i] = !any || m.vectors.row(static_cast<Eigen::Index>(i)).isZero(0);
  }
  return m;
}

std::optional<Vector<double>> StaticWordVectors::embed_query(std::string_view text,
                                                             std::string_view) const {
  const auto tokens = tokenize(text);
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(dim_));
  if (!mean_pool(tokens, v) || v.isZero(0)) return std::nullopt;
  return Vector<double>(v.transpose());
}

TokenVectors StaticWordVectors::embed_tokens(std::string_view text) const {
  TokenVectors out;
  std::vector<const double*> rows;
  for (auto& token : tokenize(text)) {
    const double* v = lookup(token);
    if (v == nullptr) continue;
    rows.push_back(v);
    out.tokens.push_back(std::move(token));
  }
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.vectors.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i], static_cast<Eigen::Index>(dim_));
  }
  return out;
}

std::string StaticWordVectors::describe() const {
  return "static-word-vectors (" + std::to_string(index_.size()) + " words, dim " +
         std::to_string(dim_) + ")";
}

// ---------------------------------------------------------------------------
// Precomputed JSON Lines vectors

PrecomputedVectors::PrecomputedVectors(std::string source) : source_(std::move(source)) {}

PrecomputedVectors::Table PrecomputedVectors::read_table(std::string_view document_id) const {
  std::filesystem::path path(source_);
  if (std::filesystem::is_directory(path)) path /= std::string(document_id) + ".jsonl";
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open precomputed vectors '" + path.string() + "'");

  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json entry;
    try {
      entry = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ContractViolation(where + ": " + e.what());
    }
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("vector")) {
      throw ContractViolation(where + ": expected {\"id\", \"vector\"}");
    }
    auto vec = json_vector(entry["vector"], where);
    const auto& id = entry["id"];
    if (id.is_string() && id.get<std::string>() == "title") {
      table.title = std::move(vec);
    } else if (id.is_number_integer()) {
      table.sentences[id.get<long long>()] = std::move(vec);
    } else {
      throw ContractViolation(where + ": id must be a sentence index or \"title\"");
    }
  }
  return table;
}

EmbeddingMatrix PrecomputedVectors::embed_sentences(std::span<const SentenceRecord> sentences,
                                                    std::string_view document_id) const {
  const Table table = read_table(document_id);
  EmbeddingMatrix m;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto it = table.sentences.find(static_cast<long long>(sentences[i].index));
    if (it == table.sentences.end()) {
      throw MissingVectorError("no precomputed vector for sentence " +
                               std::to_string(sentences[i].index));
    }
    if (i == 0) {
      dim = it->second.size();
      if (dim == 0) throw ContractViolation("precomputed vectors have dimension 0");
      m.vectors.resize(static_cast<Eigen::Index>(sentences.size()), static_cast<Eigen::Index>(dim));
    }
    if (it->second.size() != dim) {
      throw ContractViolation("precomputed vector for sentence " +
                              std::to_string(sentences[i].index) + " has dimension " +
                              std::to_string(it->second.size()) + ", expected " +
                              std::to_string(dim));
    }
    m.vectors.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(it->second.data(), static_cast<Eigen::Index>(dim));
  }
  flag_zero_rows(m);
  return m;
}

std::optional<Vector<double>> PrecomputedVectors::embed_query(std::string_view,
                                                              std::string_view document_id) const {
  const Table table = read_table(document_id);
  if (!table.title) return std::nullopt;
  Vector<double> v = Eigen::Map<const Vector<double>>(table.title->data(),
                                                      static_cast<Eigen::Index>(table.title->size()));
  if (v.isZero(0)) return std::nullopt;
  return v;
}

TokenVectors PrecomputedVectors::embed_tokens(std::string_view) const {
  throw ConfigError("precomputed-file provider has no token vectors");
}

std::string PrecomputedVectors::describe() const { return "precomputed-file (" + source_ + ")"; }

// ---------------------------------------------------------------------------
// External service client

ServiceClient::ServiceClient(std::string url, std::size_t batch_size)
    : batch_size_(batch_size == 0 ? 32 : batch_size) {
  const std::size_t scheme_end = url.find("://");
  const std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const std::size_t path_begin = url.find('/', host_begin);
  origin_ = url.substr(0, path_begin);
  if (scheme_end == std::string::npos) origin_ = "http://" + origin_;
  prefix_ = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

std::string ServiceClient::post(const std::string& body) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(120, 0);
  auto res = client.Post(prefix_ + "/embed", body, "application/json");
  if (!res) {
    throw TransportError("embedding service " + origin_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("embedding service " + origin_ + " answered HTTP " +
                         std::to_string(res->status));
  }
  return res->body;
}

ServiceHealth ServiceClient::health() const {
  httplib::Client client(origin_);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(30, 0);
  auto res = client.Get(prefix_ + "/health");
  if (!res) {
    throw TransportError("embedding service " + origin_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("embedding service " + origin_ + " health answered HTTP " +
                         std::to_string(res->status));
  }
  ServiceHealth health;
  try {
    const auto body = nlohmann::json::parse(res->body);
    if (body.contains("model") && body["model"].is_string()) health.model = body["model"];
    if (!body.contains("dim") || !body["dim"].is_number_integer() || body["dim"].get<long long>() <= 0) {
      throw ContractViolation("health response lacks a positive integer 'dim'");
    }
    health.dim = body["dim"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("health response: ") + e.what());
  }
  return health;
}

EmbeddingMatrix ServiceClient::embed_texts(std::span<const std::string> texts) const {
  EmbeddingMatrix m;
  std::size_t dim = 0;
  std::vector<std::vector<double>> rows;
  rows.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    const std::size_t end = std::min(texts.size(), begin + batch_size_);
    nlohmann::json request = {{"texts", std::vector<std::string>(texts.begin() + begin, texts.begin() + end)},
                              {"granularity", "sentence"}};
    nlohmann::json response;
    try {
      response = nlohmann::json::parse(post(request.dump()));
    } catch (const nlohmann::json::parse_error& e) {
      throw ContractViolation(std::string("embed response: ") + e.what());
    }
    if (!response.is_object() || !response.contains("dim") || !response.contains("vectors") ||
        !response["dim"].is_number_integer() || !response["vectors"].is_array()) {
      throw ContractViolation("embed response must carry 'dim' and 'vectors'");
    }
    const auto batch_dim = response["dim"].get<long long>();
    if (batch_dim <= 0) throw ContractViolation("embed response has non-positive dim");
    if (dim == 0) dim = static_cast<std::size_t>(batch_dim);
    if (static_cast<std::size_t>(batch_dim) != dim) {
      throw ContractViolation("embed responses disagree on dim (" + std::to_string(dim) + " vs " +
                              std::to_string(batch_dim) + ")");
    }
    const auto& vectors = response["vectors"];
    if (vectors.size() != end - begin) {
      throw ContractViolation("embed response has " + std::to_string(vectors.size()) +
                              " vectors for " + std::to_string(end - begin) + " texts");
    }
    for (const auto& v : vectors) {
      auto row = json_vector(v, "embed response vector");
      if (row.size() != dim) {
        throw ContractViolation("embed response vector has length " + std::to_string(row.size()) +
                                ", advertised dim " + std::to_string(dim));
      }
      rows.push_back(std::move(row));
    }
  }
  m.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.vectors.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), static_cast<Eigen::Index>(dim));
  }
  flag_zero_rows(m);
  return m;
}

EmbeddingMatrix ServiceClient::embed_sentences(std::span<const SentenceRecord> sentences,
                                               std::string_view) const {
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  return embed_texts(texts);
}

std::optional<Vector<double>> ServiceClient::embed_query(std::string_view text,
                                                         std::string_view) const {
  if (text.empty()) return std::nullopt;
  const std::string one(text);
  EmbeddingMatrix m = embed_texts(std::span<const std::string>(&one, 1));
  if (m.oov.front()) return std::nullopt;
  return Vector<double>(m.vectors.row(0).transpose());
}

std::vector<TokenVectors> ServiceClient::embed_token_batch(std::span<const std::string> texts) const {
  std::vector<TokenVectors> out;
  out.reserve(texts.size());
  std::size_t dim = 0;
  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    const std::size_t end = std::min(texts.size(), begin + batch_size_);
    nlohmann::json request = {{"texts", std::vector<std::string>(texts.begin() + begin, texts.begin() + end)},
                              {"granularity", "token"}};
    nlohmann::json response;
    try {
      response = nlohmann::json::parse(post(request.dump()));
    } catch (const nlohmann::json::parse_error& e) {
      throw ContractViolation(std::string("embed response: ") + e.what());
    }
    if (!response.is_object() || !response.contains("dim") || !response.contains("token_vectors") ||
        !response["dim"].is_number_integer() || !response["token_vectors"].is_array()) {
      throw ContractViolation("token embed response must carry 'dim' and 'token_vectors'");
    }
    const auto batch_dim = response["dim"].get<long long>();
    if (batch_dim <= 0) throw ContractViolation("token embed response has non-positive dim");
    if (dim == 0) dim = static_cast<std::size_t>(batch_dim);
    if (static_cast<std::size_t>(batch_dim) != dim) {
      throw ContractViolation("token embed responses disagree on dim");
    }
    const auto& per_text = response["token_vectors"];
    if (per_text.size() != end - begin) {
      throw ContractViolation("token embed response count does not match request");
    }
    const nlohmann::json* truncated = response.contains("truncated") ? &response["truncated"] : nullptr;
    const nlohmann::json* tokens = response.contains("tokens") ? &response["tokens"] : nullptr;
    for (std::size_t t = 0; t < per_text.size(); ++t) {
      TokenVectors tv;
      const auto& matrix = per_text[t];
      if (!matrix.is_array()) throw ContractViolation("token_vectors entries must be arrays");
      tv.vectors.resize(static_cast<Eigen::Index>(matrix.size()), static_cast<Eigen::Index>(dim));
      for (std::size_t r = 0; r < matrix.size(); ++r) {
        auto row = json_vector(matrix[r], "token vector");
        if (row.size() != dim) throw ContractViolation("token vector length does not match dim");
        tv.vectors.row(static_cast<Eigen::Index>(r)) =
            Eigen::Map<const Eigen::RowVectorXd>(row.data(), static_cast<Eigen::Index>(dim));
      }
      if (truncated != nullptr && truncated->is_array() && t < truncated->size() &&
          (*truncated)[t].is_boolean()) {
        tv.truncated = (*truncated)[t].get<bool>();
      }
      if (tokens != nullptr && tokens->is_array() && t < tokens->size() && (*tokens)[t].is_array()) {
        for (const auto& tok : (*tokens)[t]) {
          if (tok.is_string()) tv.tokens.push_back(tok.get<std::string>());
        }
      }
      out.push_back(std::move(tv));
    }
  }
  return out;
}

TokenVectors ServiceClient::embed_tokens(std::string_view text) const {
  const std::string one(text);
  auto batch = embed_token_batch(std::span<const std::string>(&one, 1));
  return std::move(batch.front());
}

std::string ServiceClient::describe() const { return "external-service (" + origin_ + prefix_ + ")"; }

// ---------------------------------------------------------------------------

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
  switch (config.kind) {
    case ProviderKind::StaticWordVectors:
      return std::make_unique<StaticWordVectors>(StaticWordVectors::load(config.source));
    case ProviderKind::PrecomputedFile:
      return std::make_unique<PrecomputedVectors>(config.source);
    case ProviderKind::ExternalService:
      return std::make_unique<ServiceClient>(config.source, config.batch_size);
  }
  throw ConfigError("unknown provider kind");
}

EmbeddingMatrix embed_sentences(const ProviderConfig& config,
                                std::span<const SentenceRecord> sentences) {
  if (sentences.empty()) throw Error("embed_sentences: empty sentence list");
  auto provider = make_provider(config);
  return provider->embed_sentences(sentences);
}

}  // namespace scisumm
