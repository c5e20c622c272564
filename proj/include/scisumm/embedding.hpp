#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "scisumm/errors.hpp"
#include "scisumm/ingest.hpp"

namespace scisumm {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cosine similarity clamped to [-1, 1]; 0 when either side is the zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u,
                                 const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine: sizes " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) return Scalar(0);
  const Scalar c = u.dot(v) / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// One row per sentence, aligned with sentence indices.
template <typename Scalar>
struct BasicEmbeddingMatrix {
  RowMatrix<Scalar> vectors;
  std::vector<bool> oov;  // set exactly for rows that are the zero vector

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
  auto row(Eigen::Index i) const { return vectors.row(i); }

  /// Throws ContractViolation when a row is non-finite or an unflagged zero.
  void validate() const {
    if (static_cast<Eigen::Index>(oov.size()) != vectors.rows()) {
      throw ContractViolation("embedding matrix: OOV flags do not match row count");
    }
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (!vectors.row(i).allFinite()) {
        throw ContractViolation("embedding matrix: non-finite value in row " + std::to_string(i));
      }
      if (vectors.row(i).isZero(0) && !oov[static_cast<std::size_t>(i)]) {
        throw ContractViolation("embedding matrix: unflagged zero vector in row " +
                                std::to_string(i));
      }
    }
  }
};

using EmbeddingMatrix = BasicEmbeddingMatrix<double>;

/// Token-level vectors for one text (rows = tokens).
struct TokenVectors {
  RowMatrix<double> vectors;
  std::vector<std::string> tokens;
  bool truncated = false;
};

enum class ProviderKind { StaticWordVectors, PrecomputedFile, ExternalService };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::StaticWordVectors;
  std::string source;  // vector file, JSONL file/directory, or service URL
  std::size_t batch_size = 32;
};

ProviderKind parse_provider_kind(std::string_view name);
std::string to_string(ProviderKind kind);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual EmbeddingMatrix embed_sentences(std::span<const SentenceRecord> sentences,
                                          std::string_view document_id = {}) const = 0;
  /// Vector for a free text such as the title; nullopt when none is available.
  virtual std::optional<Vector<double>> embed_query(std::string_view text,
                                                    std::string_view document_id = {}) const = 0;
  virtual TokenVectors embed_tokens(std::string_view text) const = 0;
  virtual std::string describe() const = 0;
};

/// Plain-text `word v1 ... vd` vectors, mean pooled over in-vocabulary tokens.
class StaticWordVectors final : public EmbeddingProvider {
 public:
  static StaticWordVectors load(const std::string& path);
  static StaticWordVectors from_map(const std::map<std::string, std::vector<double>>& vocab);

  EmbeddingMatrix embed_sentences(std::span<const SentenceRecord> sentences,
                                  std::string_view document_id = {}) const override;
  std::optional<Vector<double>> embed_query(std::string_view text,
                                            std::string_view document_id = {}) const override;
  TokenVectors embed_tokens(std::string_view text) const override;
  std::string describe() const override;

  std::size_t dim() const { return dim_; }
  std::size_t vocabulary_size() const { return index_.size(); }
  const double* lookup(const std::string& token) const;

 private:
  bool mean_pool(std::span<const std::string> tokens, Eigen::Ref<Eigen::RowVectorXd> out) const;

  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// JSON Lines `{"id": <sentence index>, "vector": [...]}`; an optional
/// `{"id": "title", ...}` line supplies the query vector. `source` is a file,
/// or a directory holding `<document id>.jsonl` files.
class PrecomputedVectors final : public EmbeddingProvider {
 public:
  explicit PrecomputedVectors(std::string source);

  EmbeddingMatrix embed_sentences(std::span<const SentenceRecord> sentences,
                                  std::string_view document_id = {}) const override;
  std::optional<Vector<double>> embed_query(std::string_view text,
                                            std::string_view document_id = {}) const override;
  TokenVectors embed_tokens(std::string_view text) const override;
  std::string describe() const override;

 private:
  struct Table {
    std::map<long long, std::vector<double>> sentences;
    std::optional<std::vector<double>> title;
  };
  Table read_table(std::string_view document_id) const;

  std::string source_;
};

struct ServiceHealth {
  std::string model;
  std::size_t dim = 0;
};

/// HTTP client for the `/embed` and `/health` endpoints.
class ServiceClient final : public EmbeddingProvider {
 public:
  explicit ServiceClient(std::string url, std::size_t batch_size = 32);

  EmbeddingMatrix embed_sentences(std::span<const SentenceRecord> sentences,
                                  std::string_view document_id = {}) const override;
  std::optional<Vector<double>> embed_query(std::string_view text,
                                            std::string_view document_id = {}) const override;
  TokenVectors embed_tokens(std::string_view text) const override;
  std::string describe() const override;

  ServiceHealth health() const;
  /// Raw sentence-granularity call; rows align with `texts`.
  EmbeddingMatrix embed_texts(std::span<const std::string> texts) const;
  std::vector<TokenVectors> embed_token_batch(std::span<const std::string> texts) const;

 private:
  std::string post(const std::string& body) const;

  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix, no trailing slash
  std::size_t batch_size_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

EmbeddingMatrix embed_sentences(const ProviderConfig& config,
                                std::span<const SentenceRecord> sentences);

}  // namespace scisumm
