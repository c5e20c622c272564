#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace scisumm {

struct SentenceRecord {
  std::size_t index = 0;
  std::string text;
  std::vector<std::string> tokens;   // lowercase
  std::vector<std::string> surface;  // original case, aligned with tokens
  std::size_t word_count = 0;        // == tokens.size()
};

struct Section {
  std::string heading;
  std::string body;
};

struct Document {
  std::string id;
  std::string title;
  std::optional<std::string> abstract;
  std::vector<Section> sections;  // abstract, when present, is sections.front()
  std::vector<SentenceRecord> sentences;

  /// Section bodies joined in order by single spaces (whitespace-normalized).
  std::string text() const;
  std::size_t total_words() const;
};

/// Parses one parsed-paper JSON record (`id`, `title`, `abstractText` or `abstract`,
/// `sections: [{heading, text}]`) and segments it. `fallback_id` is used
/// when the record carries no id.
Document parse_document(const nlohmann::json& record, std::string_view fallback_id = {});
Document parse_document_json(std::string_view json_text, std::string_view fallback_id = {});

/// Whole text becomes one untitled section.
Document parse_plain_text(std::string_view text, std::string_view id);

/// Loads a `.json` record or any other file as plain text. The id defaults
/// to the file stem.
Document load_document(const std::string& path);

std::string normalize_whitespace(std::string_view text);

/// Splits on [.?!] followed by whitespace and an uppercase letter or digit,
/// except after "et al.", "e.g.", "i.e.", "Fig.", "Eq." or a single capital
/// letter initial.
std::vector<std::string> segment_sentences(std::string_view text);

/// Lowercase tokens; punctuation split off, internal hyphens/apostrophes and
/// decimal points kept inside the token.
std::vector<std::string> tokenize(std::string_view sentence);
/// Same boundaries as tokenize() but keeps the original case.
std::vector<std::string> tokenize_surface(std::string_view sentence);

SentenceRecord make_sentence(std::size_t index, std::string text);

bool is_punctuation(std::string_view token);
bool is_stopword(std::string_view lowercase_token);

struct SummaryStatistic {
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
};

struct CorpusStats {
  std::size_t documents = 0;  // non-empty documents counted
  std::vector<std::size_t> sentence_counts;
  std::vector<double> median_sentence_lengths;  // per-document median words/sentence
  SummaryStatistic corpus_size;                 // sentences per document
  SummaryStatistic sentence_length;             // over per-document medians
  SummaryStatistic sentence_length_pooled;      // over every sentence in the corpus
};

struct StatsReport {
  CorpusStats papers;
  std::optional<CorpusStats> references;
};

CorpusStats collection_stats(std::span<const Document> documents);
StatsReport corpus_stats(std::span<const Document> documents,
                         std::span<const Document> reference_summaries = {});

double median(std::vector<double> values);

}  // namespace scisumm
