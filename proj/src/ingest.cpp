#include "scisumm/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scisumm/errors.hpp"

namespace scisumm {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are kept inside words.
bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool abbreviation_before(std::string_view text, std::size_t period) {
  std::size_t begin = text.rfind(' ', period);
  begin = (begin == std::string_view::npos) ? 0 : begin + 1;
  while (begin < period && (text[begin] == '(' || text[begin] == '[' || text[begin] == '"')) ++begin;
  const std::string word = lower_ascii(text.substr(begin, period - begin + 1));

  static constexpr std::array<std::string_view, 4> kFixed = {"e.g.", "i.e.", "fig.", "eq."};
  if (std::find(kFixed.begin(), kFixed.end(), word) != kFixed.end()) return true;

  const std::string_view raw = text.substr(begin, period - begin + 1);
  if (raw.size() == 2 && std::isupper(static_cast<unsigned char>(raw[0]))) return true;

  if (word == "al." && begin >= 3) {
    const std::string before = lower_ascii(text.substr(begin - 3, 3));
    if (before == "et " && (begin == 3 || text[begin - 4] == ' ' || text[begin - 4] == '(')) {
      return true;
    }
  }
  return false;
}

template <bool Lower>
std::vector<std::string> tokenize_impl(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const char c = s[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (!is_word_byte(c)) {
      tokens.emplace_back(1, c);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n) {
      if (is_word_byte(s[j])) {
        ++j;
        continue;
      }
      const bool joiner = s[j] == '-' || s[j] == '\'' ||
                          (s[j] == '.' && is_digit(s[j - 1]) && j + 1 < n && is_digit(s[j + 1]));
      if (joiner && j + 1 < n && is_word_byte(s[j + 1])) {
        j += 2;
        continue;
      }
      break;
    }
    if constexpr (Lower) {
      tokens.push_back(lower_ascii(s.substr(i, j - i)));
    } else {
      tokens.emplace_back(s.substr(i, j - i));
    }
    i = j;
  }
  return tokens;
}

const nlohmann::json* find_field(const nlohmann::json& record, const char* name) {
  auto it = record.find(name);
  if (it == record.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string string_field(const nlohmann::json& record, const char* name, const std::string& path) {
  const nlohmann::json* value = find_field(record, name);
  if (value == nullptr) return {};
  if (!value->is_string()) throw ParseError(path, "expected a string");
  return value->get<std::string>();
}

void segment_into(Document& doc, const std::string& body) {
  for (std::string& sentence : segment_sentences(body)) {
    SentenceRecord record = make_sentence(doc.sentences.size(), std::move(sentence));
    if (record.word_count > 0) doc.sentences.push_back(std::move(record));
  }
}

}  // namespace

std::string Document::text() const {
  std::string out;
  for (const Section& section : sections) {
    std::string body = normalize_whitespace(section.body);
    if (body.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += body;
  }
  return out;
}

std::size_t Document::total_words() const {
  std::size_t total = 0;
  for (const auto& s : sentences) total += s.word_count;
  return total;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> segment_sentences(std::string_view raw) {
  const std::string text = normalize_whitespace(raw);
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 2 < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    if (text[i + 1] != ' ') continue;
    const auto next = static_cast<unsigned char>(text[i + 2]);
    if (!std::isupper(next) && !std::isdigit(next)) continue;
    if (c == '.' && abbreviation_before(text, i)) continue;
    sentences.push_back(text.substr(start, i + 1 - start));
    start = i + 2;
  }
  if (start < text.size()) sentences.push_back(text.substr(start));
  return sentences;
}

std::vector<std::string> tokenize(std::string_view sentence) { return tokenize_impl<true>(sentence); }

std::vector<std::string> tokenize_surface(std::string_view sentence) {
  return tokenize_impl<false>(sentence);
}

SentenceRecord make_sentence(std::size_t index, std::string text) {
  SentenceRecord record;
  record.index = index;
  record.surface = tokenize_surface(text);
  record.tokens.reserve(record.surface.size());
  for (const auto& t : record.surface) record.tokens.push_back(lower_ascii(t));
  record.word_count = record.tokens.size();
  record.text = std::move(text);
  return record;
}

bool is_punctuation(std::string_view token) {
  return !token.empty() && std::none_of(token.begin(), token.end(), is_word_byte);
}

Document parse_document(const nlohmann::json& input, std::string_view fallback_id) {
  if (!input.is_object()) throw ParseError("<record>", "expected a JSON object");
  const nlohmann::json* nested = find_field(input, "metadata");
  const nlohmann::json& record =
      (nested != nullptr && nested->is_object() && !input.contains("sections")) ? *nested : input;

  Document doc;
  if (const nlohmann::json* id = find_field(input, "id"); id != nullptr) {
    if (id->is_string()) {
      doc.id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      doc.id = std::to_string(id->get<long long>());
    } else {
      throw ParseError("id", "expected a string or integer");
    }
  }
  if (doc.id.empty()) doc.id = std::string(fallback_id);
  doc.title = normalize_whitespace(string_field(record, "title", "title"));

  std::string abstract = normalize_whitespace(string_field(record, "abstractText", "abstractText"));
  if (abstract.empty()) abstract = normalize_whitespace(string_field(record, "abstract", "abstract"));
  if (!abstract.empty()) {
    doc.abstract = abstract;
    doc.sections.push_back({"Abstract", abstract});
  }

  if (const nlohmann::json* sections = find_field(record, "sections"); sections != nullptr) {
    if (!sections->is_array()) throw ParseError("sections", "expected an array");
    for (std::size_t i = 0; i < sections->size(); ++i) {
      const nlohmann::json& entry = (*sections)[i];
      const std::string path = "sections[" + std::to_string(i) + "]";
      if (!entry.is_object()) throw ParseError(path, "expected an object");
      Section section;
      section.heading = string_field(entry, "heading", path + ".heading");
      section.body = string_field(entry, "text", path + ".text");
      doc.sections.push_back(std::move(section));
    }
  }

  for (const Section& section : doc.sections) segment_into(doc, section.body);
  if (doc.sentences.empty() && doc.title.empty()) {
    throw EmptyDocumentError("document '" + doc.id + "' has no title and no non-empty section");
  }
  return doc;
}

Document parse_document_json(std::string_view json_text, std::string_view fallback_id) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("<record>", e.what());
  }
  return parse_document(record, fallback_id);
}

Document parse_plain_text(std::string_view text, std::string_view id) {
  Document doc;
  doc.id = std::string(id);
  doc.sections.push_back({"", std::string(text)});
  segment_into(doc, doc.sections.front().body);
  if (doc.sentences.empty()) throw EmptyDocumentError("document '" + doc.id + "' is empty");
  return doc;
}

Document load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::filesystem::path p(path);
  const std::string stem = p.stem().string();
  if (p.extension() == ".json") return parse_document_json(buffer.str(), stem);
  return parse_plain_text(buffer.str(), stem);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

SummaryStatistic summarize_values(const std::vector<double>& values) {
  SummaryStatistic s;
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.median = median(values);
  return s;
}

}  // namespace

CorpusStats collection_stats(std::span<const Document> documents) {
  CorpusStats stats;
  std::vector<double> counts;
  std::vector<double> pooled;
  for (const Document& doc : documents) {
    if (doc.sentences.empty()) continue;
    ++stats.documents;
    stats.sentence_counts.push_back(doc.sentences.size());
    counts.push_back(static_cast<double>(doc.sentences.size()));
    std::vector<double> lengths;
    lengths.reserve(doc.sentences.size());
    for (const auto& s : doc.sentences) lengths.push_back(static_cast<double>(s.word_count));
    pooled.insert(pooled.end(), lengths.begin(), lengths.end());
    stats.median_sentence_lengths.push_back(median(std::move(lengths)));
  }
  if (stats.documents == 0) throw Error("corpus statistics need at least one non-empty document");
  stats.corpus_size = summarize_values(counts);
  stats.sentence_length = summarize_values(stats.median_sentence_lengths);
  stats.sentence_length_pooled = summarize_values(pooled);
  return stats;
}

StatsReport corpus_stats(std::span<const Document> documents,
                         std::span<const Document> reference_summaries) {
  if (documents.empty()) throw Error("corpus statistics need at least one document");
  StatsReport report;
  report.papers = collection_stats(documents);
  if (!reference_summaries.empty()) report.references = collection_stats(reference_summaries);
  return report;
}

}  // namespace scisumm
