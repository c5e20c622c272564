#include "scisumm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "scisumm/ingest.hpp"

namespace scisumm {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i + n))];
  }
  return counts;
}

MetricScore mean_of(const std::vector<MetricScore>& scores) {
  MetricScore m;
  if (scores.empty()) return m;
  for (const auto& s : scores) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const auto n = static_cast<double>(scores.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

nlohmann::json score_json(const MetricScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

TokenVectors token_vectors(const EmbeddingProvider& source, const std::string& text,
                           std::size_t max_tokens) {
  TokenVectors tv = source.embed_tokens(text);
  if (static_cast<std::size_t>(tv.vectors.rows()) > max_tokens) {
    tv.vectors.conservativeResize(static_cast<Eigen::Index>(max_tokens), Eigen::NoChange);
    if (tv.tokens.size() > max_tokens) tv.tokens.resize(max_tokens);
    tv.truncated = true;
  }
  return tv;
}

}  // namespace

MetricScore make_score(double precision, double recall) {
  MetricScore s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return s;
}

MetricScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                    std::size_t n) {
  if (n == 0) throw Error("rouge_n: n must be positive");
  if (reference.size() < n) {
    MetricScore zero;
    zero.warning = true;
    return zero;
  }
  const NgramCounts cand = ngrams(candidate, n);
  const NgramCounts ref = ngrams(reference, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  const std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  const std::size_t ref_total = reference.size() - n + 1;
  const double p = cand_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(cand_total);
  const double r = static_cast<double>(overlap) / static_cast<double>(ref_total);
  return make_score(p, r);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row[b.size()];
}

MetricScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  return make_score(lcs / static_cast<double>(candidate.size()),
                    lcs / static_cast<double>(reference.size()));
}

Histogram histogram(std::span<const double> values, double bin_width) {
  Histogram h;
  h.bin_width = bin_width;
  if (values.empty()) return h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.start = *lo;
  const double range = *hi - *lo;
  const auto bins = static_cast<std::size_t>(std::floor(range / bin_width + 1e-9)) + 1;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto idx = static_cast<std::size_t>(std::floor((v - h.start) / bin_width + 1e-9));
    ++h.counts[std::min(idx, bins - 1)];
  }
  return h;
}

EvalReport evaluate_corpus(const std::map<std::string, std::string>& candidates,
                           const std::map<std::string, std::string>& references,
                           const EmbeddingProvider* token_source, std::size_t max_tokens) {
  EvalReport report;
  for (const auto& [id, text] : candidates) {
    auto ref = references.find(id);
    if (ref == references.end()) {
      report.unmatched_candidates.push_back(id);
      continue;
    }
    DocumentScores doc;
    doc.id = id;
    const auto cand_tokens = tokenize(text);
    const auto ref_tokens = tokenize(ref->second);
    doc.rouge1 = rouge_n(cand_tokens, ref_tokens, 1);
    doc.rouge2 = rouge_n(cand_tokens, ref_tokens, 2);
    doc.rougeL = rouge_l(cand_tokens, ref_tokens);
    if (token_source != nullptr) {
      const TokenVectors c = token_vectors(*token_source, text, max_tokens);
      const TokenVectors r = token_vectors(*token_source, ref->second, max_tokens);
      doc.bert = bertscore(c.vectors, r.vectors);
      doc.bert_truncated = c.truncated || r.truncated;
    }
    report.documents.push_back(std::move(doc));
  }
  for (const auto& [id, text] : references) {
    if (candidates.count(id) == 0) report.unmatched_references.push_back(id);
  }

  std::vector<MetricScore> r1, r2, rl, bert;
  for (const auto& d : report.documents) {
    r1.push_back(d.rouge1);
    r2.push_back(d.rouge2);
    rl.push_back(d.rougeL);
    if (d.bert) bert.push_back(*d.bert);
  }
  report.mean.rouge1 = mean_of(r1);
  report.mean.rouge2 = mean_of(r2);
  report.mean.rougeL = mean_of(rl);
  std::vector<double> f1s;
  if (!bert.empty()) {
    report.mean.bert = mean_of(bert);
    report.histogram_metric = "bertscore_f1";
    for (const auto& b : bert) f1s.push_back(b.f1);
  } else {
    report.histogram_metric = "rouge1_f1";
    for (const auto& s : r1) f1s.push_back(s.f1);
  }
  report.histogram = histogram(f1s);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : report.documents) {
    nlohmann::json entry = {{"id", d.id},
                            {"rouge1", score_json(d.rouge1)},
                            {"rouge2", score_json(d.rouge2)},
                            {"rougeL", score_json(d.rougeL)}};
    if (d.rouge1.warning || d.rouge2.warning) entry["warning"] = "reference shorter than n";
    if (d.bert) {
      entry["bertscore"] = score_json(*d.bert);
      entry["bertscore_truncated"] = d.bert_truncated;
    }
    docs.push_back(std::move(entry));
  }
  nlohmann::json mean = {{"rouge1", score_json(report.mean.rouge1)},
                         {"rouge2", score_json(report.mean.rouge2)},
                         {"rougeL", score_json(report.mean.rougeL)}};
  if (report.mean.bert) mean["bertscore"] = score_json(*report.mean.bert);
  return {{"documents", docs},
          {"mean", mean},
          {"count", report.documents.size()},
          {"excluded", {{"candidates", report.unmatched_candidates},
                        {"references", report.unmatched_references}}},
          {"histogram", {{"metric", report.histogram_metric},
                         {"bin_width", report.histogram.bin_width},
                         {"start", report.histogram.start},
                         {"counts", report.histogram.counts}}}};
}

std::string format_table(const EvalReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %7s %7s %7s %7s %7s %7s\n", "id", "R1_F", "R1_R", "R2_F",
                "R2_R", "RL_F", "RL_R");
  out += line;
  auto row = [&](const std::string& name, const MetricScore& a, const MetricScore& b,
                 const MetricScore& c) {
    std::snprintf(line, sizeof line, "%-32s %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n", name.c_str(),
                  100.0 * a.f1, 100.0 * a.recall, 100.0 * b.f1, 100.0 * b.recall, 100.0 * c.f1,
                  100.0 * c.recall);
    out += line;
  };
  for (const auto& d : report.documents) row(d.id, d.rouge1, d.rouge2, d.rougeL);
  row("mean", report.mean.rouge1, report.mean.rouge2, report.mean.rougeL);
  if (report.mean.bert) {
    std::snprintf(line, sizeof line, "bertscore  P %.4f  R %.4f  F1 %.4f\n", report.mean.bert->precision,
                  report.mean.bert->recall, report.mean.bert->f1);
    out += line;
  }
  for (const auto& id : report.unmatched_candidates) out += "excluded candidate: " + id + "\n";
  for (const auto& id : report.unmatched_references) out += "excluded reference: " + id + "\n";
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_start,count\n";
  char line[64];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6f,%zu\n", h.start + static_cast<double>(i) * h.bin_width,
                  h.counts[i]);
    out += line;
  }
  return out;
}

std::string histogram_gnuplot(const std::string& csv_path) {
  return "set datafile separator ','\n"
         "set style fill solid 0.6\n"
         "set boxwidth 0.005 absolute\n"
         "set xlabel 'F1-score'\n"
         "set ylabel 'frequency'\n"
         "plot '" + csv_path + "' every ::1 using ($1+0.0025):2 with boxes notitle\n";
}

}  // namespace scisumm
