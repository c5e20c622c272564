#include <gtest/gtest.h>

#include <cctype>
#include <filesystem>

#include "scisumm/errors.hpp"
#include "scisumm/ingest.hpp"

using namespace scisumm;

namespace {

std::string fixture(const std::string& name) { return std::string(SCISUMM_FIXTURES) + "/" + name; }

}  // namespace

TEST(Segment, SplitsOnTerminalPunctuationBeforeCapital) {
  const auto s = segment_sentences("We test this. It works! Does it? 3 cases pass.");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "We test this.");
  EXPECT_EQ(s[1], "It works!");
  EXPECT_EQ(s[2], "Does it?");
  EXPECT_EQ(s[3], "3 cases pass.");
}

TEST(Segment, KeepsAbbreviationsAndInitials) {
  const auto s = segment_sentences(
      "Smith et al. Proposed it, e.g. Gaussian noise. See Fig. 2 and Eq. 4 by J. Doe. Done now.");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], "Smith et al. Proposed it, e.g. Gaussian noise.");
  EXPECT_EQ(s[1], "See Fig. 2 and Eq. 4 by J. Doe.");
  EXPECT_EQ(s[2], "Done now.");
}

TEST(Segment, EtAlAtTextStart) {
  const auto s = segment_sentences("et al. Reported this. Next one.");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], "et al. Reported this.");
}

TEST(Segment, NoSplitBeforeLowercase) {
  EXPECT_EQ(segment_sentences("Values near 0. then rise.").size(), 1u);
}

TEST(Tokenize, KeepsJoinersAndSplitsPunctuation) {
  const auto t = tokenize("State-of-the-art models don't fail 3.5% (often).");
  const std::vector<std::string> expected = {"state-of-the-art", "models", "don't", "fail", "3.5",
                                             "%",                "(",      "often", ")",    "."};
  EXPECT_EQ(t, expected);
}

TEST(Tokenize, SurfaceKeepsCaseAndAligns) {
  const auto rec = make_sentence(4, "The CNN beats SVMs.");
  EXPECT_EQ(rec.index, 4u);
  EXPECT_EQ(rec.surface, (std::vector<std::string>{"The", "CNN", "beats", "SVMs", "."}));
  EXPECT_EQ(rec.tokens, (std::vector<std::string>{"the", "cnn", "beats", "svms", "."}));
  EXPECT_EQ(rec.word_count, rec.tokens.size());
}

TEST(Tokenize, TrailingHyphenIsPunctuation) {
  EXPECT_EQ(tokenize("pre- and post"), (std::vector<std::string>{"pre", "-", "and", "post"}));
}

TEST(Tokenize, Utf8BytesStayInsideWords) {
  const auto t = tokenize("na\xC3\xAFve models");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], "na\xC3\xAFve");
}

TEST(Punctuation, Classification) {
  EXPECT_TRUE(is_punctuation("."));
  EXPECT_TRUE(is_punctuation("--"));
  EXPECT_FALSE(is_punctuation("a."));
  EXPECT_FALSE(is_punctuation(""));
}

TEST(Stopwords, CommonWords) {
  for (const char* w : {"the", "a", "of", "and", "is", "we", "with"}) EXPECT_TRUE(is_stopword(w)) << w;
  for (const char* w : {"graph", "sensor", "protein", "The"}) EXPECT_FALSE(is_stopword(w)) << w;
}

TEST(ParseDocument, SectionsAbstractAndIds) {
  const auto doc = parse_document_json(R"({
    "id": 17, "title": "  A  title ", "abstractText": "Short abstract here.",
    "sections": [{"heading": "Intro", "text": "First sentence. Second one."},
                 {"heading": null, "text": "Third sentence."}]})");
  EXPECT_EQ(doc.id, "17");
  EXPECT_EQ(doc.title, "A title");
  ASSERT_TRUE(doc.abstract.has_value());
  ASSERT_EQ(doc.sections.size(), 3u);
  EXPECT_EQ(doc.sections.front().heading, "Abstract");
  ASSERT_EQ(doc.sentences.size(), 4u);
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) EXPECT_EQ(doc.sentences[i].index, i);
  EXPECT_EQ(doc.sentences[0].text, "Short abstract here.");
  EXPECT_EQ(doc.total_words(), 4u + 3u + 3u + 3u);
}

TEST(ParseDocument, AbstractAliasAndNestedMetadata) {
  const auto doc = parse_document_json(
      R"({"id": "x", "metadata": {"title": "T", "abstract": "Only the abstract."}})");
  EXPECT_EQ(doc.title, "T");
  ASSERT_EQ(doc.sentences.size(), 1u);
}

TEST(ParseDocument, FallbackId) {
  const auto doc = parse_document_json(R"({"title": "T", "sections": []})", "stem");
  EXPECT_EQ(doc.id, "stem");
  EXPECT_TRUE(doc.sentences.empty());
}

TEST(ParseDocument, ErrorsNameTheField) {
  try {
    parse_document_json(R"({"sections": [{"heading": "h", "text": 5}]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "sections[0].text");
  }
  try {
    parse_document_json(R"({"title": 3})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "title");
  }
  EXPECT_THROW(parse_document_json("{not json"), ParseError);
  EXPECT_THROW(parse_document_json("[1, 2]"), ParseError);
}

TEST(ParseDocument, EmptyDocument) {
  EXPECT_THROW(parse_document_json(R"({"sections": [{"text": "   "}]})"), EmptyDocumentError);
  EXPECT_THROW(parse_plain_text("  \n ", "e"), EmptyDocumentError);
}

TEST(LoadDocument, FixtureCorpus) {
  for (const char* id : {"groundwater", "protein", "spiking"}) {
    const auto doc = load_document(fixture(std::string("corpus/") + id + ".json"));
    EXPECT_EQ(doc.id, id);
    EXPECT_FALSE(doc.title.empty());
    EXPECT_GT(doc.sentences.size(), 30u);
    for (const auto& s : doc.sentences) {
      EXPECT_EQ(s.word_count, s.tokens.size());
      ASSERT_EQ(s.tokens.size(), s.surface.size());
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        std::string lower = s.surface[i];
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        EXPECT_EQ(lower, s.tokens[i]);
      }
    }
  }
}

TEST(LoadDocument, PlainTextUsesStem) {
  const auto doc = load_document(fixture("references/protein.txt"));
  EXPECT_EQ(doc.id, "protein");
  EXPECT_EQ(doc.sentences.size(), 3u);
}

TEST(LoadDocument, MissingFile) { EXPECT_THROW(load_document(fixture("nope.json")), Error); }

TEST(Stats, MedianAveragesMiddlePair) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_DOUBLE_EQ(median({}), 0.0);
}

TEST(Stats, CorpusStatistics) {
  std::vector<Document> docs;
  docs.push_back(parse_plain_text("One two three. Four five. Six seven eight nine.", "a"));  // 4,3,5
  docs.push_back(parse_plain_text("Alpha beta.", "b"));                                     // 3
  Document empty;
  empty.id = "c";
  docs.push_back(empty);
  std::vector<Document> refs = {parse_plain_text("Short ref.", "a")};

  const StatsReport r = corpus_stats(docs, refs);
  EXPECT_EQ(r.papers.documents, 2u);
  EXPECT_EQ(r.papers.sentence_counts, (std::vector<std::size_t>{3, 1}));
  EXPECT_DOUBLE_EQ(r.papers.corpus_size.min, 1.0);
  EXPECT_DOUBLE_EQ(r.papers.corpus_size.max, 3.0);
  EXPECT_DOUBLE_EQ(r.papers.corpus_size.median, 2.0);
  EXPECT_EQ(r.papers.median_sentence_lengths, (std::vector<double>{4.0, 3.0}));
  EXPECT_DOUBLE_EQ(r.papers.sentence_length.median, 3.5);
  EXPECT_DOUBLE_EQ(r.papers.sentence_length_pooled.median, 3.5);  // {3,3,4,5}
  EXPECT_DOUBLE_EQ(r.papers.sentence_length_pooled.max, 5.0);
  ASSERT_TRUE(r.references.has_value());
  EXPECT_EQ(r.references->documents, 1u);
}

TEST(Stats, EmptyCorpusThrows) {
  EXPECT_THROW(corpus_stats({}), Error);
  std::vector<Document> only_empty(1);
  EXPECT_THROW(corpus_stats(only_empty), Error);
}
