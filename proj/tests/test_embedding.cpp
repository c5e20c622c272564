#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "replay_server.hpp"
#include "scisumm/embedding.hpp"
#include "scisumm/errors.hpp"

using namespace scisumm;
using testing_support::read_json;
using testing_support::ReplayServer;

namespace {

std::string fixture(const std::string& name) { return std::string(SCISUMM_FIXTURES) + "/" + name; }

std::vector<SentenceRecord> records(const std::vector<std::string>& texts) {
  std::vector<SentenceRecord> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(make_sentence(i, texts[i]));
  return out;
}

StaticWordVectors tiny_vocab() {
  return StaticWordVectors::from_map({{"cat", {1.0, 0.0}}, {"dog", {0.0, 1.0}}, {"pet", {1.0, 1.0}}});
}

}  // namespace

TEST(Cosine, ClosedForms) {
  Eigen::Vector3d a(1, 0, 0), b(0, 1, 0), c(2, 0, 0), z = Eigen::Vector3d::Zero();
  EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, c), 1.0);
  EXPECT_DOUBLE_EQ(cosine(a, -c), -1.0);
  EXPECT_DOUBLE_EQ(cosine(a, z), 0.0);
  EXPECT_THROW(cosine(Eigen::VectorXd(a), Eigen::VectorXd(Eigen::Vector2d(1, 0))), DimensionMismatch);
}

TEST(Cosine, MatchesOracleAndStaysInRange) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd u(7), v(7);
    for (int i = 0; i < 7; ++i) {
      u(i) = g(rng);
      v(i) = trial % 10 == 0 ? 3.0 * u(i) : g(rng);
    }
    const double c = cosine(u, v);
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, -1.0);
    std::vector<double> a(u.data(), u.data() + 7), b(v.data(), v.data() + 7);
    EXPECT_NEAR(c, oracle::cosine(a, b), 1e-12);
  }
}

TEST(Cosine, FloatScalar) {
  Eigen::Vector2f a(1.0f, 1.0f), b(1.0f, 0.0f);
  EXPECT_NEAR(cosine(a, b), 0.70710678f, 1e-6f);
}

TEST(ProviderKind, Names) {
  EXPECT_EQ(parse_provider_kind("static"), ProviderKind::StaticWordVectors);
  EXPECT_EQ(parse_provider_kind("precomputed-file"), ProviderKind::PrecomputedFile);
  EXPECT_EQ(parse_provider_kind("service"), ProviderKind::ExternalService);
  EXPECT_THROW(parse_provider_kind("bert"), ConfigError);
}

TEST(StaticVectors, MeanPoolsAndFlagsOov) {
  const auto model = tiny_vocab();
  const auto sents = records({"Cat and dog.", "Nothing known here.", "pet cat"});
  const auto e = model.embed_sentences(sents);
  ASSERT_EQ(e.size(), 3);
  EXPECT_EQ(e.dim(), 2);
  EXPECT_TRUE(e.row(0).isApprox(Eigen::RowVector2d(0.5, 0.5)));
  EXPECT_TRUE(e.row(1).isZero(0));
  EXPECT_TRUE(e.row(2).isApprox(Eigen::RowVector2d(1.0, 0.5)));
  EXPECT_EQ(e.oov, (std::vector<bool>{false, true, false}));
  EXPECT_NO_THROW(e.validate());
}

TEST(StaticVectors, QueryAndTokens) {
  const auto model = tiny_vocab();
  EXPECT_FALSE(model.embed_query("unknown words").has_value());
  const auto q = model.embed_query("A cat");
  ASSERT_TRUE(q.has_value());
  EXPECT_TRUE(q->isApprox(Eigen::Vector2d(1.0, 0.0)));
  const auto tv = model.embed_tokens("the cat chased a dog");
  EXPECT_EQ(tv.tokens, (std::vector<std::string>{"cat", "dog"}));
  EXPECT_EQ(tv.vectors.rows(), 2);
}

TEST(StaticVectors, LoadsFixtureFile) {
  const auto model = StaticWordVectors::load(fixture("vectors.txt"));
  EXPECT_EQ(model.dim(), 32u);
  EXPECT_GT(model.vocabulary_size(), 500u);
  ASSERT_NE(model.lookup("aquifer"), nullptr);
  EXPECT_EQ(model.lookup("zzzz"), nullptr);
}

TEST(StaticVectors, LoadErrors) {
  EXPECT_THROW(StaticWordVectors::load(fixture("missing.txt")), TransportError);
  const auto path = std::filesystem::temp_directory_path() / "scisumm_bad_vectors.txt";
  {
    std::ofstream out(path);
    out << "a 1 2 3\nb 1 2\n";
  }
  EXPECT_THROW(StaticWordVectors::load(path.string()), ContractViolation);
  std::filesystem::remove(path);
  EXPECT_THROW(StaticWordVectors::from_map({{"a", {1.0}}, {"b", {1.0, 2.0}}}), ContractViolation);
}

TEST(EmbeddingMatrix, ValidateRejectsUnflaggedZeroAndNan) {
  EmbeddingMatrix m;
  m.vectors = RowMatrix<double>::Zero(2, 2);
  m.vectors(0, 0) = 1.0;
  m.oov = {false, false};
  EXPECT_THROW(m.validate(), ContractViolation);
  m.oov = {false, true};
  EXPECT_NO_THROW(m.validate());
  m.vectors(0, 1) = std::nan("");
  EXPECT_THROW(m.validate(), ContractViolation);
  m.oov = {false};
  EXPECT_THROW(m.validate(), ContractViolation);
}

TEST(Precomputed, ReadsSentencesAndTitle) {
  PrecomputedVectors p(fixture("precomputed/mini.jsonl"));
  const auto sents = records({"a.", "b.", "c."});
  const auto e = p.embed_sentences(sents);
  EXPECT_TRUE(e.row(2).isApprox(Eigen::RowVector3d(0.5, 0.5, 0.0)));
  const auto q = p.embed_query("ignored");
  ASSERT_TRUE(q.has_value());
  EXPECT_TRUE(q->isApprox(Eigen::Vector3d(1, 0, 0)));
  EXPECT_THROW(p.embed_tokens("x"), ConfigError);
}

TEST(Precomputed, DirectoryLookupAndErrors) {
  PrecomputedVectors dir(fixture("precomputed"));
  EXPECT_EQ(dir.embed_sentences(records({"a."}), "mini").size(), 1);
  EXPECT_THROW(dir.embed_sentences(records({"a."}), "absent"), TransportError);
  PrecomputedVectors file(fixture("precomputed/mini.jsonl"));
  EXPECT_THROW(file.embed_sentences(records({"a.", "b.", "c.", "d."})), MissingVectorError);
}

TEST(ServiceClient, HealthFromReplay) {
  ReplayServer server(fixture("service"));
  ServiceClient client(server.url());
  const auto h = client.health();
  EXPECT_EQ(h.model, "replay-fixture-encoder");
  EXPECT_EQ(h.dim, 4u);
}

TEST(ServiceClient, SentenceReplayIsBitExact) {
  ReplayServer server(fixture("service"));
  const auto recorded = read_json(fixture("service/embed_sentence.json"));
  const auto texts = recorded["request"]["texts"].get<std::vector<std::string>>();
  ServiceClient client(server.url() + "/");
  const auto e = client.embed_texts(texts);
  const auto expected = recorded["response"]["vectors"];
  ASSERT_EQ(e.size(), 3);
  ASSERT_EQ(e.dim(), 4);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    for (Eigen::Index j = 0; j < e.dim(); ++j) {
      EXPECT_EQ(e.vectors(i, j), expected[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>());
    }
  }
  EXPECT_EQ(e.oov, (std::vector<bool>{false, false, true}));
}

TEST(ServiceClient, TokenReplayCarriesTruncationAndTokens) {
  ReplayServer server(fixture("service"));
  const auto recorded = read_json(fixture("service/embed_token.json"));
  const auto texts = recorded["request"]["texts"].get<std::vector<std::string>>();
  ServiceClient client(server.url());
  const auto batch = client.embed_token_batch(texts);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_FALSE(batch[0].truncated);
  EXPECT_TRUE(batch[1].truncated);
  EXPECT_EQ(batch[1].tokens, (std::vector<std::string>{"pl", "##u", "##me"}));
  ASSERT_EQ(batch[1].vectors.rows(), 3);
  EXPECT_EQ(batch[1].vectors(0, 2), -0.75);
  EXPECT_EQ(batch[0].vectors(0, 0), 0.5);
}

TEST(ServiceClient, UrlPrefixIsKept) {
  ReplayServer server({{"model", "m"}, {"dim", 2}}, [&](const nlohmann::json&, httplib::Response& res) {
    res.set_content(R"({"dim": 2, "vectors": [[1, 0]]})", "application/json");
  });
  // Requests to an unknown prefix hit no handler and come back 404.
  ServiceClient prefixed(server.url() + "/v1");
  const std::vector<std::string> one = {"x"};
  EXPECT_THROW(prefixed.embed_texts(one), TransportError);
  ServiceClient plain(server.url());
  EXPECT_EQ(plain.embed_texts(one).size(), 1);
}

TEST(ServiceClient, BatchesRequests) {
  ReplayServer server({{"model", "m"}, {"dim", 1}}, [](const nlohmann::json& req, httplib::Response& res) {
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : req["texts"]) vectors.push_back({static_cast<double>(t.get<std::string>().size())});
    res.set_content(nlohmann::json{{"dim", 1}, {"vectors", vectors}}.dump(), "application/json");
  });
  ServiceClient client(server.url(), 2);
  const std::vector<std::string> texts = {"a", "bb", "ccc", "dddd", "eeeee"};
  const auto e = client.embed_texts(texts);
  EXPECT_EQ(server.requests(), 3u);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(e.vectors(i, 0), static_cast<double>(i + 1));
}

TEST(ServiceClient, ContractViolations) {
  auto serve = [](std::string body) {
    return [body](const nlohmann::json&, httplib::Response& res) { res.set_content(body, "application/json"); };
  };
  const std::vector<std::string> two = {"a", "b"};
  {
    ReplayServer s({{"dim", 2}}, serve(R"({"dim": 2, "vectors": [[1, 0]]})"));
    EXPECT_THROW(ServiceClient(s.url()).embed_texts(two), ContractViolation);  // count
  }
  {
    ReplayServer s({{"dim", 2}}, serve(R"({"dim": 2, "vectors": [[1, 0], [1, 0, 0]]})"));
    EXPECT_THROW(ServiceClient(s.url()).embed_texts(two), ContractViolation);  // length
  }
  {
    ReplayServer s({{"dim", 2}}, serve("not json"));
    EXPECT_THROW(ServiceClient(s.url()).embed_texts(two), ContractViolation);
  }
  {
    ReplayServer s({{"model", "m"}}, serve("{}"));
    EXPECT_THROW(ServiceClient(s.url()).health(), ContractViolation);  // no dim
  }
}

TEST(ServiceClient, TransportFailures) {
  {
    ReplayServer s({{"dim", 2}}, [](const nlohmann::json&, httplib::Response& res) { res.status = 500; });
    const std::vector<std::string> one = {"a"};
    EXPECT_THROW(ServiceClient(s.url()).embed_texts(one), TransportError);
  }
  // Port 9 (discard) on loopback has no listener in the sandbox.
  EXPECT_THROW(ServiceClient("http://127.0.0.1:9").health(), TransportError);
}

TEST(ServiceClient, ProviderInterface) {
  const auto model = tiny_vocab();
  ReplayServer server({{"dim", 2}}, [&](const nlohmann::json& req, httplib::Response& res) {
    std::vector<SentenceRecord> sents;
    for (const auto& t : req["texts"]) sents.push_back(make_sentence(sents.size(), t.get<std::string>()));
    const auto e = model.embed_sentences(sents);
    nlohmann::json vectors = nlohmann::json::array();
    for (Eigen::Index i = 0; i < e.size(); ++i) vectors.push_back({e.vectors(i, 0), e.vectors(i, 1)});
    res.set_content(nlohmann::json{{"dim", 2}, {"vectors", vectors}}.dump(), "application/json");
  });
  ProviderConfig config{ProviderKind::ExternalService, server.url(), 32};
  const auto provider = make_provider(config);
  const auto sents = records({"Cat and dog.", "Nothing known here."});
  const auto e = provider->embed_sentences(sents);
  EXPECT_EQ(e.vectors, model.embed_sentences(sents).vectors);
  EXPECT_FALSE(provider->embed_query("nothing").has_value());
  EXPECT_TRUE(provider->embed_query("cat").has_value());
}
