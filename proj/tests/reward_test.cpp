#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "oracles.hpp"
#include "sras/reward.hpp"

using namespace sras;

namespace {

RewardConfig no_stopwords() {
  RewardConfig c;
  c.stopwords.clear();
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sras_reward_" + name);
}

}  // namespace

TEST(NormalizeAnswer, Examples) {
  EXPECT_EQ(normalize_answer("The Eiffel Tower!", {"the"}),
            (std::vector<std::string>{"eiffel", "tower"}));
  EXPECT_TRUE(normalize_answer("", {"the"}).empty());
  EXPECT_EQ(normalize_answer("PARIS, paris", {}), (std::vector<std::string>{"paris", "paris"}));
}

TEST(NormalizeAnswer, KeepsNonAsciiBytesInsideTokens) {
  EXPECT_EQ(normalize_answer("Caf\xc3\xa9-au lait", {}),
            (std::vector<std::string>{"caf\xc3\xa9", "au", "lait"}));
}

TEST(Stopwords, DefaultListHas35Words) {
  EXPECT_EQ(default_stopwords().size(), 35u);
  RewardConfig c;
  EXPECT_EQ(c.stopwords.size(), 35u);
  EXPECT_TRUE(c.stopwords.contains("the"));
}

TEST(RelaxedF1, Examples) {
  const RewardConfig c;
  EXPECT_DOUBLE_EQ(relaxed_f1("Paris", "paris", c), 1.0);
  EXPECT_NEAR(relaxed_f1("Paris city", "Paris", c), 0.66667, 1e-5);
  EXPECT_DOUBLE_EQ(relaxed_f1("London", "Paris", c), 0.0);
}

TEST(RelaxedF1, EmptyConventions) {
  const RewardConfig c;
  EXPECT_DOUBLE_EQ(relaxed_f1("", "", c), 1.0);
  EXPECT_DOUBLE_EQ(relaxed_f1("the", "a", c), 1.0);  // both empty after stopwords
  EXPECT_DOUBLE_EQ(relaxed_f1("", "Paris", c), 0.0);
  EXPECT_DOUBLE_EQ(relaxed_f1("Paris", "", c), 0.0);
}

TEST(RelaxedF1, MultisetOverlap) {
  const auto c = no_stopwords();
  // pred [a, a, b], ref [a, b, b]: overlap 2, P = R = 2/3.
  EXPECT_NEAR(relaxed_f1("a a b", "a b b", c), 2.0 / 3.0, 1e-15);
}

TEST(RelaxedF1, SymmetricAndBounded) {
  const auto c = no_stopwords();
  SeededRng rng(1);
  const std::vector<std::string> vocab{"x", "y", "z", "w", "v"};
  for (int t = 0; t < 300; ++t) {
    std::string a, b;
    for (std::size_t i = rng.uniform_int(5); i > 0; --i) a += vocab[rng.uniform_int(5)] + " ";
    for (std::size_t i = rng.uniform_int(5); i > 0; --i) b += vocab[rng.uniform_int(5)] + " ";
    const double f = relaxed_f1(a, b, c);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_DOUBLE_EQ(f, relaxed_f1(b, a, c));
    auto ta = normalize_answer(a, {}), tb = normalize_answer(b, {});
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    EXPECT_EQ(f == 1.0, ta == tb);
  }
}

TEST(ExactMatch, NormalizedEquality) {
  const RewardConfig c;
  EXPECT_EQ(exact_match("The Paris!", "paris", c), 1.0);
  EXPECT_EQ(exact_match("Paris city", "paris", c), 0.0);
}

TEST(HybridReward, Examples) {
  const RewardConfig c;
  EXPECT_DOUBLE_EQ(hybrid_reward("Paris", "Paris", ConstantScorer(1.0), c), 1.0);
  // F1 = 0.5: pred [paris, france, city, capital], ref [paris, ...]? use P=R=0.5.
  const auto nsw = no_stopwords();
  RewardConfig mix = nsw;
  mix.alpha = 0.6;
  ASSERT_NEAR(relaxed_f1("a b", "a c", mix), 0.5, 1e-15);
  EXPECT_NEAR(hybrid_reward("a b", "a c", ConstantScorer(0.8), mix), 0.62, 1e-12);
  RewardConfig one = nsw;
  one.alpha = 1.0;
  EXPECT_DOUBLE_EQ(hybrid_reward("a b", "a c", ConstantScorer(0.3), one),
                   relaxed_f1("a b", "a c", one));
}

TEST(HybridReward, MonotoneInComponents) {
  const auto c = no_stopwords();
  double prev = -1.0;
  for (double sem = 0.0; sem <= 1.0; sem += 0.1) {
    const double r = hybrid_reward("a b", "a c", ConstantScorer(sem), c);
    EXPECT_GE(r, prev);
    prev = r;
  }
  EXPECT_LE(hybrid_reward("a b", "a c", ConstantScorer(0.5), c),
            hybrid_reward("a c", "a c", ConstantScorer(0.5), c));
}

namespace {
class ThrowingScorer final : public SemanticScorer {
 public:
  double score(std::string_view, std::string_view) const override {
    throw std::runtime_error("backend down");
  }
};
}  // namespace

TEST(HybridReward, ScorerFailureCarriesExampleId) {
  const RewardConfig c;
  try {
    hybrid_reward("a", "b", ThrowingScorer(), c, "ex-17");
    FAIL();
  } catch (const RewardError& e) {
    EXPECT_EQ(e.example_id(), "ex-17");
    EXPECT_NE(std::string(e.what()).find("backend down"), std::string::npos);
  }
  EXPECT_THROW(hybrid_reward("a", "b", ConstantScorer(1.5), c, "ex"), RewardError);
  RewardConfig bad;
  bad.alpha = 1.2;
  EXPECT_THROW(hybrid_reward("a", "b", ConstantScorer(0.5), bad), ArgumentError);
}

TEST(NormalizeBatch, Examples) {
  const auto a = normalize_batch(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(a[0], -1.22474, 1e-5);
  EXPECT_NEAR(a[1], 0.0, 1e-12);
  EXPECT_NEAR(a[2], 1.22474, 1e-5);
  for (double x : normalize_batch(std::vector<double>{5, 5, 5})) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(normalize_batch(std::vector<double>{7}), (std::vector<double>{0.0}));
  EXPECT_THROW(normalize_batch(std::vector<double>{}), ArgumentError);
}

TEST(NormalizeBatch, ZeroMeanUnitVarianceAndAffineInvariant) {
  SeededRng rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(2 + rng.uniform_int(10));
    for (double& x : r) x = rng.uniform(-1, 1);
    const auto z = normalize_batch(r);
    double mean = 0, var = 0;
    for (double x : z) mean += x;
    mean /= z.size();
    for (double x : z) var += (x - mean) * (x - mean);
    var /= z.size();
    EXPECT_LE(std::abs(mean), 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-6);
    const double a = rng.uniform(0.5, 4), b = rng.uniform(-3, 3);
    std::vector<double> s;
    for (double x : r) s.push_back(a * x + b);
    const auto zs = normalize_batch(s);
    // The 1e-8 guard in the denominator limits invariance to about 1e-7 relative.
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(zs[i], z[i], 1e-6);
  }
}

TEST(EmbeddingCosine, IdenticalAndEmptyTexts) {
  EmbeddingStore store(4);
  const TokenEmbeddingTable table(store);
  EXPECT_NEAR(embedding_cosine_semantic("red apple", "red apple", table), 1.0, 1e-12);
  EXPECT_EQ(embedding_cosine_semantic("", "", table), 1.0);
  EXPECT_EQ(embedding_cosine_semantic("", "x", table), 0.0);
}

TEST(EmbeddingCosine, OrthogonalTokensScoreHalf) {
  EmbeddingStore store(3);
  store.add("red", std::vector<float>{1, 0, 0});
  store.add("blue", std::vector<float>{0, 1, 0});
  const TokenEmbeddingTable table(store);
  EXPECT_NEAR(embedding_cosine_semantic("red", "blue", table), 0.5, 1e-12);
}

TEST(EmbeddingCosine, MatchesBruteForceGreedyMatcher) {
  SeededRng rng(3);
  const std::size_t d = 6;
  EmbeddingStore store(d);
  const std::vector<std::string> vocab{"t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7"};
  for (const auto& tok : vocab) {
    std::vector<float> v(d);
    for (float& x : v) x = static_cast<float>(rng.normal());
    store.add(tok, v);
  }
  const TokenEmbeddingTable table(store);
  for (int t = 0; t < 200; ++t) {
    std::string a, b;
    oracle::Mat va, vb;
    for (int i = 0; i < 5; ++i) {
      const auto& ta = vocab[rng.uniform_int(vocab.size())];
      const auto& tb = vocab[rng.uniform_int(vocab.size())];
      a += ta + " ";
      b += tb + " ";
      const auto ra = store.at(ta), rb = store.at(tb);
      va.emplace_back(ra.begin(), ra.end());
      vb.emplace_back(rb.begin(), rb.end());
    }
    EXPECT_NEAR(embedding_cosine_semantic(a, b, table), oracle::greedy_match_f1(va, vb), 1e-9);
  }
}

TEST(EmbeddingCosine, UnseenTokensAreDeterministicUnitVectors) {
  const TokenEmbeddingTable table(EmbeddingStore(16));
  const auto a = table.vector_for("zebra");
  const auto b = table.vector_for("zebra");
  const auto c = table.vector_for("zebras");
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NEAR(l2_norm(std::span<const double>(a)), 1.0, 1e-12);
}

TEST(SemanticSource, NamesRoundTrip) {
  for (auto s : {SemanticSource::kPrecomputedCache, SemanticSource::kEmbeddingCosine,
                 SemanticSource::kSyntheticOracle, SemanticSource::kConstantZero}) {
    EXPECT_EQ(parse_semantic_source(to_string(s)), s);
  }
  EXPECT_THROW(parse_semantic_source("bertscore"), ArgumentError);
}

TEST(RewardCache, KeyIgnoresSelectionOrder) {
  RewardCache cache;
  cache.add({"q1", {"d2", "d1", "d3"}, "Paris", 0.9});
  ASSERT_NE(cache.find("q1", {"d1", "d2", "d3"}), nullptr);
  EXPECT_EQ(cache.find("q1", {"d1", "d2", "d3"})->prediction, "Paris");
  EXPECT_EQ(cache.find("q1", {"d1", "d2"}), nullptr);
  EXPECT_EQ(cache.find("q2", {"d1", "d2", "d3"}), nullptr);
  EXPECT_THROW(cache.add({"q1", {"d3", "d1", "d2"}, "x", 0.1}), DataError);
  EXPECT_THROW(cache.add({"q9", {"d1"}, "x", 1.1}), DataError);
}

TEST(RewardCache, FileRoundTrip) {
  RewardCache cache;
  cache.add({"q1", {"d1", "d2"}, "Paris", 0.9});
  cache.add({"q2", {"d3", "d4"}, "Rome, Italy", 0.25});
  const auto path = temp_path("cache.jsonl");
  cache.save(path);
  const auto back = RewardCache::load(path);
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(back.find("q2", {"d4", "d3"})->prediction, "Rome, Italy");
  EXPECT_DOUBLE_EQ(back.find("q2", {"d4", "d3"})->semantic_score, 0.25);
  std::filesystem::remove(path);
}

TEST(RewardCache, BadLinesCiteLineNumbers) {
  const auto path = temp_path("bad.jsonl");
  {
    std::ofstream out(path);
    out << R"({"example_id":"q1","doc_ids":["a"],"prediction":"x","semantic_score":0.5})" << "\n";
    out << R"({"example_id":"q2","doc_ids":["a"],"prediction":"x"})" << "\n";
  }
  try {
    RewardCache::load(path);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("semantic_score"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(CachedRewardEngine, ScoresCachedPrediction) {
  RewardCache cache;
  cache.add({"q1", {"d1", "d2"}, "the Paris", 0.8});
  RewardConfig cfg;
  cfg.semantic_source = SemanticSource::kPrecomputedCache;
  const CachedRewardEngine engine(cache, cfg);
  QAExample ex{"q1", "capital?", "Paris", "d1", {"d1", "d2", "d3"}, std::nullopt};
  const std::vector<std::string> sel{"d2", "d1"};
  const auto out = engine.assess(ex, sel);
  EXPECT_DOUBLE_EQ(out.relaxed_f1, 1.0);
  EXPECT_DOUBLE_EQ(out.sparse, 1.0);
  EXPECT_NEAR(out.shaped, 0.6 + 0.4 * 0.8, 1e-12);
  const std::vector<std::string> missing{"d3"};
  EXPECT_THROW(engine.assess(ex, missing), RewardError);

  cfg.semantic_source = SemanticSource::kConstantZero;
  const CachedRewardEngine zero(cache, cfg);
  EXPECT_NEAR(zero.assess(ex, sel).shaped, 0.6, 1e-12);
}
