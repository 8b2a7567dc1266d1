#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "sras/policy.hpp"

using namespace sras;

TEST(SampleTopK, UniformScoresLogProb) {
  const std::vector<double> s{0.0, 0.0, 0.0};
  SeededRng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto a = sample_topk(s, 2, rng);
    EXPECT_EQ(a.action.k(), 2u);
    EXPECT_NEAR(a.log_prob, -1.79176, 1e-5);
    EXPECT_NEAR(a.log_prob, std::log(1.0 / 6.0), 1e-12);
  }
}

TEST(SampleTopK, PermutationsSumToOne) {
  const std::vector<double> s{0.3, -1.2, 2.0};
  double total = 0.0;
  oracle::for_each_ordered_subset(3, 3, [&](const std::vector<std::size_t>& o) {
    total += std::exp(logprob_of(s, TopKAction{o}));
  });
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(SampleTopK, EnumerationSumsToOneSmallN) {
  SeededRng rng(2);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      std::vector<double> s(n);
      for (double& x : s) x = rng.uniform(-3, 3);
      double total = 0.0;
      oracle::for_each_ordered_subset(n, k, [&](const std::vector<std::size_t>& o) {
        const double lp = logprob_of(s, TopKAction{o});
        EXPECT_NEAR(std::exp(lp), oracle::plackett_luce_prob(s, o), 1e-12);
        total += std::exp(lp);
      });
      EXPECT_NEAR(total, 1.0, 1e-9) << "n=" << n << " k=" << k;
    }
  }
}

TEST(SampleTopK, DominantScoreAlwaysFirst) {
  const std::vector<double> s{0.0, 1000.0, 0.0, 0.0};
  SeededRng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_topk(s, 1, rng).action.indices[0], 1u);
  EXPECT_GE(std::exp(logprob_of(s, TopKAction{{1}})), 1.0 - 1e-9);
}

TEST(SampleTopK, KGreaterThanNThrows) {
  SeededRng rng(4);
  const std::vector<double> s{1.0, 2.0};
  EXPECT_THROW(sample_topk(s, 3, rng), ArgumentError);
  EXPECT_THROW(argmax_topk(s, 3), ArgumentError);
}

TEST(SampleTopK, LogProbMatchesRecomputation) {
  SeededRng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> s(8);
    for (double& x : s) x = rng.uniform(-4, 4);
    const auto a = sample_topk(s, 3, rng);
    EXPECT_NEAR(a.log_prob, logprob_of(s, a.action), 1e-12);
    EXPECT_LE(a.log_prob, 0.0);
  }
}

TEST(SampleTopK, FrequenciesMatchPlackettLuce) {
  const std::vector<double> s{0.5, -0.3, 1.1, 0.0};
  SeededRng rng(6);
  const int draws = 200000;
  std::map<std::vector<std::size_t>, int> counts;
  for (int i = 0; i < draws; ++i) ++counts[sample_topk(s, 2, rng).action.indices];
  oracle::for_each_ordered_subset(4, 2, [&](const std::vector<std::size_t>& o) {
    const double p = oracle::plackett_luce_prob(s, o);
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(static_cast<double>(counts[o]) / draws, p, 3 * se);
  });
}

TEST(LogProbOf, CategoricalReduction) {
  const std::vector<double> s{1.0, 2.0, 3.0};
  const auto p = softmax(std::span<const double>(s));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(logprob_of(s, TopKAction{{i}}), std::log(p[i]), 1e-12);
  }
}

TEST(LogProbOf, ShiftInvariant) {
  SeededRng rng(7);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(6), shifted(6);
    const double c = rng.uniform(-100, 100);
    for (std::size_t i = 0; i < 6; ++i) {
      s[i] = rng.uniform(-3, 3);
      shifted[i] = s[i] + c;
    }
    const TopKAction a{{4, 0, 2}};
    EXPECT_NEAR(logprob_of(s, a), logprob_of(shifted, a), 1e-9);
  }
}

TEST(LogProbOf, InvalidActionsRejected) {
  const std::vector<double> s{0.0, 1.0, 2.0};
  EXPECT_THROW(logprob_of(s, TopKAction{{1, 1}}), ArgumentError);
  EXPECT_THROW(logprob_of(s, TopKAction{{3}}), ArgumentError);
  EXPECT_THROW(logprob_of(s, TopKAction{{0}}, 0.0), ArgumentError);
}

TEST(LogProbGradient, MatchesFiniteDifferences) {
  SeededRng rng(8);
  for (double temp : {1.0, 0.7}) {
    std::vector<double> s(6);
    for (double& x : s) x = rng.uniform(-2, 2);
    const TopKAction a{{3, 1, 5}};
    const auto g = logprob_gradient(s, a, temp);
    for (std::size_t i = 0; i < 6; ++i) {
      auto up = s, down = s;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd = (logprob_of(up, a, temp) - logprob_of(down, a, temp)) / 2e-6;
      EXPECT_NEAR(g[i], fd, 1e-7);
    }
  }
}

TEST(ArgmaxTopK, Examples) {
  EXPECT_EQ(argmax_topk(std::vector<double>{0.5, 0.9, 0.5, 0.1}, 2).indices,
            (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(argmax_topk(std::vector<double>{2, 2, 2, 2}, 3).indices,
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(argmax_topk(std::vector<double>{-1, -2, -3}, 1).indices,
            (std::vector<std::size_t>{0}));
}

TEST(ArgmaxTopK, ModeOfDistributionForDistinctScores) {
  SeededRng rng(9);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(5);
    for (double& x : s) x = rng.uniform(-2, 2);
    const auto a = argmax_topk(s, 1);
    EXPECT_EQ(a.indices, argmax_topk(s, 1).indices);
    const auto p = softmax(std::span<const double>(s));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_LE(p[i], p[a.indices[0]]);
  }
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(entropy(std::vector<double>(8, 0.3)), std::log(8.0), 1e-12);
  EXPECT_NEAR(entropy(std::vector<double>{1000.0, 0.0, 0.0}), 0.0, 1e-9);
  // -sum p ln p for p = softmax([1, 2, 3]), evaluated independently.
  EXPECT_NEAR(entropy(std::vector<double>{1.0, 2.0, 3.0}), 0.8323955818399389, 1e-12);
}
