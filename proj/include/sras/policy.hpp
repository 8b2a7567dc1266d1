#ifndef SRAS_POLICY_HPP_
#define SRAS_POLICY_HPP_

// Stochastic top-k selection over candidate scores.
//
// An action is an ordered k-subset drawn by sequential softmax sampling
// without replacement (Plackett-Luce). Its log-probability is the sum of the
// k per-step log-softmax terms over the candidates still remaining. PPO ratios
// use that joint log-probability; inference uses argmax_topk.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sras/errors.hpp"
#include "sras/numcore.hpp"

namespace sras {

struct TopKAction {
  std::vector<std::size_t> indices;

  std::size_t k() const noexcept { return indices.size(); }
  bool contains(std::size_t i) const {
    return std::find(indices.begin(), indices.end(), i) != indices.end();
  }
  friend bool operator==(const TopKAction&, const TopKAction&) = default;
};

struct SampledAction {
  TopKAction action;
  double log_prob = 0.0;
};

namespace detail {

inline void check_k(std::size_t k, std::size_t n) {
  if (k > n) {
    throw ArgumentError("k=" + std::to_string(k) + " exceeds n=" +
                        std::to_string(n));
  }
}

inline void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ArgumentError("temperature must be positive");
  }
}

inline void check_action(const TopKAction& action, std::size_t n) {
  check_k(action.k(), n);
  std::vector<bool> seen(n, false);
  for (std::size_t i : action.indices) {
    if (i >= n) {
      throw ArgumentError("action index " + std::to_string(i) +
                          " out of range for n=" + std::to_string(n));
    }
    if (seen[i]) throw ArgumentError("repeated index " + std::to_string(i));
    seen[i] = true;
  }
}

}  // namespace detail

inline SampledAction sample_topk(std::span<const double> scores, std::size_t k,
                                 SeededRng& rng, double temperature = 1.0) {
  detail::check_k(k, scores.size());
  detail::check_temperature(temperature);
  std::vector<std::size_t> remaining(scores.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<double> logits;

  SampledAction out;
  out.action.indices.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    logits.clear();
    for (std::size_t i : remaining) logits.push_back(scores[i] / temperature);
    const double lse = log_sum_exp(logits);
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      cumulative += std::exp(logits[j] - lse);
      if (u < cumulative) {
        pick = j;
        break;
      }
    }
    out.log_prob += logits[pick] - lse;
    out.action.indices.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

inline double logprob_of(std::span<const double> scores, const TopKAction& action,
                         double temperature = 1.0) {
  detail::check_action(action, scores.size());
  detail::check_temperature(temperature);
  std::vector<bool> taken(scores.size(), false);
  std::vector<double> logits;
  double total = 0.0;
  for (std::size_t chosen : action.indices) {
    logits.clear();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!taken[i]) logits.push_back(scores[i] / temperature);
    }
    total += scores[chosen] / temperature - log_sum_exp(logits);
    taken[chosen] = true;
  }
  return total;
}

// d logprob_of / d scores. For step t with remaining set R_t and choice c_t
// the contribution is (1[j = c_t] - softmax_{R_t}(s)_j) / temperature.
inline DenseVector<double> logprob_gradient(std::span<const double> scores,
                                            const TopKAction& action,
                                            double temperature = 1.0) {
  detail::check_action(action, scores.size());
  detail::check_temperature(temperature);
  const std::size_t n = scores.size();
  DenseVector<double> grad(n);
  std::vector<bool> taken(n, false);
  std::vector<double> logits;
  for (std::size_t chosen : action.indices) {
    logits.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) logits.push_back(scores[i] / temperature);
    }
    const double lse = log_sum_exp(logits);
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) grad[i] -= std::exp(scores[i] / temperature - lse) / temperature;
    }
    grad[chosen] += 1.0 / temperature;
    taken[chosen] = true;
  }
  return grad;
}

// Descending by score, ties to the lower index.
inline TopKAction argmax_topk(std::span<const double> scores, std::size_t k) {
  detail::check_k(k, scores.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  order.resize(k);
  return TopKAction{std::move(order)};
}

// Entropy (nats) of the first-step categorical softmax(scores).
inline double entropy(std::span<const double> scores) {
  if (scores.empty()) return 0.0;
  const double lse = log_sum_exp(scores);
  double ent = 0.0;
  for (double s : scores) {
    const double logp = s - lse;
    const double p = std::exp(logp);
    if (p > 0.0) ent -= p * logp;
  }
  return ent;
}

}  // namespace sras

#endif  // SRAS_POLICY_HPP_
