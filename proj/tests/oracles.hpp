#ifndef SRAS_TESTS_ORACLES_HPP_
#define SRAS_TESTS_ORACLES_HPP_

// Reference computations shared by the unit tests and the acceptance binary.
// These are written directly from the formulas and avoid the library's own
// kernels so they can catch mistakes in them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sras/sras.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // rows

// s_i = sum_j w_j tanh(sum_c Wq[j][c] q[c] + sum_c Wd[j][c] d_i[c])
inline Vec straight_line_scores(const Mat& Wq, const Mat& Wd, const Vec& w, const Vec& q,
                                const Mat& docs) {
  Vec out;
  for (const auto& doc : docs) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      double z = 0.0;
      for (std::size_t c = 0; c < q.size(); ++c) z += Wq[j][c] * q[c];
      for (std::size_t c = 0; c < q.size(); ++c) z += Wd[j][c] * doc[c];
      s += w[j] * std::tanh(z);
    }
    out.push_back(s);
  }
  return out;
}

inline Mat to_rows(const sras::DenseMatrix<double>& m) {
  Mat out(m.rows, Vec(m.cols));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
  }
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor) over every parameter of one
// random instance, against central differences of L = sum_i u_i s_i.
inline GradCheck gradient_check(std::size_t d, std::size_t h, std::size_t n,
                                sras::SeededRng& rng, double step = 1e-5,
                                double floor = 1e-6) {
  auto p = sras::init_params<double>(d, h, rng);
  // Widen the weights so tanh leaves its linear region.
  for (auto* v : {&p.W_q.data, &p.W_d.data, &p.w.data}) {
    for (double& x : *v) x *= 3.0;
  }
  Vec q(d);
  for (double& x : q) x = rng.normal();
  Mat docs(n, Vec(d));
  for (auto& doc : docs) {
    for (double& x : doc) x = rng.normal();
  }
  Vec u(n);
  for (double& x : u) x = rng.normal();

  std::vector<std::span<const double>> views(docs.begin(), docs.end());
  const auto grads = sras::score_gradients(p, std::span<const double>(q),
                                           sras::EmbeddingList<double>(views), u);

  auto loss = [&] {
    const Vec s = straight_line_scores(to_rows(p.W_q), to_rows(p.W_d), p.w.data, q, docs);
    double l = 0.0;
    for (std::size_t i = 0; i < n; ++i) l += u[i] * s[i];
    return l;
  };

  GradCheck out;
  auto check = [&](std::vector<double>& values, const std::vector<double>& analytic) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = loss();
      values[i] = saved - step;
      const double down = loss();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - analytic[i]) / denom);
      ++out.checked;
    }
  };
  check(p.W_q.data, grads.dW_q.data);
  check(p.W_d.data, grads.dW_d.data);
  check(p.w.data, grads.dw.data);
  return out;
}

// Plackett-Luce probability of an ordered selection, by direct products.
inline double plackett_luce_prob(const Vec& scores, const std::vector<std::size_t>& order) {
  std::vector<bool> used(scores.size(), false);
  double prob = 1.0;
  for (std::size_t c : order) {
    double denom = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!used[i]) denom += std::exp(scores[i]);
    }
    prob *= std::exp(scores[c]) / denom;
    used[c] = true;
  }
  return prob;
}

// Calls fn for every ordered k-subset of [0, n).
inline void for_each_ordered_subset(std::size_t n, std::size_t k,
                                    const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> cur;
  std::vector<bool> used(n, false);
  std::function<void()> rec = [&] {
    if (cur.size() == k) {
      fn(cur);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = true;
      cur.push_back(i);
      rec();
      cur.pop_back();
      used[i] = false;
    }
  };
  rec();
}

// Greedy-matching F1 over all token pairs, cosines rescaled to [0, 1].
inline double greedy_match_f1(const Mat& pred, const Mat& ref) {
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;
  auto cos01 = [](const Vec& a, const Vec& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    const double c = (aa == 0 || bb == 0) ? 0.0 : ab / std::sqrt(aa * bb);
    return (c + 1.0) / 2.0;
  };
  double precision = 0.0, recall = 0.0;
  for (const auto& p : pred) {
    double best = -1.0;
    for (const auto& r : ref) best = std::max(best, cos01(p, r));
    precision += best;
  }
  for (const auto& r : ref) {
    double best = -1.0;
    for (const auto& p : pred) best = std::max(best, cos01(p, r));
    recall += best;
  }
  precision /= pred.size();
  recall /= ref.size();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace oracle

#endif  // SRAS_TESTS_ORACLES_HPP_
