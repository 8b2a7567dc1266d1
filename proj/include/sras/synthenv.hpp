#ifndef SRAS_SYNTHENV_HPP_
#define SRAS_SYNTHENV_HPP_

// Planted-gold synthetic task. Each query is a uniform random unit vector;
// its gold document is normalize(q + sigma * g / sqrt(d)) with g standard
// normal, so sigma is the expected norm of the perturbation (sigma = 0.3 at
// d = 384 gives cos(q, gold) ~ 0.96). The corpus holds every gold document
// plus extra uniform random unit vectors up to `corpus_size`; distractors for
// an example are drawn from the whole corpus, so other examples' gold
// documents show up as distractors too.
//
// Ids: queries "q<i>", documents "d<j>". The answer text of example i is its
// gold id, so exact match is well defined.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sras/dataio.hpp"
#include "sras/errors.hpp"
#include "sras/numcore.hpp"
#include "sras/policy.hpp"
#include "sras/reward.hpp"

namespace sras {

struct SynthConfig {
  std::size_t num_examples = 700;
  std::size_t n = 8;
  std::size_t d = 384;
  double sigma = 0.3;
  std::size_t corpus_size = 1000;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be >= 0");
    if (d < 2) throw ArgumentError("synthetic dim must be >= 2");
    if (n < 1) throw ArgumentError("n must be >= 1");
    if (corpus_size < num_examples) {
      throw ArgumentError("corpus_size (" + std::to_string(corpus_size) +
                          ") must be >= num_examples (" + std::to_string(num_examples) + ")");
    }
    if (corpus_size < n) throw ArgumentError("corpus_size must be >= n");
  }
};

struct SynthTask {
  EmbeddingStore store;
  std::vector<QAExample> examples;
};

namespace detail {

inline std::vector<double> random_unit(std::size_t d, SeededRng& rng) {
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    norm = l2_norm(std::span<const double>(v));
  } while (norm == 0.0);
  for (double& x : v) x /= norm;
  return v;
}

inline std::vector<float> to_float(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

}  // namespace detail

inline std::string synth_query_id(std::size_t i) { return "q" + std::to_string(i); }
inline std::string synth_doc_id(std::size_t i) { return "d" + std::to_string(i); }

inline SynthTask generate_task(const SynthConfig& config) {
  config.validate();
  SeededRng rng(config.seed);
  SynthTask task{EmbeddingStore(config.d), {}};
  const double scale = config.sigma / std::sqrt(static_cast<double>(config.d));

  std::vector<std::vector<double>> queries, golds;
  for (std::size_t i = 0; i < config.num_examples; ++i) {
    auto q = detail::random_unit(config.d, rng);
    auto gold = q;
    if (config.sigma > 0.0) {
      for (double& x : gold) x += scale * rng.normal();
      const double norm = l2_norm(std::span<const double>(gold));
      for (double& x : gold) x /= norm;
    }
    queries.push_back(std::move(q));
    golds.push_back(std::move(gold));
  }
  for (std::size_t i = 0; i < config.num_examples; ++i) {
    task.store.add(synth_query_id(i), detail::to_float(queries[i]));
  }
  std::vector<std::string> corpus_ids;
  for (std::size_t j = 0; j < config.corpus_size; ++j) {
    corpus_ids.push_back(synth_doc_id(j));
    if (j < config.num_examples) {
      task.store.add(corpus_ids.back(), detail::to_float(golds[j]));
    } else {
      task.store.add(corpus_ids.back(), detail::to_float(detail::random_unit(config.d, rng)));
    }
  }
  for (std::size_t i = 0; i < config.num_examples; ++i) {
    QAExample ex;
    ex.id = synth_query_id(i);
    ex.question = "synthetic query " + std::to_string(i);
    ex.gold_doc_id = synth_doc_id(i);
    ex.answer = ex.gold_doc_id;
    ex.candidate_doc_ids = build_candidate_pool(ex.gold_doc_id, corpus_ids, config.n, rng);
    task.examples.push_back(std::move(ex));
  }
  return task;
}

enum class OracleMode { kDense, kSparse };

// dense: max over selected docs of (1 + cos(doc, gold)) / 2, which is 1 when
// the gold doc is selected; sparse: 1 iff the gold doc is selected.
inline double oracle_reward(std::span<const std::string> selected_doc_ids, const QAExample& example,
                            const EmbeddingStore& store, OracleMode mode) {
  const auto gold = store.at(example.gold_doc_id);
  bool hit = false;
  double best = 0.0;
  for (const auto& id : selected_doc_ids) {
    const auto doc = store.at(id);
    if (id == example.gold_doc_id) hit = true;
    best = std::max(best, (1.0 + cosine(doc, gold)) / 2.0);
  }
  if (mode == OracleMode::kSparse) return hit ? 1.0 : 0.0;
  return hit ? 1.0 : std::clamp(best, 0.0, 1.0);
}

inline double oracle_reward(const TopKAction& action, const QAExample& example,
                            const EmbeddingStore& store, OracleMode mode) {
  std::vector<std::string> ids;
  for (std::size_t i : action.indices) {
    if (i >= example.candidate_doc_ids.size()) {
      throw DataError("action index out of range for example '" + example.id + "'");
    }
    ids.push_back(example.candidate_doc_ids[i]);
  }
  return oracle_reward(ids, example, store, mode);
}

// Reward engine for the synthetic task. The simulated reader answers with
// the gold id when the gold doc was selected, otherwise with the id of the
// first selected doc.
class SyntheticRewardEngine final : public RewardEngine {
 public:
  SyntheticRewardEngine(const EmbeddingStore& store, RewardConfig config = {})
      : store_(&store), config_(std::move(config)) {}

  SelectionOutcome assess(const QAExample& example,
                          std::span<const std::string> selected) const override {
    SelectionOutcome out;
    const bool hit =
        std::find(selected.begin(), selected.end(), example.gold_doc_id) != selected.end();
    out.prediction = hit ? example.answer : (selected.empty() ? "" : selected.front());
    out.relaxed_f1 = relaxed_f1(out.prediction, example.answer, config_);
    out.semantic = oracle_reward(selected, example, *store_, OracleMode::kDense);
    out.shaped = out.semantic;
    out.sparse = hit ? 1.0 : 0.0;
    return out;
  }

 private:
  const EmbeddingStore* store_;
  RewardConfig config_;
};

}  // namespace sras

#endif  // SRAS_SYNTHENV_HPP_
