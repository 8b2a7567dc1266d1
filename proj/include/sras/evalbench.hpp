#ifndef SRAS_EVALBENCH_HPP_
#define SRAS_EVALBENCH_HPP_

// Baseline selectors, batch evaluation reports, latency/size benchmarks and
// the ablation harness.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sras/dataio.hpp"
#include "sras/errors.hpp"
#include "sras/numcore.hpp"
#include "sras/policy.hpp"
#include "sras/reward.hpp"
#include "sras/scorer.hpp"
#include "sras/trainer.hpp"

namespace sras {

// Top-k by cosine to the query, descending, ties to the lower index. A zero
// vector has cosine 0 with everything.
inline TopKAction cosine_topk(std::span<const float> query, EmbeddingList<float> candidates,
                              std::size_t k) {
  std::vector<double> sims;
  sims.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.size() != query.size()) {
      throw ShapeError("candidate dim " + std::to_string(c.size()) + " != query dim " +
                       std::to_string(query.size()));
    }
    sims.push_back(cosine(query, c));
  }
  return argmax_topk(sims, k);
}

// Uniform ordered k-subset of [0, n) without replacement.
inline TopKAction random_topk(std::size_t n, std::size_t k, SeededRng& rng) {
  if (k > n) throw ArgumentError("k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return TopKAction{std::move(idx)};
}

class Selector {
 public:
  virtual ~Selector() = default;
  virtual std::string name() const = 0;
  // `slot` identifies the example within the evaluation so stochastic
  // selectors stay reproducible.
  virtual TopKAction select(std::span<const float> query, EmbeddingList<float> docs,
                            std::size_t k, std::size_t slot) const = 0;
  virtual std::size_t model_size_bytes() const { return 0; }
};

class LearnedSelector final : public Selector {
 public:
  LearnedSelector(SelectorParams params, std::string name)
      : params_(std::move(params)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  TopKAction select(std::span<const float> query, EmbeddingList<float> docs, std::size_t k,
                    std::size_t) const override {
    return argmax_topk(score_candidates(params_, query, docs).span(), k);
  }
  std::size_t model_size_bytes() const override { return model_file_size(params_.d, params_.h); }
  const SelectorParams& params() const noexcept { return params_; }

 private:
  SelectorParams params_;
  std::string name_;
};

class CosineSelector final : public Selector {
 public:
  std::string name() const override { return "cosine"; }
  TopKAction select(std::span<const float> query, EmbeddingList<float> docs, std::size_t k,
                    std::size_t) const override {
    return cosine_topk(query, docs, k);
  }
};

class RandomSelector final : public Selector {
 public:
  explicit RandomSelector(std::uint64_t seed) : master_(seed) {}
  std::string name() const override { return "random"; }
  TopKAction select(std::span<const float>, EmbeddingList<float> docs, std::size_t k,
                    std::size_t slot) const override {
    SeededRng rng = master_.derive({4, slot});
    return random_topk(docs.size(), k, rng);
  }

 private:
  SeededRng master_;
};

// ---------------------------------------------------------------------------

struct EvalRecord {
  std::string id;
  std::vector<std::string> selected;
  double relaxed_f1 = 0.0;
  double semantic = 0.0;
  bool gold_hit = false;
};

struct LatencyStats {
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  std::size_t iterations = 0;
};

struct EvalReport {
  std::string selector;
  std::size_t k = 0;
  std::vector<EvalRecord> records;
  double mean_relaxed_f1 = 0.0;
  double mean_semantic = 0.0;
  double gold_recall = 0.0;
  LatencyStats latency;
  std::size_t model_size_bytes = 0;

  void recompute_aggregates() {
    if (records.empty()) return;
    double f1 = 0.0, sem = 0.0, hits = 0.0;
    for (const auto& r : records) {
      f1 += r.relaxed_f1;
      sem += r.semantic;
      hits += r.gold_hit ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(records.size());
    mean_relaxed_f1 = f1 / n;
    mean_semantic = sem / n;
    gold_recall = hits / n;
  }

  // Schema:
  // { selector, k, num_examples,
  //   aggregates: { mean_relaxed_f1, mean_semantic, gold_recall,
  //                 model_size_bytes, latency_us: {mean, p50, p95, iterations} },
  //   examples: [ { id, selected: [..], relaxed_f1, semantic, gold_hit } ] }
  nlohmann::json to_json(bool include_timing = true) const {
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& r : records) {
      ex.push_back({{"id", r.id},
                    {"selected", r.selected},
                    {"relaxed_f1", r.relaxed_f1},
                    {"semantic", r.semantic},
                    {"gold_hit", r.gold_hit}});
    }
    nlohmann::json agg = {{"mean_relaxed_f1", mean_relaxed_f1},
                          {"mean_semantic", mean_semantic},
                          {"gold_recall", gold_recall},
                          {"model_size_bytes", model_size_bytes}};
    if (include_timing) {
      agg["latency_us"] = {{"mean", latency.mean_us},
                           {"p50", latency.p50_us},
                           {"p95", latency.p95_us},
                           {"iterations", latency.iterations}};
    }
    return {{"selector", selector},
            {"k", k},
            {"num_examples", records.size()},
            {"aggregates", agg},
            {"examples", ex}};
  }

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "id,selected,relaxed_f1,semantic,gold_hit\n";
    for (const auto& r : records) {
      out << r.id << ',';
      for (std::size_t i = 0; i < r.selected.size(); ++i) out << (i ? ";" : "") << r.selected[i];
      out << ',' << r.relaxed_f1 << ',' << r.semantic << ',' << (r.gold_hit ? 1 : 0) << '\n';
    }
    return out.str();
  }
};

inline std::string format_report_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %12s %12s %12s\n", "selector",
                "relaxed_f1", "semantic", "recall@k", "latency_us", "p95_us", "size_mb");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-12s %10.4f %10.4f %10.4f %12.2f %12.2f %12.4f\n",
                  r.selector.c_str(), r.mean_relaxed_f1, r.mean_semantic, r.gold_recall,
                  r.latency.mean_us, r.latency.p95_us, r.model_size_bytes / 1.0e6);
    out << line;
  }
  return out.str();
}

struct LatencyOptions {
  std::size_t warmup = 100;
  std::size_t iterations = 1000;
};

inline LatencyStats summarize_latency(std::vector<double> samples_us) {
  LatencyStats s;
  if (samples_us.empty()) return s;
  s.iterations = samples_us.size();
  s.mean_us = std::accumulate(samples_us.begin(), samples_us.end(), 0.0) / samples_us.size();
  std::sort(samples_us.begin(), samples_us.end());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * samples_us.size()));
    return samples_us[std::clamp<std::size_t>(idx, 1, samples_us.size()) - 1];
  };
  s.p50_us = rank(0.50);
  s.p95_us = rank(0.95);
  return s;
}

// Times selection for one query end to end: embedding lookup by id, scoring
// and top-k. Single-threaded; cycles through the examples.
inline LatencyStats measure_selection_latency(const Selector& selector,
                                              std::span<const QAExample> examples,
                                              const EmbeddingStore& store, std::size_t k,
                                              const LatencyOptions& opts = {}) {
  if (examples.empty()) throw DataError("latency benchmark needs at least one example");
  std::vector<std::span<const float>> docs;
  std::size_t sink = 0;
  auto once = [&](std::size_t i) {
    const auto& ex = examples[i % examples.size()];
    const auto query = store.at(ex.id);
    docs.clear();
    for (const auto& id : ex.candidate_doc_ids) docs.push_back(store.at(id));
    const TopKAction a = selector.select(query, docs, k, i % examples.size());
    sink += a.indices.empty() ? 0 : a.indices.front();
  };
  for (std::size_t i = 0; i < opts.warmup; ++i) once(i);
  std::vector<double> samples;
  samples.reserve(opts.iterations);
  for (std::size_t i = 0; i < opts.iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    once(i);
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  volatile std::size_t keep = sink;
  (void)keep;
  return summarize_latency(std::move(samples));
}

inline EvalReport evaluate(const Selector& selector, std::span<const QAExample> examples,
                           const EmbeddingStore& store, const RewardEngine& engine, std::size_t k,
                           const LatencyOptions& latency = {}) {
  if (examples.empty()) throw DataError("cannot evaluate on an empty dataset");
  const auto data = prepare_examples(examples, store);
  EvalReport report;
  report.selector = selector.name();
  report.k = k;
  report.model_size_bytes = selector.model_size_bytes();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    const TopKAction action = selector.select(ex.query, ex.doc_list(), k, i);
    EvalRecord rec;
    rec.id = ex.example->id;
    for (std::size_t j : action.indices) rec.selected.push_back(ex.example->candidate_doc_ids[j]);
    const SelectionOutcome outcome = engine.assess(*ex.example, rec.selected);
    rec.relaxed_f1 = outcome.relaxed_f1;
    rec.semantic = outcome.semantic;
    rec.gold_hit = action.contains(ex.gold);
    report.records.push_back(std::move(rec));
  }
  report.recompute_aggregates();
  if (latency.iterations > 0) {
    report.latency = measure_selection_latency(selector, examples, store, k, latency);
  }
  return report;
}

inline std::size_t bench_model_size(const SelectorParams& params) {
  return encode_params(params).size();
}

// Selector-only latency on random unit inputs of the model's dimension.
inline LatencyStats bench_scoring_latency(const SelectorParams& params, std::size_t n,
                                          std::size_t k, std::uint64_t seed,
                                          const LatencyOptions& opts = {}) {
  SeededRng rng(seed);
  EmbeddingStore store(params.d);
  auto unit = [&] {
    std::vector<float> v(params.d);
    double norm = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(rng.normal());
      norm += double(x) * x;
    }
    for (auto& x : v) x = static_cast<float>(x / std::sqrt(norm));
    return v;
  };
  std::vector<QAExample> examples;
  for (std::size_t i = 0; i < 16; ++i) {
    QAExample ex;
    ex.id = "bq" + std::to_string(i);
    store.add(ex.id, unit());
    for (std::size_t j = 0; j < n; ++j) {
      ex.candidate_doc_ids.push_back("bd" + std::to_string(i) + "_" + std::to_string(j));
      store.add(ex.candidate_doc_ids.back(), unit());
    }
    ex.gold_doc_id = ex.candidate_doc_ids.front();
    examples.push_back(std::move(ex));
  }
  LearnedSelector selector(params, "sras");
  return measure_selection_latency(selector, examples, store, k, opts);
}

// ---------------------------------------------------------------------------
// Ablation harness: full, no_sw, no_rs, no_cl at a shared seed and shared
// initial parameters.

struct AblationRow {
  std::string variant;
  TrainLog log;
  EvalReport report;

  double final_reward() const { return log.epochs.empty() ? 0.0 : log.epochs.back().mean_reward; }

  // Mean reward over epochs (area under the reward curve per epoch).
  double reward_auc() const {
    if (log.epochs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : log.epochs) s += e.mean_reward;
    return s / log.epochs.size();
  }

  // Population std of epoch mean reward over the first `count` epochs.
  double early_reward_std(std::size_t count = 5) const {
    const std::size_t m = std::min(count, log.epochs.size());
    if (m == 0) return 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += log.epochs[i].mean_reward;
    mean /= m;
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dlt = log.epochs[i].mean_reward - mean;
      var += dlt * dlt;
    }
    return std::sqrt(var / m);
  }
};

inline const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> v = {"full", "no_sw", "no_rs", "no_cl"};
  return v;
}

inline TrainConfig ablation_config(TrainConfig base, const std::string& variant) {
  base.no_sw = variant == "no_sw";
  base.no_rs = variant == "no_rs";
  base.no_cl = variant == "no_cl";
  return base;
}

inline std::vector<AblationRow> run_ablation(const SelectorParams& init,
                                             std::span<const QAExample> train_set,
                                             std::span<const QAExample> test_set,
                                             const EmbeddingStore& store,
                                             const RewardEngine& engine, const TrainConfig& base,
                                             const LatencyOptions& latency = {}) {
  std::vector<AblationRow> rows;
  for (const auto& variant : ablation_variants()) {
    const TrainConfig cfg = ablation_config(base, variant);
    TrainResult trained = train(init, train_set, store, engine, cfg);
    LearnedSelector selector(trained.params, variant);
    rows.push_back({variant, std::move(trained.log),
                    evaluate(selector, test_set, store, engine, base.k, latency)});
  }
  return rows;
}

inline std::string format_ablation_table(std::span<const AblationRow> rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %12s %10s %12s %10s %10s %10s %12s\n", "variant",
                "final_reward", "reward_auc", "early_std", "relaxed_f1", "semantic", "recall@k",
                "latency_us");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-8s %12.4f %10.4f %12.4f %10.4f %10.4f %10.4f %12.2f\n",
                  r.variant.c_str(), r.final_reward(), r.reward_auc(), r.early_reward_std(),
                  r.report.mean_relaxed_f1, r.report.mean_semantic, r.report.gold_recall,
                  r.report.latency.mean_us);
    out << line;
  }
  return out.str();
}

}  // namespace sras

#endif  // SRAS_EVALBENCH_HPP_
