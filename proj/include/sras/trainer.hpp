#ifndef SRAS_TRAINER_HPP_
#define SRAS_TRAINER_HPP_

// PPO training of the selector.
//
// Each QA pair is a one-step episode: the policy samples an ordered top-k
// action, the reward engine scores the selection, and the batch is reused for
// `ppo_inner_epochs` clipped-surrogate passes against the log-probabilities
// frozen at sampling time. There is no value network. The advantage is the
// reward minus an EMA baseline of past batch means, normalized over the batch
// (with one-step episodes generalized advantage estimation reduces to this,
// and the discount factor never enters).
//
// Stabilizers, each with an ablation switch:
//   supervised warmup (no_sw)   cross-entropy on gold labels before PPO
//   reward shaping (no_rs)      dense shaped reward vs exact-match indicator
//   curriculum (no_cl)          easiest 50% / 75% / 100% tiers by epoch third
//
// Randomness: every stochastic step draws from a stream derived from the
// master seed and its position (epoch, example slot), so runs are
// bit-reproducible and independent of the rollout worker count.

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sras/dataio.hpp"
#include "sras/errors.hpp"
#include "sras/numcore.hpp"
#include "sras/policy.hpp"
#include "sras/reward.hpp"
#include "sras/scorer.hpp"

namespace sras {

struct TrainConfig {
  std::size_t epochs = 25;
  std::size_t batch_size = 8;
  std::size_t k = 3;
  std::size_t n = 8;
  double lr = 1e-5;
  double gamma = 0.99;
  double clip_eps = 0.2;
  std::size_t warmup_epochs = 3;
  std::size_t ppo_inner_epochs = 4;
  double baseline_ema_decay = 0.9;
  double entropy_coef = 0.0;
  double temperature = 1.0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool no_sw = false;
  bool no_rs = false;
  bool no_cl = false;
  std::uint64_t seed = 42;
  std::size_t workers = 1;

  void validate() const {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ArgumentError("clip_eps must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must lie in (0, 1]");
    if (k > n) throw ArgumentError("k must be <= n");
    if (k == 0 || n == 0 || batch_size == 0 || ppo_inner_epochs == 0 || workers == 0) {
      throw ArgumentError("k, n, batch_size, ppo_inner_epochs and workers must be >= 1");
    }
    if (!(lr > 0.0)) throw ArgumentError("lr must be positive");
    if (!(baseline_ema_decay >= 0.0 && baseline_ema_decay <= 1.0)) {
      throw ArgumentError("baseline_ema_decay must lie in [0, 1]");
    }
  }

  AdamWHyper adamw() const { return {lr, beta1, beta2, adam_eps, weight_decay}; }
};

struct Transition {
  std::string example_id;
  std::vector<std::string> candidate_doc_ids;
  TopKAction action;
  double old_log_prob = 0.0;
  double raw_reward = 0.0;
  double advantage = 0.0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_reward = 0.0;
  double mean_loss = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<double> warmup_losses;  // one per warmup epoch
  std::vector<EpochStats> epochs;

  // CSV: epoch,mean_reward,mean_loss,clip_fraction,entropy,seconds
  std::string to_csv(bool include_timing = true) const {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,mean_reward,mean_loss,clip_fraction,entropy,seconds\n";
    for (const auto& e : epochs) {
      out << e.epoch << ',' << e.mean_reward << ',' << e.mean_loss << ',' << e.clip_fraction
          << ',' << e.entropy << ',' << (include_timing ? e.seconds : 0.0) << '\n';
    }
    return out.str();
  }
};

// Model inputs resolved once per run: embedding views and the gold position.
struct PreparedExample {
  const QAExample* example = nullptr;
  std::span<const float> query;
  std::vector<std::span<const float>> docs;
  std::size_t gold = 0;

  EmbeddingList<float> doc_list() const { return docs; }
};

inline std::vector<PreparedExample> prepare_examples(std::span<const QAExample> examples,
                                                     const EmbeddingStore& store) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    PreparedExample p;
    p.example = &ex;
    if (!store.contains(ex.id)) throw DataError("no query embedding for example '" + ex.id + "'");
    p.query = store.at(ex.id);
    for (const auto& id : ex.candidate_doc_ids) {
      if (!store.contains(id)) {
        throw DataError("example '" + ex.id + "': no embedding for document '" + id + "'");
      }
      p.docs.push_back(store.at(id));
    }
    p.gold = ex.gold_index();
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Building blocks

// loss = -min(r A, clip(r, 1-eps, 1+eps) A), r = exp(new - old).
inline double ppo_clip_loss(double old_log_prob, double new_log_prob, double advantage,
                            double eps) {
  const double ratio = std::exp(new_log_prob - old_log_prob);
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return -std::min(ratio * advantage, clipped * advantage);
}

struct ClipGradient {
  double d_new_log_prob = 0.0;
  bool clipped = false;  // the flat clipped branch is the active minimum
};

// d loss / d new_log_prob. Zero where the clipped term is strictly smaller.
inline ClipGradient ppo_clip_gradient(double old_log_prob, double new_log_prob,
                                      double advantage, double eps) {
  const double ratio = std::exp(new_log_prob - old_log_prob);
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  if (clipped * advantage < ratio * advantage) return {0.0, true};
  return {-advantage * ratio, false};
}

struct BaselineState {
  bool initialized = false;
  double value = 0.0;
};

// A_i = r_i - b, then batch-normalized; b tracks an EMA of batch means and is
// seeded with the first batch's mean.
inline std::vector<double> compute_advantage(std::span<const double> raw_rewards,
                                             BaselineState& baseline, double decay) {
  if (raw_rewards.empty()) throw ArgumentError("compute_advantage of empty batch");
  const double mean =
      std::accumulate(raw_rewards.begin(), raw_rewards.end(), 0.0) / raw_rewards.size();
  if (!baseline.initialized) {
    baseline.value = mean;
    baseline.initialized = true;
  }
  std::vector<double> centered;
  centered.reserve(raw_rewards.size());
  for (double r : raw_rewards) centered.push_back(r - baseline.value);
  baseline.value = decay * baseline.value + (1.0 - decay) * mean;
  return normalize_batch(centered);
}

// difficulty = 1 - cos(query, gold doc) unless the example carries one.
inline double example_difficulty(const QAExample& ex, const EmbeddingStore& store) {
  if (ex.difficulty) return *ex.difficulty;
  if (!store.contains(ex.id)) throw DataError("no query embedding for example '" + ex.id + "'");
  if (!store.contains(ex.gold_doc_id)) {
    throw DataError("no embedding for gold doc '" + ex.gold_doc_id + "' of '" + ex.id + "'");
  }
  return 1.0 - cosine(store.at(ex.id), store.at(ex.gold_doc_id));
}

inline double curriculum_fraction(std::size_t epoch, std::size_t total_epochs) {
  if (3 * epoch < total_epochs) return 0.5;
  if (3 * epoch < 2 * total_epochs) return 0.75;
  return 1.0;
}

// Indices into `difficulties` for 0-based `epoch`. Easiest-first tiers with
// ceiling rounding; ties are ordered by a seeded shuffle and every tier is
// shuffled before use. With no_cl the full set is shuffled.
inline std::vector<std::size_t> curriculum_order(std::span<const double> difficulties,
                                                 std::size_t epoch, std::size_t total_epochs,
                                                 bool no_cl, SeededRng& rng) {
  std::vector<std::size_t> order(difficulties.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  if (no_cl) return order;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return difficulties[a] < difficulties[b];
  });
  const double frac = curriculum_fraction(epoch, total_epochs);
  const auto take = static_cast<std::size_t>(std::ceil(frac * difficulties.size() - 1e-9));
  order.resize(std::min(take, order.size()));
  rng.shuffle(order.begin(), order.end());
  return order;
}

inline std::vector<std::size_t> curriculum_order(std::span<const QAExample> examples,
                                                 const EmbeddingStore& store, std::size_t epoch,
                                                 std::size_t total_epochs, bool no_cl,
                                                 SeededRng& rng) {
  std::vector<double> diff;
  diff.reserve(examples.size());
  for (const auto& ex : examples) diff.push_back(no_cl ? 0.0 : example_difficulty(ex, store));
  return curriculum_order(diff, epoch, total_epochs, no_cl, rng);
}

namespace detail {

inline void apply_gradients(SelectorParams& params, const ScoreGradients& grads,
                            AdamWState& opt) {
  adamw_step<float>(opt, {ParamBlock<float>{"W_q", params.W_q.data, grads.dW_q.data},
                          ParamBlock<float>{"W_d", params.W_d.data, grads.dW_d.data},
                          ParamBlock<float>{"w", params.w.data, grads.dw.data}});
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Cross-entropy of softmax(scores) against the gold index, averaged.
inline double mean_cross_entropy(const SelectorParams& params,
                                 std::span<const PreparedExample> data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : data) {
    const auto scores = score_candidates(params, ex.query, ex.doc_list());
    total += log_sum_exp(scores.span()) - scores[ex.gold];
  }
  return total / data.size();
}

// One supervised pass: loss_i = -log softmax(s)[gold], one AdamW step per
// batch. Returns the mean per-example loss, each measured before the update
// of its batch.
inline double warmup_epoch(SelectorParams& params, std::span<const PreparedExample> data,
                           const TrainConfig& config, AdamWState& opt, SeededRng& rng) {
  if (data.empty()) return 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());

  ScoreGradients grads(params.d, params.h);
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t stop = std::min(order.size(), start + config.batch_size);
    const double scale = 1.0 / static_cast<double>(stop - start);
    grads.zero();
    for (std::size_t b = start; b < stop; ++b) {
      const auto& ex = data[order[b]];
      const ScoreTrace tr = forward(params, ex.query, ex.doc_list());
      const double lse = log_sum_exp(tr.scores.span());
      const double loss = lse - tr.scores[ex.gold];
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite warmup loss on example '" + ex.example->id + "'");
      }
      total += loss;
      std::vector<double> upstream(tr.n);
      for (std::size_t i = 0; i < tr.n; ++i) upstream[i] = std::exp(tr.scores[i] - lse) * scale;
      upstream[ex.gold] -= scale;
      backward(params, tr, ex.query, ex.doc_list(), upstream, grads);
    }
    detail::apply_gradients(params, grads, opt);
  }
  return total / data.size();
}

// Samples one action for a prepared example and records its log-probability.
inline Transition collect_rollout(const SelectorParams& params, const PreparedExample& ex,
                                  const RewardEngine& engine, const TrainConfig& config,
                                  SeededRng& rng, double* entropy_out = nullptr) {
  const auto scores = score_candidates(params, ex.query, ex.doc_list());
  const auto sampled = sample_topk(scores.span(), config.k, rng, config.temperature);
  std::vector<std::string> selected;
  for (std::size_t i : sampled.action.indices) selected.push_back(ex.example->candidate_doc_ids[i]);
  const SelectionOutcome outcome = engine.assess(*ex.example, selected);
  Transition t;
  t.example_id = ex.example->id;
  t.candidate_doc_ids = ex.example->candidate_doc_ids;
  t.action = sampled.action;
  t.old_log_prob = sampled.log_prob;
  t.raw_reward = config.no_rs ? outcome.sparse : outcome.shaped;
  if (entropy_out) *entropy_out = entropy(scores.span());
  return t;
}

struct TrainResult {
  SelectorParams params;
  TrainLog log;
};

// Called after every PPO epoch (1-based) with the current parameters.
using EpochCallback = std::function<void(std::size_t epoch, const SelectorParams&)>;

inline TrainResult train(SelectorParams params, std::span<const QAExample> examples,
                         const EmbeddingStore& store, const RewardEngine& engine,
                         const TrainConfig& config, const EpochCallback& on_epoch = {}) {
  config.validate();
  const auto data = prepare_examples(examples, store);
  for (const auto& ex : data) {
    if (ex.docs.size() != config.n) {
      throw DataError("example '" + ex.example->id + "' has " + std::to_string(ex.docs.size()) +
                      " candidates, config n=" + std::to_string(config.n));
    }
  }
  const SeededRng master(config.seed);
  TrainResult result{std::move(params), {}};
  SelectorParams& p = result.params;

  if (!config.no_sw) {
    AdamWState warm_opt(config.adamw());
    for (std::size_t e = 0; e < config.warmup_epochs; ++e) {
      SeededRng rng = master.derive({1, e});
      result.log.warmup_losses.push_back(warmup_epoch(p, data, config, warm_opt, rng));
    }
  }

  std::vector<double> difficulties;
  if (!config.no_cl) {
    for (const auto& ex : examples) difficulties.push_back(example_difficulty(ex, store));
  } else {
    difficulties.assign(examples.size(), 0.0);
  }

  AdamWState opt(config.adamw());
  BaselineState baseline;
  ScoreGradients grads(p.d, p.h);

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const auto started = std::chrono::steady_clock::now();
    SeededRng order_rng = master.derive({2, e});
    const auto order = curriculum_order(difficulties, e, config.epochs, config.no_cl, order_rng);

    double reward_sum = 0.0, loss_sum = 0.0, entropy_sum = 0.0;
    std::size_t rollouts = 0, loss_terms = 0, clipped_terms = 0;

    for (std::size_t start = 0, batch = 0; start < order.size();
         start += config.batch_size, ++batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::size_t size = stop - start;

      std::vector<Transition> batch_t(size);
      std::vector<double> batch_entropy(size);
      detail::parallel_for(size, config.workers, [&](std::size_t i) {
        SeededRng rng = master.derive({3, e, start + i});
        batch_t[i] = collect_rollout(p, data[order[start + i]], engine, config, rng,
                                     &batch_entropy[i]);
      });

      std::vector<double> rewards;
      for (const auto& t : batch_t) {
        if (!std::isfinite(t.raw_reward)) {
          throw TrainingError("non-finite reward for '" + t.example_id + "' in epoch " +
                              std::to_string(e + 1));
        }
        rewards.push_back(t.raw_reward);
        reward_sum += t.raw_reward;
      }
      for (double h : batch_entropy) entropy_sum += h;
      rollouts += size;
      const auto adv = compute_advantage(rewards, baseline, config.baseline_ema_decay);
      for (std::size_t i = 0; i < size; ++i) batch_t[i].advantage = adv[i];

      const double scale = 1.0 / static_cast<double>(size);
      for (std::size_t pass = 0; pass < config.ppo_inner_epochs; ++pass) {
        grads.zero();
        double batch_loss = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
          const auto& ex = data[order[start + i]];
          const auto& t = batch_t[i];
          const ScoreTrace tr = forward(p, ex.query, ex.doc_list());
          const double new_lp = logprob_of(tr.scores.span(), t.action, config.temperature);
          double loss = ppo_clip_loss(t.old_log_prob, new_lp, t.advantage, config.clip_eps);
          const ClipGradient cg =
              ppo_clip_gradient(t.old_log_prob, new_lp, t.advantage, config.clip_eps);
          clipped_terms += cg.clipped ? 1 : 0;

          std::vector<double> upstream(tr.n, 0.0);
          if (cg.d_new_log_prob != 0.0) {
            const auto dlp = logprob_gradient(tr.scores.span(), t.action, config.temperature);
            for (std::size_t j = 0; j < tr.n; ++j) upstream[j] = cg.d_new_log_prob * dlp[j];
          }
          if (config.entropy_coef != 0.0) {
            // d(-c H)/ds_j = c p_j (log p_j + H)
            const double h = entropy(tr.scores.span());
            loss -= config.entropy_coef * h;
            const double lse = log_sum_exp(tr.scores.span());
            for (std::size_t j = 0; j < tr.n; ++j) {
              const double logp = tr.scores[j] - lse;
              upstream[j] += config.entropy_coef * std::exp(logp) * (logp + h);
            }
          }
          if (!std::isfinite(loss)) {
            throw TrainingError("non-finite loss in epoch " + std::to_string(e + 1) + ", batch " +
                                std::to_string(batch + 1) + " (example '" + t.example_id + "')");
          }
          batch_loss += loss;
          for (double& u : upstream) u *= scale;
          backward(p, tr, ex.query, ex.doc_list(), upstream, grads);
        }
        loss_sum += batch_loss;
        loss_terms += size;
        try {
          detail::apply_gradients(p, grads, opt);
        } catch (const TrainingError& err) {
          throw TrainingError(std::string(err.what()) + " (epoch " + std::to_string(e + 1) +
                              ", batch " + std::to_string(batch + 1) + ")");
        }
      }
    }

    EpochStats stats;
    stats.epoch = e + 1;
    if (rollouts > 0) {
      stats.mean_reward = reward_sum / rollouts;
      stats.entropy = entropy_sum / rollouts;
    }
    if (loss_terms > 0) {
      stats.mean_loss = loss_sum / loss_terms;
      stats.clip_fraction = static_cast<double>(clipped_terms) / loss_terms;
    }
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.epochs.push_back(stats);
    if (on_epoch) on_epoch(e + 1, p);
  }
  return result;
}

// Supervised baseline: warmup epochs only, no PPO.
inline TrainResult train_supervised(SelectorParams params, std::span<const QAExample> examples,
                                    const EmbeddingStore& store, const TrainConfig& config) {
  config.validate();
  const auto data = prepare_examples(examples, store);
  const SeededRng master(config.seed);
  AdamWState opt(config.adamw());
  TrainResult result{std::move(params), {}};
  for (std::size_t e = 0; e < config.warmup_epochs; ++e) {
    SeededRng rng = master.derive({1, e});
    result.log.warmup_losses.push_back(warmup_epoch(result.params, data, config, opt, rng));
  }
  return result;
}

}  // namespace sras

#endif  // SRAS_TRAINER_HPP_
