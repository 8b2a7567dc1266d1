#ifndef SRAS_REWARD_HPP_
#define SRAS_REWARD_HPP_

// Answer-quality rewards: Relaxed F1 over normalized tokens, a pluggable
// semantic score, their alpha-weighted mix, and batch normalization.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sras/dataio.hpp"
#include "sras/errors.hpp"
#include "sras/numcore.hpp"

namespace sras {

// Default stopword list, 35 common English function words.
inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",    "an",   "the",  "and",   "or",   "but",  "if",   "of",   "at",
      "by",   "for",  "with", "about", "to",   "from", "in",   "on",   "is",
      "are",  "was",  "were", "be",    "been", "being", "it",  "its",  "this",
      "that", "these", "those", "as",  "into", "than", "then", "so"};
  return words;
}

enum class SemanticSource { kPrecomputedCache, kEmbeddingCosine, kSyntheticOracle, kConstantZero };

inline std::string to_string(SemanticSource s) {
  switch (s) {
    case SemanticSource::kPrecomputedCache: return "precomputed-cache";
    case SemanticSource::kEmbeddingCosine: return "embedding-cosine";
    case SemanticSource::kSyntheticOracle: return "synthetic-oracle";
    case SemanticSource::kConstantZero: return "constant-zero";
  }
  return "unknown";
}

inline SemanticSource parse_semantic_source(std::string_view name) {
  for (auto s : {SemanticSource::kPrecomputedCache, SemanticSource::kEmbeddingCosine,
                 SemanticSource::kSyntheticOracle, SemanticSource::kConstantZero}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown semantic source '" + std::string(name) + "'");
}

struct RewardConfig {
  double alpha = 0.6;
  std::unordered_set<std::string> stopwords{default_stopwords().begin(),
                                            default_stopwords().end()};
  SemanticSource semantic_source = SemanticSource::kSyntheticOracle;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw ArgumentError("alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
  }
};

// Lowercase (ASCII), replace every non-alphanumeric character with a space,
// split on whitespace, drop stopwords. Bytes >= 0x80 are kept as token
// characters so UTF-8 words are not split apart.
inline std::vector<std::string> normalize_answer(
    std::string_view text, const std::unordered_set<std::string>& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

inline double token_f1(const std::vector<std::string>& pred,
                       const std::vector<std::string>& ref) {
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : ref) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / pred.size();
  const double recall = static_cast<double>(overlap) / ref.size();
  return 2.0 * precision * recall / (precision + recall);
}

inline double relaxed_f1(std::string_view prediction, std::string_view reference,
                         const RewardConfig& config) {
  return token_f1(normalize_answer(prediction, config.stopwords),
                  normalize_answer(reference, config.stopwords));
}

// Sparse reward: 1 iff the normalized token sequences are equal.
inline double exact_match(std::string_view prediction, std::string_view reference,
                          const RewardConfig& config) {
  return normalize_answer(prediction, config.stopwords) ==
                 normalize_answer(reference, config.stopwords)
             ? 1.0
             : 0.0;
}

// Implementations must return a finite value in [0, 1] and be safe to call
// concurrently (or serialize internally).
class SemanticScorer {
 public:
  virtual ~SemanticScorer() = default;
  virtual double score(std::string_view prediction, std::string_view reference) const = 0;
};

class ConstantScorer final : public SemanticScorer {
 public:
  explicit ConstantScorer(double value) : value_(value) {}
  double score(std::string_view, std::string_view) const override { return value_; }

 private:
  double value_;
};

inline double hybrid_reward(std::string_view prediction, std::string_view reference,
                            const SemanticScorer& semantic, const RewardConfig& config,
                            const std::string& example_id = "") {
  config.validate();
  double sem = 0.0;
  try {
    sem = semantic.score(prediction, reference);
  } catch (const std::exception& e) {
    throw RewardError(example_id, std::string("semantic scorer failed: ") + e.what());
  }
  if (!std::isfinite(sem) || sem < 0.0 || sem > 1.0) {
    throw RewardError(example_id, "semantic score out of [0,1]: " + std::to_string(sem));
  }
  return config.alpha * relaxed_f1(prediction, reference, config) + (1.0 - config.alpha) * sem;
}

// (r - mean) / (population std + 1e-8).
inline std::vector<double> normalize_batch(std::span<const double> rewards) {
  if (rewards.empty()) throw ArgumentError("normalize_batch of empty batch");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double stddev = std::sqrt(var / n);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / (stddev + 1e-8));
  return out;
}

// ---------------------------------------------------------------------------
// Static-embedding stand-in for BERTScore.

class TokenEmbeddingTable {
 public:
  explicit TokenEmbeddingTable(EmbeddingStore store) : store_(std::move(store)) {
    if (store_.dim() == 0) throw ArgumentError("token table needs dim >= 1");
  }

  std::size_t dim() const noexcept { return store_.dim(); }

  // Unseen tokens get a unit vector drawn from a SeededRng keyed by the
  // 64-bit FNV-1a hash of the token bytes.
  std::vector<double> vector_for(const std::string& token) const {
    std::vector<double> v(dim());
    if (auto row = store_.find(token)) {
      auto src = store_.row(*row);
      std::copy(src.begin(), src.end(), v.begin());
    } else {
      std::uint64_t hash = 0xcbf29ce484222325ULL;
      for (unsigned char c : token) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
      }
      SeededRng rng(hash);
      for (double& x : v) x = rng.normal();
    }
    const double norm = l2_norm(std::span<const double>(v));
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
    return v;
  }

 private:
  EmbeddingStore store_;
};

// Greedy max-cosine matching F1 with cosines rescaled from [-1,1] to [0,1]
// before precision/recall are averaged.
inline double embedding_cosine_semantic(std::string_view prediction, std::string_view reference,
                                        const TokenEmbeddingTable& table) {
  static const std::unordered_set<std::string> kNoStopwords;
  const auto pred = normalize_answer(prediction, kNoStopwords);
  const auto ref = normalize_answer(reference, kNoStopwords);
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;

  std::vector<std::vector<double>> pv, rv;
  for (const auto& t : pred) pv.push_back(table.vector_for(t));
  for (const auto& t : ref) rv.push_back(table.vector_for(t));

  std::vector<double> best_for_ref(rv.size(), 0.0);
  double precision = 0.0;
  for (const auto& p : pv) {
    double best = 0.0;
    for (std::size_t j = 0; j < rv.size(); ++j) {
      const double sim = (1.0 + dot(std::span<const double>(p), std::span<const double>(rv[j]))) / 2.0;
      best = std::max(best, sim);
      best_for_ref[j] = std::max(best_for_ref[j], sim);
    }
    precision += best;
  }
  precision /= static_cast<double>(pv.size());
  const double recall =
      std::accumulate(best_for_ref.begin(), best_for_ref.end(), 0.0) / rv.size();
  if (precision + recall == 0.0) return 0.0;
  return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

class EmbeddingCosineScorer final : public SemanticScorer {
 public:
  explicit EmbeddingCosineScorer(TokenEmbeddingTable table) : table_(std::move(table)) {}
  double score(std::string_view prediction, std::string_view reference) const override {
    return embedding_cosine_semantic(prediction, reference, table_);
  }

 private:
  TokenEmbeddingTable table_;
};

// ---------------------------------------------------------------------------
// Reward cache: JSON-lines of {example_id, doc_ids, prediction,
// semantic_score}, keyed by example id and the *set* of selected doc ids.

struct CacheRecord {
  std::string example_id;
  std::vector<std::string> doc_ids;
  std::string prediction;
  double semantic_score = 0.0;
};

class RewardCache {
 public:
  static std::string key(const std::string& example_id, std::vector<std::string> doc_ids) {
    std::sort(doc_ids.begin(), doc_ids.end());
    std::string k = example_id;
    for (const auto& d : doc_ids) {
      k.push_back('\x1f');
      k += d;
    }
    return k;
  }

  void add(CacheRecord rec) {
    if (!std::isfinite(rec.semantic_score) || rec.semantic_score < 0.0 || rec.semantic_score > 1.0) {
      throw DataError("cache record for '" + rec.example_id + "' has semantic_score outside [0,1]");
    }
    auto k = key(rec.example_id, rec.doc_ids);
    if (!records_.emplace(std::move(k), std::move(rec)).second) {
      throw DataError("duplicate cache record");
    }
  }

  const CacheRecord* find(const std::string& example_id,
                          const std::vector<std::string>& doc_ids) const {
    auto it = records_.find(key(example_id, doc_ids));
    return it == records_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return records_.size(); }

  static RewardCache load(const std::filesystem::path& path) {
    RewardCache cache;
    detail::for_each_json_line(path, [&](const nlohmann::json& obj, std::size_t lineno) {
      using detail::required_field;
      CacheRecord rec{required_field<std::string>(obj, "example_id", path, lineno),
                      required_field<std::vector<std::string>>(obj, "doc_ids", path, lineno),
                      required_field<std::string>(obj, "prediction", path, lineno),
                      required_field<double>(obj, "semantic_score", path, lineno)};
      try {
        cache.add(std::move(rec));
      } catch (const DataError& e) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    });
    return cache;
  }

  void save(const std::filesystem::path& path) const {
    std::vector<nlohmann::json> rows;
    for (const auto& [k, rec] : records_) {
      rows.push_back({{"example_id", rec.example_id},
                      {"doc_ids", rec.doc_ids},
                      {"prediction", rec.prediction},
                      {"semantic_score", rec.semantic_score}});
    }
    binio::write_file_atomic(path, detail::join_lines(rows));
  }

 private:
  std::map<std::string, CacheRecord> records_;  // ordered: stable save output
};

// ---------------------------------------------------------------------------
// What a reward engine reports for one selection. `shaped` is the dense
// training reward, `sparse` the exact-match indicator used when reward
// shaping is disabled.

struct SelectionOutcome {
  std::string prediction;
  double relaxed_f1 = 0.0;
  double semantic = 0.0;
  double shaped = 0.0;
  double sparse = 0.0;
};

class RewardEngine {
 public:
  virtual ~RewardEngine() = default;
  virtual SelectionOutcome assess(const QAExample& example,
                                  std::span<const std::string> selected_doc_ids) const = 0;
};

// Looks up the frozen reader's prediction for a selection in a reward cache
// and scores it against the reference answer.
class CachedRewardEngine final : public RewardEngine {
 public:
  CachedRewardEngine(RewardCache cache, RewardConfig config,
                     std::shared_ptr<const SemanticScorer> scorer = nullptr)
      : cache_(std::move(cache)), config_(std::move(config)), scorer_(std::move(scorer)) {
    config_.validate();
    if (config_.semantic_source == SemanticSource::kEmbeddingCosine && !scorer_) {
      throw ArgumentError("embedding-cosine semantic source needs a token table");
    }
    if (config_.semantic_source == SemanticSource::kSyntheticOracle) {
      throw ArgumentError("synthetic-oracle rewards come from the synthetic environment");
    }
  }

  SelectionOutcome assess(const QAExample& example,
                          std::span<const std::string> selected) const override {
    std::vector<std::string> ids(selected.begin(), selected.end());
    const CacheRecord* rec = cache_.find(example.id, ids);
    if (!rec) throw RewardError(example.id, "no cached prediction for this document set");

    SelectionOutcome out;
    out.prediction = rec->prediction;
    switch (config_.semantic_source) {
      case SemanticSource::kPrecomputedCache:
        out.shaped = hybrid_reward(rec->prediction, example.answer,
                                   ConstantScorer(rec->semantic_score), config_, example.id);
        out.semantic = rec->semantic_score;
        break;
      case SemanticSource::kEmbeddingCosine:
        out.semantic = scorer_->score(rec->prediction, example.answer);
        out.shaped = hybrid_reward(rec->prediction, example.answer, ConstantScorer(out.semantic),
                                   config_, example.id);
        break;
      default:
        out.shaped = hybrid_reward(rec->prediction, example.answer, ConstantScorer(0.0),
                                   config_, example.id);
        break;
    }
    out.relaxed_f1 = relaxed_f1(rec->prediction, example.answer, config_);
    out.sparse = exact_match(rec->prediction, example.answer, config_);
    return out;
  }

 private:
  RewardCache cache_;
  RewardConfig config_;
  std::shared_ptr<const SemanticScorer> scorer_;
};

}  // namespace sras

#endif  // SRAS_REWARD_HPP_
