#ifndef SRAS_CLI_HPP_
#define SRAS_CLI_HPP_

// Command-line front end: synth, warmup, train, eval, ablate, bench.
//
// Every subcommand accepts `--config FILE`. The file holds `key = value`
// lines where a key is a flag name without the leading dashes (underscores
// and dashes are interchangeable); `#` starts a comment. Values from the
// file are applied first and explicit flags override them. Unknown keys are
// rejected.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sras/sras.hpp"

namespace sras::cli {

struct RunConfig {
  TrainConfig train;
  SynthConfig synth;

  // synth
  std::size_t train_examples = 500;
  std::size_t test_examples = 200;

  // reward
  double alpha = 0.6;
  std::string semantic_source = "synthetic-oracle";
  std::optional<std::string> stopwords;  // comma separated; unset = built-in list
  std::string reward_cache;
  std::string token_table;

  // model
  std::size_t hidden = kDefaultHiddenDim;
  std::string model_in;
  std::string model_out;
  std::size_t checkpoint_every = 0;

  // data
  std::string embeddings;
  std::string qa;
  std::string test_qa;
  std::string embeddings_out;
  std::string qa_out;
  std::string test_qa_out;

  // outputs
  std::string log_out;
  bool log_timing = false;
  std::string report_out;
  std::string csv_out;
  std::string table_out;

  // eval / bench
  std::string selector = "sras";
  std::size_t latency_warmup = 100;
  std::size_t latency_iterations = 1000;
  double latency_limit_us = 1000.0;
  std::size_t dim = kDefaultEmbeddingDim;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads `key = value` lines into `--key=value` arguments for `sub`.
inline std::vector<std::string> config_arguments(const std::filesystem::path& path,
                                                 const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config" || key == "help" || sub.get_option_no_throw("--" + key) == nullptr) {
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) +
                          ": unknown config key '" + key + "'");
    }
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

inline void require_input(const std::string& path, const char* flag) {
  if (path.empty()) throw ArgumentError(std::string(flag) + " is required");
  if (!std::filesystem::is_regular_file(path)) {
    throw DataError(std::string(flag) + " path '" + path + "' does not exist");
  }
}

inline void require_output(const std::string& path, const char* flag) {
  if (path.empty()) throw ArgumentError(std::string(flag) + " is required");
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent)) {
    throw DataError(std::string(flag) + " directory '" + parent.string() + "' does not exist");
  }
}

inline void optional_output(const std::string& path, const char* flag) {
  if (!path.empty()) require_output(path, flag);
}

inline RewardConfig reward_config(const RunConfig& rc) {
  RewardConfig cfg;
  cfg.alpha = rc.alpha;
  cfg.semantic_source = parse_semantic_source(rc.semantic_source);
  if (rc.stopwords) {
    cfg.stopwords.clear();
    std::stringstream ss(*rc.stopwords);
    std::string word;
    while (std::getline(ss, word, ',')) {
      word = trim(word);
      if (!word.empty()) cfg.stopwords.insert(word);
    }
  }
  cfg.validate();
  return cfg;
}

inline void validate_reward_inputs(const RunConfig& rc) {
  const auto source = parse_semantic_source(rc.semantic_source);
  if (source != SemanticSource::kSyntheticOracle) {
    require_input(rc.reward_cache, "--reward-cache");
  }
  if (source == SemanticSource::kEmbeddingCosine) require_input(rc.token_table, "--token-table");
}

inline std::unique_ptr<RewardEngine> make_engine(const RunConfig& rc, const EmbeddingStore& store) {
  const RewardConfig cfg = reward_config(rc);
  if (cfg.semantic_source == SemanticSource::kSyntheticOracle) {
    return std::make_unique<SyntheticRewardEngine>(store, cfg);
  }
  std::shared_ptr<const SemanticScorer> scorer;
  if (cfg.semantic_source == SemanticSource::kEmbeddingCosine) {
    scorer = std::make_shared<EmbeddingCosineScorer>(
        TokenEmbeddingTable(read_embedding_store(rc.token_table)));
  }
  return std::make_unique<CachedRewardEngine>(RewardCache::load(rc.reward_cache), cfg, scorer);
}

inline SelectorParams initial_params(const RunConfig& rc, std::size_t dim) {
  if (!rc.model_in.empty()) {
    SelectorParams p = load_params(rc.model_in);
    if (p.d != dim) {
      throw DataError("model '" + rc.model_in + "' has d=" + std::to_string(p.d) +
                      " but embeddings have dim " + std::to_string(dim));
    }
    return p;
  }
  SeededRng rng = SeededRng(rc.train.seed).derive({0});
  return init_params<float>(dim, rc.hidden, rng);
}

inline std::string latency_note(const LatencyStats& s) {
  std::ostringstream out;
  out << "latency_us mean=" << s.mean_us << " p50=" << s.p50_us << " p95=" << s.p95_us
      << " iterations=" << s.iterations;
  return out.str();
}

// --- option groups --------------------------------------------------------

inline void add_seed(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--seed", rc.train.seed, "Seed for all randomness")->capture_default_str();
}

inline void add_data_inputs(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--embeddings", rc.embeddings, "Embedding store (SRSE) with query and doc vectors");
  sub->add_option("--qa", rc.qa, "QA examples (JSON-lines)");
}

inline void add_reward_options(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--alpha", rc.alpha, "Weight of Relaxed F1 in the hybrid reward")
      ->capture_default_str();
  sub->add_option("--semantic-source", rc.semantic_source,
                  "precomputed-cache | embedding-cosine | synthetic-oracle | constant-zero")
      ->capture_default_str();
  sub->add_option("--stopwords", rc.stopwords,
                  "Comma-separated stopword list (default: built-in 35-word list)");
  sub->add_option("--reward-cache", rc.reward_cache, "Reward cache (JSON-lines)");
  sub->add_option("--token-table", rc.token_table,
                  "Token embedding store for the embedding-cosine source");
}

inline void add_train_options(CLI::App* sub, RunConfig& rc, bool ppo) {
  TrainConfig& t = rc.train;
  if (ppo) {
    sub->add_option("--epochs", t.epochs, "PPO epochs")->capture_default_str();
  }
  sub->add_option("--batch-size", t.batch_size, "Batch size")->capture_default_str();
  sub->add_option("--n", t.n, "Candidates per example")->capture_default_str();
  sub->add_option("--lr", t.lr, "AdamW learning rate")->capture_default_str();
  sub->add_option("--weight-decay", t.weight_decay, "AdamW decoupled weight decay")
      ->capture_default_str();
  sub->add_option("--beta1", t.beta1, "AdamW beta1")->capture_default_str();
  sub->add_option("--beta2", t.beta2, "AdamW beta2")->capture_default_str();
  sub->add_option("--adam-eps", t.adam_eps, "AdamW epsilon")->capture_default_str();
  sub->add_option("--warmup-epochs", t.warmup_epochs, "Supervised warmup epochs")
      ->capture_default_str();
  sub->add_option("--hidden", rc.hidden, "Hidden size h for a fresh model")->capture_default_str();
  sub->add_option("--model-in", rc.model_in, "Start from this model instead of a fresh one");
  if (!ppo) return;
  sub->add_option("--k", t.k, "Documents selected per example")->capture_default_str();
  sub->add_option("--gamma", t.gamma,
                  "Discount factor (one-step episodes: recorded, has no effect)")
      ->capture_default_str();
  sub->add_option("--clip-eps", t.clip_eps, "PPO clip epsilon")->capture_default_str();
  sub->add_option("--ppo-inner-epochs", t.ppo_inner_epochs, "PPO passes per batch")
      ->capture_default_str();
  sub->add_option("--baseline-ema-decay", t.baseline_ema_decay, "Advantage baseline EMA decay")
      ->capture_default_str();
  sub->add_option("--entropy-coef", t.entropy_coef, "Entropy bonus coefficient")
      ->capture_default_str();
  sub->add_option("--temperature", t.temperature, "Policy softmax temperature")
      ->capture_default_str();
  sub->add_option("--workers", t.workers, "Rollout worker threads (results do not depend on it)")
      ->capture_default_str();
  sub->add_flag("--no-sw", t.no_sw, "Disable supervised warmup");
  sub->add_flag("--no-rs", t.no_rs, "Disable reward shaping (exact-match reward)");
  sub->add_flag("--no-cl", t.no_cl, "Disable curriculum ordering");
  add_reward_options(sub, rc);
}

inline void add_latency_options(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--latency-warmup", rc.latency_warmup, "Untimed warmup selections")
      ->capture_default_str();
  sub->add_option("--latency-iterations", rc.latency_iterations, "Timed selections")
      ->capture_default_str();
}

// --- subcommands ------------------------------------------------------------

inline int run_synth(RunConfig& rc) {
  require_output(rc.embeddings_out, "--embeddings-out");
  require_output(rc.qa_out, "--qa-out");
  if (rc.test_examples > 0) require_output(rc.test_qa_out, "--test-qa-out");
  SynthConfig sc = rc.synth;
  sc.seed = rc.train.seed;
  sc.num_examples = rc.train_examples + rc.test_examples;
  const SynthTask task = generate_task(sc);
  std::span<const QAExample> all(task.examples);
  write_embedding_store(task.store, rc.embeddings_out);
  write_qa_jsonl(all.subspan(0, rc.train_examples), rc.qa_out);
  if (rc.test_examples > 0) write_qa_jsonl(all.subspan(rc.train_examples), rc.test_qa_out);
  std::cout << "wrote " << task.store.size() << " embeddings, " << rc.train_examples
            << " train and " << rc.test_examples << " test examples\n";
  return 0;
}

inline int run_warmup(RunConfig& rc) {
  require_input(rc.embeddings, "--embeddings");
  require_input(rc.qa, "--qa");
  if (!rc.model_in.empty()) require_input(rc.model_in, "--model-in");
  require_output(rc.model_out, "--model-out");
  optional_output(rc.log_out, "--log-out");
  const EmbeddingStore store = read_embedding_store(rc.embeddings);
  const auto examples = load_qa_jsonl(rc.qa, rc.train.n);
  const TrainResult res =
      train_supervised(initial_params(rc, store.dim()), examples, store, rc.train);
  save_params(res.params, rc.model_out);
  std::ostringstream csv;
  csv.precision(17);
  csv << "epoch,mean_cross_entropy\n";
  for (std::size_t i = 0; i < res.log.warmup_losses.size(); ++i) {
    csv << (i + 1) << ',' << res.log.warmup_losses[i] << '\n';
    std::cout << "warmup epoch " << (i + 1) << " loss " << res.log.warmup_losses[i] << '\n';
  }
  if (!rc.log_out.empty()) binio::write_file_atomic(rc.log_out, csv.str());
  return 0;
}

inline int run_train(RunConfig& rc) {
  require_input(rc.embeddings, "--embeddings");
  require_input(rc.qa, "--qa");
  if (!rc.model_in.empty()) require_input(rc.model_in, "--model-in");
  require_output(rc.model_out, "--model-out");
  optional_output(rc.log_out, "--log-out");
  validate_reward_inputs(rc);
  rc.train.validate();
  const EmbeddingStore store = read_embedding_store(rc.embeddings);
  const auto examples = load_qa_jsonl(rc.qa, rc.train.n);
  const auto engine = make_engine(rc, store);
  EpochCallback on_epoch = [&](std::size_t epoch, const SelectorParams& p) {
    if (rc.checkpoint_every > 0 && epoch % rc.checkpoint_every == 0) {
      save_params(p, rc.model_out + ".epoch" + std::to_string(epoch));
    }
  };
  const TrainResult res =
      train(initial_params(rc, store.dim()), examples, store, *engine, rc.train, on_epoch);
  save_params(res.params, rc.model_out);
  if (!rc.log_out.empty()) binio::write_file_atomic(rc.log_out, res.log.to_csv(rc.log_timing));
  for (const auto& e : res.log.epochs) {
    std::cout << "epoch " << e.epoch << " reward " << e.mean_reward << " loss " << e.mean_loss
              << " clip " << e.clip_fraction << '\n';
  }
  return 0;
}

inline std::unique_ptr<Selector> make_selector(const RunConfig& rc) {
  if (rc.selector == "sras" || rc.selector == "supervised") {
    return std::make_unique<LearnedSelector>(load_params(rc.model_in), rc.selector);
  }
  if (rc.selector == "cosine") return std::make_unique<CosineSelector>();
  if (rc.selector == "random") return std::make_unique<RandomSelector>(rc.train.seed);
  throw ArgumentError("unknown selector '" + rc.selector + "'");
}

inline int run_eval(RunConfig& rc) {
  require_input(rc.embeddings, "--embeddings");
  require_input(rc.qa, "--qa");
  if (rc.selector == "sras" || rc.selector == "supervised") require_input(rc.model_in, "--model");
  require_output(rc.report_out, "--report-out");
  optional_output(rc.csv_out, "--csv-out");
  optional_output(rc.table_out, "--table-out");
  validate_reward_inputs(rc);
  const EmbeddingStore store = read_embedding_store(rc.embeddings);
  const auto examples = load_qa_jsonl(rc.qa);
  const auto engine = make_engine(rc, store);
  const auto selector = make_selector(rc);
  const EvalReport report = evaluate(*selector, examples, store, *engine, rc.train.k,
                                     {rc.latency_warmup, rc.latency_iterations});
  binio::write_file_atomic(rc.report_out, report.to_json().dump(2) + "\n");
  if (!rc.csv_out.empty()) binio::write_file_atomic(rc.csv_out, report.to_csv());
  const std::string table = format_report_table(std::span<const EvalReport>(&report, 1));
  if (!rc.table_out.empty()) binio::write_file_atomic(rc.table_out, table);
  std::cout << table;
  return 0;
}

inline int run_ablate(RunConfig& rc) {
  require_input(rc.embeddings, "--embeddings");
  require_input(rc.qa, "--qa");
  if (!rc.test_qa.empty()) require_input(rc.test_qa, "--test-qa");
  if (!rc.model_in.empty()) require_input(rc.model_in, "--model-in");
  require_output(rc.table_out, "--table-out");
  optional_output(rc.report_out, "--report-out");
  validate_reward_inputs(rc);
  rc.train.validate();
  const EmbeddingStore store = read_embedding_store(rc.embeddings);
  const auto train_set = load_qa_jsonl(rc.qa, rc.train.n);
  const auto test_set = rc.test_qa.empty() ? train_set : load_qa_jsonl(rc.test_qa, rc.train.n);
  const auto engine = make_engine(rc, store);
  const auto rows = run_ablation(initial_params(rc, store.dim()), train_set, test_set, store,
                                 *engine, rc.train, {rc.latency_warmup, rc.latency_iterations});
  const std::string table = format_ablation_table(rows);
  binio::write_file_atomic(rc.table_out, table);
  if (!rc.report_out.empty()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json rewards = nlohmann::json::array();
      for (const auto& e : r.log.epochs) rewards.push_back(e.mean_reward);
      out.push_back({{"variant", r.variant},
                     {"final_reward", r.final_reward()},
                     {"reward_auc", r.reward_auc()},
                     {"early_reward_std", r.early_reward_std()},
                     {"epoch_rewards", rewards},
                     {"report", r.report.to_json()}});
    }
    binio::write_file_atomic(rc.report_out, out.dump(2) + "\n");
  }
  std::cout << table;
  return 0;
}

inline int run_bench(RunConfig& rc, std::ostream& err) {
  if (!rc.model_in.empty()) require_input(rc.model_in, "--model");
  optional_output(rc.report_out, "--report-out");
  SelectorParams params;
  if (!rc.model_in.empty()) {
    params = load_params(rc.model_in);
  } else {
    SeededRng rng = SeededRng(rc.train.seed).derive({0});
    params = init_params<float>(rc.dim, rc.hidden, rng);
  }
  const std::size_t size = bench_model_size(params);
  const LatencyStats lat = bench_scoring_latency(params, rc.train.n, rc.train.k, rc.train.seed,
                                                 {rc.latency_warmup, rc.latency_iterations});
  const bool within = lat.mean_us < rc.latency_limit_us;
  std::cout << "params " << param_count(params) << "\nmodel_bytes " << size << " ("
            << size / 1.0e6 << " MB)\n"
            << latency_note(lat) << "\nlatency_limit_us " << rc.latency_limit_us << " "
            << (within ? "OK" : "EXCEEDED") << '\n';
  if (!rc.report_out.empty()) {
    nlohmann::json out = {{"d", params.d},
                          {"h", params.h},
                          {"n", rc.train.n},
                          {"k", rc.train.k},
                          {"param_count", param_count(params)},
                          {"model_size_bytes", size},
                          {"latency_us",
                           {{"mean", lat.mean_us},
                            {"p50", lat.p50_us},
                            {"p95", lat.p95_us},
                            {"iterations", lat.iterations}}},
                          {"latency_limit_us", rc.latency_limit_us},
                          {"within_limit", within}};
    binio::write_file_atomic(rc.report_out, out.dump(2) + "\n");
  }
  if (!within) {
    err << "sras: error: mean selection latency " << lat.mean_us << " us exceeds limit "
              << rc.latency_limit_us << " us\n";
    return 3;
  }
  return 0;
}

}  // namespace detail

// Parses argv (without the program name) and runs one subcommand. Returns 0
// on success, 1 on any error (reported as a single line on `err`) and 3 when
// `bench` exceeds its latency limit.
inline int run_command(const std::vector<std::string>& argv, std::ostream& err = std::cerr) {
  using namespace detail;
  RunConfig rc;
  std::string config_path;

  CLI::App app{"Sparse-reward document selector: synthetic data, training, evaluation"};
  app.name("sras");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto config_opt = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "key = value config file; explicit flags take precedence");
  };

  auto* synth = app.add_subcommand("synth", "Write a synthetic planted-gold task");
  config_opt(synth);
  add_seed(synth, rc);
  synth->add_option("--examples", rc.train_examples, "Training examples")->capture_default_str();
  synth->add_option("--test-examples", rc.test_examples, "Held-out examples")
      ->capture_default_str();
  synth->add_option("--n", rc.synth.n, "Candidates per example")->capture_default_str();
  synth->add_option("--dim", rc.synth.d, "Embedding dimension")->capture_default_str();
  synth->add_option("--sigma", rc.synth.sigma, "Gold perturbation norm")->capture_default_str();
  synth->add_option("--corpus-size", rc.synth.corpus_size, "Documents in the corpus")
      ->capture_default_str();
  synth->add_option("--embeddings-out", rc.embeddings_out, "Output embedding store");
  synth->add_option("--qa-out", rc.qa_out, "Output training QA file");
  synth->add_option("--test-qa-out", rc.test_qa_out, "Output held-out QA file");

  auto* warm = app.add_subcommand("warmup", "Supervised cross-entropy training only");
  config_opt(warm);
  add_seed(warm, rc);
  add_data_inputs(warm, rc);
  add_train_options(warm, rc, false);
  warm->add_option("--model-out", rc.model_out, "Output model file");
  warm->add_option("--log-out", rc.log_out, "Warmup loss CSV");

  auto* tr = app.add_subcommand("train", "Warmup (unless --no-sw) then PPO");
  config_opt(tr);
  add_seed(tr, rc);
  add_data_inputs(tr, rc);
  add_train_options(tr, rc, true);
  tr->add_option("--model-out", rc.model_out, "Output model file");
  tr->add_option("--log-out", rc.log_out, "Training log CSV");
  tr->add_flag("--log-timing", rc.log_timing, "Record wall-clock seconds in the log (0 otherwise)");
  tr->add_option("--checkpoint-every", rc.checkpoint_every,
                 "Also write <model-out>.epochN every N epochs (0 = final only)")
      ->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Evaluate one selector");
  config_opt(ev);
  add_seed(ev, rc);
  add_data_inputs(ev, rc);
  add_reward_options(ev, rc);
  add_latency_options(ev, rc);
  ev->add_option("--selector", rc.selector, "sras | supervised | cosine | random")
      ->capture_default_str();
  ev->add_option("--model", rc.model_in, "Model file for learned selectors");
  ev->add_option("--k", rc.train.k, "Documents selected per example")->capture_default_str();
  ev->add_option("--report-out", rc.report_out, "Report JSON");
  ev->add_option("--csv-out", rc.csv_out, "Per-example CSV");
  ev->add_option("--table-out", rc.table_out, "Aligned text table");

  auto* ab = app.add_subcommand("ablate", "Train full / no_sw / no_rs / no_cl and compare");
  config_opt(ab);
  add_seed(ab, rc);
  add_data_inputs(ab, rc);
  add_train_options(ab, rc, true);
  add_latency_options(ab, rc);
  ab->add_option("--test-qa", rc.test_qa, "Held-out QA file (default: the training set)");
  ab->add_option("--table-out", rc.table_out, "Comparison table");
  ab->add_option("--report-out", rc.report_out, "Comparison JSON with per-epoch rewards");

  auto* bench = app.add_subcommand("bench", "Model size and selector latency");
  config_opt(bench);
  add_seed(bench, rc);
  add_latency_options(bench, rc);
  bench->add_option("--model", rc.model_in, "Model file (default: fresh model)");
  bench->add_option("--dim", rc.dim, "Embedding dimension for a fresh model")
      ->capture_default_str();
  bench->add_option("--hidden", rc.hidden, "Hidden size for a fresh model")->capture_default_str();
  bench->add_option("--n", rc.train.n, "Candidates per query")->capture_default_str();
  bench->add_option("--k", rc.train.k, "Documents selected")->capture_default_str();
  bench->add_option("--latency-limit-us", rc.latency_limit_us,
                    "Fail when mean latency reaches this bound")
      ->capture_default_str();
  bench->add_option("--report-out", rc.report_out, "Benchmark JSON");

  try {
    // Expand --config into flags placed ahead of the user's own arguments.
    std::vector<std::string> args(argv.begin(), argv.end());
    if (!args.empty() && args.front().rfind("-", 0) != 0 &&
        app.get_subcommand_no_throw(args.front()) == nullptr) {
      throw ArgumentError("unknown subcommand '" + args.front() + "'");
    }
    std::string cfg_file;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        cfg_file = args[i + 1];
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                   args.begin() + static_cast<std::ptrdiff_t>(i + 2));
        break;
      }
      if (args[i].rfind("--config=", 0) == 0) {
        cfg_file = args[i].substr(9);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      }
    }
    if (!cfg_file.empty()) {
      if (args.empty()) throw ArgumentError("--config needs a subcommand");
      const CLI::App* sub = app.get_subcommand(args.front());
      const auto extra = config_arguments(cfg_file, *sub);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out;
    if (app.exit(e, out, out) == 0) {
      std::cout << out.str();
      return 0;
    }
    err << "sras: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "sras: error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (synth->parsed()) return run_synth(rc);
    if (warm->parsed()) return run_warmup(rc);
    if (tr->parsed()) return run_train(rc);
    if (ev->parsed()) return run_eval(rc);
    if (ab->parsed()) return run_ablate(rc);
    if (bench->parsed()) return run_bench(rc, err);
  } catch (const std::exception& e) {
    err << "sras: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

inline int run_command(int argc, char** argv, std::ostream& err = std::cerr) {
  return run_command(std::vector<std::string>(argv + 1, argv + argc), err);
}

}  // namespace sras::cli

#endif  // SRAS_CLI_HPP_
