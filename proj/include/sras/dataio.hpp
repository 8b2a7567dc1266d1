#ifndef SRAS_DATAIO_HPP_
#define SRAS_DATAIO_HPP_

// Embedding store (binary), QA and corpus JSON-lines, and candidate pooling.
//
// Embedding store layout, little-endian:
//   "SRSE" | u32 version=1 | u32 dim | u64 count
//   count * dim f32, row-major
//   count * (u16 byte length | UTF-8 id)

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sras/binio.hpp"
#include "sras/errors.hpp"
#include "sras/numcore.hpp"

namespace sras {

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  void add(std::string id, std::span<const float> vec) {
    if (vec.size() != dim_) {
      throw ShapeError("embedding '" + id + "' has dim " +
                       std::to_string(vec.size()) + ", store dim is " +
                       std::to_string(dim_));
    }
    for (float x : vec) {
      if (!std::isfinite(x)) throw DataError("non-finite value in embedding '" + id + "'");
    }
    if (id.size() > 0xffff) throw DataError("embedding id longer than 65535 bytes");
    if (!index_.emplace(id, ids_.size()).second) {
      throw DataError("duplicate embedding id '" + id + "'");
    }
    ids_.push_back(std::move(id));
    values_.insert(values_.end(), vec.begin(), vec.end());
  }

  const std::string& id(std::size_t row) const { return ids_.at(row); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values_).subspan(r * dim_, dim_);
  }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& id) const { return index_.contains(id); }

  std::span<const float> at(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("no embedding for id '" + id + "'");
    return row(it->second);
  }

  const std::vector<float>& values() const noexcept { return values_; }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.values_ == b.values_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr char kStoreMagic[4] = {'S', 'R', 'S', 'E'};
inline constexpr std::uint32_t kStoreVersion = 1;

inline std::vector<char> encode_embedding_store(const EmbeddingStore& store) {
  binio::ByteWriter out;
  out.bytes(std::string_view(kStoreMagic, 4));
  out.uint<std::uint32_t>(kStoreVersion);
  out.uint<std::uint32_t>(static_cast<std::uint32_t>(store.dim()));
  out.uint<std::uint64_t>(store.size());
  for (float x : store.values()) out.f32(x);
  for (const auto& id : store.ids()) {
    out.uint<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
    out.bytes(id);
  }
  return out.buffer();
}

inline EmbeddingStore decode_embedding_store(std::string_view bytes,
                                             const std::string& source = "store") {
  binio::ByteReader in(bytes, source);
  if (in.bytes(4, "magic") != std::string_view(kStoreMagic, 4)) {
    throw FormatError(source + ": bad magic (expected SRSE)");
  }
  const auto version = in.uint<std::uint32_t>("version");
  if (version != kStoreVersion) {
    throw FormatError(source + ": unsupported version " + std::to_string(version));
  }
  const auto dim = in.uint<std::uint32_t>("dim");
  const auto count = in.uint<std::uint64_t>("count");
  if (dim == 0 && count > 0) throw FormatError(source + ": dim is 0 with records present");
  // Cheap bound before allocating: vectors alone need count*dim*4 bytes.
  if (dim != 0 && count > in.remaining() / (4ull * dim)) {
    in.fail("vector payload truncated (count=" + std::to_string(count) + ")");
  }
  std::vector<float> values(static_cast<std::size_t>(count) * dim);
  for (auto& x : values) x = in.f32("vectors");

  EmbeddingStore store(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto len = in.uint<std::uint16_t>("id length");
    std::string id(in.bytes(len, "id bytes"));
    try {
      store.add(std::move(id), std::span<const float>(values).subspan(r * dim, dim));
    } catch (const Error& e) {
      in.fail(std::string("id table entry ") + std::to_string(r) + ": " + e.what());
    }
  }
  if (in.remaining() != 0) {
    in.fail(std::to_string(in.remaining()) + " trailing bytes after id table");
  }
  return store;
}

inline void write_embedding_store(const EmbeddingStore& store,
                                  const std::filesystem::path& path) {
  binio::write_file_atomic(path, encode_embedding_store(store));
}

inline EmbeddingStore read_embedding_store(const std::filesystem::path& path) {
  return decode_embedding_store(binio::read_file(path), path.string());
}

// ---------------------------------------------------------------------------

struct QAExample {
  std::string id;
  std::string question;
  std::string answer;
  std::string gold_doc_id;
  std::vector<std::string> candidate_doc_ids;
  std::optional<double> difficulty;

  std::size_t gold_index() const {
    for (std::size_t i = 0; i < candidate_doc_ids.size(); ++i) {
      if (candidate_doc_ids[i] == gold_doc_id) return i;
    }
    throw DataError("example '" + id + "': gold doc '" + gold_doc_id +
                    "' not among candidates");
  }

  friend bool operator==(const QAExample&, const QAExample&) = default;
};

struct CorpusDoc {
  std::string id;
  std::string text;
};

inline void validate_example(const QAExample& ex, std::optional<std::size_t> expected_n) {
  std::unordered_set<std::string> seen;
  for (const auto& c : ex.candidate_doc_ids) {
    if (!seen.insert(c).second) {
      throw DataError("example '" + ex.id + "': duplicate candidate '" + c + "'");
    }
  }
  if (!seen.contains(ex.gold_doc_id)) {
    throw DataError("example '" + ex.id + "': gold doc '" + ex.gold_doc_id +
                    "' not among candidates");
  }
  if (expected_n && ex.candidate_doc_ids.size() != *expected_n) {
    throw DataError("example '" + ex.id + "': " +
                    std::to_string(ex.candidate_doc_ids.size()) +
                    " candidates, expected " + std::to_string(*expected_n));
  }
}

namespace detail {

template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected a JSON object");
    }
    fn(obj, lineno);
  }
}

template <class T>
T required_field(const nlohmann::json& obj, const char* key,
                 const std::filesystem::path& path, std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw DataError(path.string() + ":" + std::to_string(lineno) +
                    ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(path.string() + ":" + std::to_string(lineno) +
                    ": field '" + key + "' has the wrong type");
  }
}

inline std::string join_lines(const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace detail

inline std::vector<QAExample> load_qa_jsonl(const std::filesystem::path& path,
                                            std::optional<std::size_t> expected_n = {}) {
  std::vector<QAExample> out;
  detail::for_each_json_line(path, [&](const nlohmann::json& obj, std::size_t lineno) {
    using detail::required_field;
    QAExample ex;
    ex.id = required_field<std::string>(obj, "id", path, lineno);
    ex.question = required_field<std::string>(obj, "question", path, lineno);
    ex.answer = required_field<std::string>(obj, "answer", path, lineno);
    ex.gold_doc_id = required_field<std::string>(obj, "gold_doc_id", path, lineno);
    ex.candidate_doc_ids =
        required_field<std::vector<std::string>>(obj, "candidate_doc_ids", path, lineno);
    if (auto it = obj.find("difficulty"); it != obj.end() && !it->is_null()) {
      ex.difficulty = required_field<double>(obj, "difficulty", path, lineno);
    }
    try {
      validate_example(ex, expected_n);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(ex));
  });
  return out;
}

inline std::string encode_qa_jsonl(std::span<const QAExample> examples) {
  std::vector<nlohmann::json> rows;
  for (const auto& ex : examples) {
    nlohmann::json obj = {{"id", ex.id},
                          {"question", ex.question},
                          {"answer", ex.answer},
                          {"gold_doc_id", ex.gold_doc_id},
                          {"candidate_doc_ids", ex.candidate_doc_ids}};
    if (ex.difficulty) obj["difficulty"] = *ex.difficulty;
    rows.push_back(std::move(obj));
  }
  return detail::join_lines(rows);
}

inline void write_qa_jsonl(std::span<const QAExample> examples,
                           const std::filesystem::path& path) {
  binio::write_file_atomic(path, encode_qa_jsonl(examples));
}

inline std::vector<CorpusDoc> load_corpus_jsonl(const std::filesystem::path& path) {
  std::vector<CorpusDoc> out;
  std::unordered_set<std::string> seen;
  detail::for_each_json_line(path, [&](const nlohmann::json& obj, std::size_t lineno) {
    CorpusDoc doc{detail::required_field<std::string>(obj, "id", path, lineno),
                  detail::required_field<std::string>(obj, "text", path, lineno)};
    if (!seen.insert(doc.id).second) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": duplicate document id '" + doc.id + "'");
    }
    out.push_back(std::move(doc));
  });
  return out;
}

inline void write_corpus_jsonl(std::span<const CorpusDoc> docs,
                               const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  for (const auto& d : docs) rows.push_back({{"id", d.id}, {"text", d.text}});
  binio::write_file_atomic(path, detail::join_lines(rows));
}

// Gold plus n-1 distractors drawn uniformly without replacement from the
// other corpus ids, then shuffled so the gold position is uniform.
inline std::vector<std::string> build_candidate_pool(const std::string& gold,
                                                     std::span<const std::string> corpus_ids,
                                                     std::size_t n, SeededRng& rng) {
  if (n == 0) throw ArgumentError("candidate pool size must be >= 1");
  std::vector<std::string> others;
  others.reserve(corpus_ids.size());
  std::unordered_set<std::string> seen;
  bool has_gold = false;
  for (const auto& id : corpus_ids) {
    if (!seen.insert(id).second) continue;
    if (id == gold) {
      has_gold = true;
    } else {
      others.push_back(id);
    }
  }
  if (!has_gold) throw DataError("gold doc '" + gold + "' is not in the corpus");
  if (others.size() + 1 < n) {
    throw DataError("corpus has " + std::to_string(others.size() + 1) +
                    " distinct docs, need at least " + std::to_string(n));
  }
  // Partial Fisher-Yates: the first n-1 slots become the distractors.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_int(others.size() - i);
    std::swap(others[i], others[j]);
  }
  std::vector<std::string> pool(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(n - 1));
  pool.push_back(gold);
  rng.shuffle(pool.begin(), pool.end());
  return pool;
}

}  // namespace sras

#endif  // SRAS_DATAIO_HPP_
