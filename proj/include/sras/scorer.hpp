#ifndef SRAS_SCORER_HPP_
#define SRAS_SCORER_HPP_

// Additive-interaction relevance scorer.
//
//   h_q   = W_q q
//   h_d_i = W_d d_i
//   s_i   = w . tanh(h_q + h_d_i)
//
// No bias terms. Gradients are derived by hand (see backward()). With the
// default d = 384, h = 256 the model has 2*h*d + h = 196,864 parameters.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sras/binio.hpp"
#include "sras/errors.hpp"
#include "sras/numcore.hpp"

namespace sras {

inline constexpr std::size_t kDefaultEmbeddingDim = 384;
inline constexpr std::size_t kDefaultHiddenDim = 256;

template <class Real>
struct BasicSelectorParams {
  std::size_t d = 0;
  std::size_t h = 0;
  DenseMatrix<Real> W_q;  // h x d
  DenseMatrix<Real> W_d;  // h x d
  DenseVector<Real> w;    // h

  BasicSelectorParams() = default;
  BasicSelectorParams(std::size_t dim, std::size_t hidden)
      : d(dim), h(hidden), W_q(hidden, dim), W_d(hidden, dim), w(hidden) {
    if (dim == 0 || hidden == 0) throw ShapeError("scorer dims must be >= 1");
  }

  template <class Other>
  BasicSelectorParams<Other> cast() const {
    BasicSelectorParams<Other> out(d, h);
    for (std::size_t i = 0; i < W_q.data.size(); ++i) {
      out.W_q.data[i] = static_cast<Other>(W_q.data[i]);
      out.W_d.data[i] = static_cast<Other>(W_d.data[i]);
    }
    for (std::size_t i = 0; i < h; ++i) out.w[i] = static_cast<Other>(w[i]);
    return out;
  }

  friend bool operator==(const BasicSelectorParams&,
                         const BasicSelectorParams&) = default;
};

using SelectorParams = BasicSelectorParams<float>;

inline constexpr std::size_t param_count(std::size_t d, std::size_t h) {
  return 2 * h * d + h;
}

template <class Real>
std::size_t param_count(const BasicSelectorParams<Real>& p) {
  return param_count(p.d, p.h);
}

// W_q, W_d ~ U[-1/sqrt(d), 1/sqrt(d)], w ~ U[-1/sqrt(h), 1/sqrt(h)], drawn in
// that order.
template <class Real = float>
BasicSelectorParams<Real> init_params(std::size_t d, std::size_t h,
                                      SeededRng& rng) {
  BasicSelectorParams<Real> p(d, h);
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(d));
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (auto& x : p.W_q.data) x = static_cast<Real>(rng.uniform(-in_bound, in_bound));
  for (auto& x : p.W_d.data) x = static_cast<Real>(rng.uniform(-in_bound, in_bound));
  for (auto& x : p.w.data) x = static_cast<Real>(rng.uniform(-head_bound, head_bound));
  return p;
}

struct ScoreGradients {
  DenseMatrix<double> dW_q;
  DenseMatrix<double> dW_d;
  DenseVector<double> dw;

  ScoreGradients() = default;
  ScoreGradients(std::size_t d, std::size_t h) : dW_q(h, d), dW_d(h, d), dw(h) {}

  void zero() {
    std::fill(dW_q.data.begin(), dW_q.data.end(), 0.0);
    std::fill(dW_d.data.begin(), dW_d.data.end(), 0.0);
    std::fill(dw.data.begin(), dw.data.end(), 0.0);
  }

  bool all_finite() const {
    for (const auto* v : {&dW_q.data, &dW_d.data, &dw.data}) {
      for (double x : *v) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  }
};

// Activations kept from a forward pass so backward() need not recompute them.
struct ScoreTrace {
  std::size_t n = 0;
  std::size_t h = 0;
  std::vector<double> activations;  // n x h, tanh(z_i)
  DenseVector<double> scores;
};

template <class E>
using EmbeddingList = std::span<const std::span<const E>>;

namespace detail {

template <class Real, class E>
void check_inputs(const BasicSelectorParams<Real>& p, std::span<const E> q,
                  EmbeddingList<E> docs) {
  if (q.size() != p.d) {
    throw ShapeError("query dim " + std::to_string(q.size()) +
                     " != model dim " + std::to_string(p.d));
  }
  if (docs.empty()) throw ShapeError("no candidate documents");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].size() != p.d) {
      throw ShapeError("document " + std::to_string(i) + " dim " +
                       std::to_string(docs[i].size()) + " != model dim " +
                       std::to_string(p.d));
    }
  }
}

// Single-precision dot product with 16 independent float lanes combined in
// double. The lane split is fixed, so results are reproducible bit for bit.
#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
__attribute__((target_clones("avx2", "default")))
#endif
inline double dot_f32(const float* a, const float* b, std::size_t n) {
  constexpr std::size_t kLanes = 16;
  float lanes[kLanes] = {};
  std::size_t c = 0;
  for (; c + kLanes <= n; c += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) lanes[l] += a[c + l] * b[c + l];
  }
  double total = 0.0;
  for (; c < n; ++c) total += static_cast<double>(a[c]) * static_cast<double>(b[c]);
  for (std::size_t l = 0; l < kLanes; ++l) total += static_cast<double>(lanes[l]);
  return total;
}

// Row-times-vector for the scorer: float weights and embeddings use the
// float kernel, anything else goes through the double-accumulating dot().
template <class Real, class E>
double row_dot(std::span<const Real> row, std::span<const E> v) {
  if constexpr (std::is_same_v<Real, float> && std::is_same_v<E, float>) {
    return dot_f32(row.data(), v.data(), row.size());
  } else {
    return dot(row, v);
  }
}

}  // namespace detail

template <class Real, class E>
ScoreTrace forward(const BasicSelectorParams<Real>& p, std::span<const E> q,
                   EmbeddingList<E> docs) {
  detail::check_inputs(p, q, docs);
  ScoreTrace tr;
  tr.n = docs.size();
  tr.h = p.h;
  tr.activations.resize(tr.n * p.h);
  tr.scores = DenseVector<double>(tr.n);

  std::vector<double> hq(p.h);
  for (std::size_t j = 0; j < p.h; ++j) hq[j] = detail::row_dot(p.W_q.row(j), q);
  const std::size_t n = tr.n;
  for (std::size_t i = 0; i < n; ++i) {
    double* act = tr.activations.data() + i * p.h;
    for (std::size_t j = 0; j < p.h; ++j) {
      act[j] = std::tanh(hq[j] + detail::row_dot(p.W_d.row(j), docs[i]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* act = tr.activations.data() + i * p.h;
    double s = 0.0;
    for (std::size_t j = 0; j < p.h; ++j) s += static_cast<double>(p.w[j]) * act[j];
    tr.scores[i] = s;
  }
  return tr;
}

template <class Real, class E>
DenseVector<double> score_candidates(const BasicSelectorParams<Real>& p,
                                     std::span<const E> q,
                                     EmbeddingList<E> docs) {
  return forward(p, q, docs).scores;
}

// Adds the gradient of sum_i upstream_i * s_i into `grads`:
//   dw   += sum_i g_i tanh(z_i)
//   dW_q += sum_i (g_i w * (1 - tanh^2 z_i)) q^T
//   dW_d += sum_i (g_i w * (1 - tanh^2 z_i)) d_i^T
template <class Real, class E>
void backward(const BasicSelectorParams<Real>& p, const ScoreTrace& tr,
              std::span<const E> q, EmbeddingList<E> docs,
              std::span<const double> upstream, ScoreGradients& grads) {
  if (upstream.size() != tr.n || docs.size() != tr.n) {
    throw ShapeError("upstream length " + std::to_string(upstream.size()) +
                     " != candidate count " + std::to_string(tr.n));
  }
  if (grads.dw.dim() != p.h || grads.dW_q.cols != p.d) {
    throw ShapeError("gradient buffers do not match model dims");
  }
  std::vector<double> delta_q(p.h, 0.0);
  std::vector<double> delta(p.h);
  for (std::size_t i = 0; i < tr.n; ++i) {
    const double g = upstream[i];
    if (g == 0.0) continue;
    const double* act = tr.activations.data() + i * p.h;
    for (std::size_t j = 0; j < p.h; ++j) {
      grads.dw[j] += g * act[j];
      delta[j] = g * static_cast<double>(p.w[j]) * (1.0 - act[j] * act[j]);
      delta_q[j] += delta[j];
    }
    for (std::size_t j = 0; j < p.h; ++j) {
      if (delta[j] == 0.0) continue;
      auto row = grads.dW_d.row(j);
      for (std::size_t c = 0; c < p.d; ++c) {
        row[c] += delta[j] * static_cast<double>(docs[i][c]);
      }
    }
  }
  for (std::size_t j = 0; j < p.h; ++j) {
    if (delta_q[j] == 0.0) continue;
    auto row = grads.dW_q.row(j);
    for (std::size_t c = 0; c < p.d; ++c) {
      row[c] += delta_q[j] * static_cast<double>(q[c]);
    }
  }
}

template <class Real, class E>
ScoreGradients score_gradients(const BasicSelectorParams<Real>& p,
                               std::span<const E> q, EmbeddingList<E> docs,
                               std::span<const double> upstream) {
  const ScoreTrace tr = forward(p, q, docs);
  ScoreGradients grads(p.d, p.h);
  backward(p, tr, q, docs, upstream, grads);
  return grads;
}

// ---------------------------------------------------------------------------
// Model file: "SRSM", u32 version, u32 d, u32 h, u64 reserved, then W_q, W_d
// (row-major) and w as little-endian f32.

inline constexpr char kModelMagic[4] = {'S', 'R', 'S', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::size_t kModelHeaderBytes = 24;

inline constexpr std::size_t model_file_size(std::size_t d, std::size_t h) {
  return kModelHeaderBytes + 4 * param_count(d, h);
}

inline std::vector<char> encode_params(const SelectorParams& p) {
  binio::ByteWriter out;
  out.bytes(std::string_view(kModelMagic, 4));
  out.uint<std::uint32_t>(kModelVersion);
  out.uint<std::uint32_t>(static_cast<std::uint32_t>(p.d));
  out.uint<std::uint32_t>(static_cast<std::uint32_t>(p.h));
  out.uint<std::uint64_t>(0);
  for (float x : p.W_q.data) out.f32(x);
  for (float x : p.W_d.data) out.f32(x);
  for (float x : p.w.data) out.f32(x);
  return out.buffer();
}

inline SelectorParams decode_params(std::string_view bytes,
                                    const std::string& source = "model") {
  binio::ByteReader in(bytes, source);
  if (in.bytes(4, "magic") != std::string_view(kModelMagic, 4)) {
    throw FormatError(source + ": bad magic (expected SRSM)");
  }
  const auto version = in.uint<std::uint32_t>("version");
  if (version != kModelVersion) {
    throw FormatError(source + ": unsupported version " + std::to_string(version));
  }
  const auto d = in.uint<std::uint32_t>("d");
  const auto h = in.uint<std::uint32_t>("h");
  if (d == 0 || h == 0) {
    throw FormatError(source + ": invalid dims d=" + std::to_string(d) +
                      " h=" + std::to_string(h));
  }
  const auto reserved = in.uint<std::uint64_t>("reserved");
  if (reserved != 0) throw FormatError(source + ": reserved field must be 0");
  const std::size_t expected = 4 * param_count(d, h);
  if (in.remaining() != expected) {
    in.fail("weight payload is " + std::to_string(in.remaining()) +
            " bytes, expected " + std::to_string(expected) + " for d=" +
            std::to_string(d) + " h=" + std::to_string(h));
  }
  SelectorParams p(d, h);
  for (auto& x : p.W_q.data) x = in.f32("W_q");
  for (auto& x : p.W_d.data) x = in.f32("W_d");
  for (auto& x : p.w.data) x = in.f32("w");
  for (const auto* v : {&p.W_q.data, &p.W_d.data}) {
    for (float x : *v) {
      if (!std::isfinite(x)) throw FormatError(source + ": non-finite weight");
    }
  }
  for (float x : p.w.data) {
    if (!std::isfinite(x)) throw FormatError(source + ": non-finite weight");
  }
  return p;
}

inline void save_params(const SelectorParams& p, const std::filesystem::path& path) {
  binio::write_file_atomic(path, encode_params(p));
}

inline SelectorParams load_params(const std::filesystem::path& path) {
  const std::string bytes = binio::read_file(path);
  return decode_params(bytes, path.string());
}

}  // namespace sras

#endif  // SRAS_SCORER_HPP_
