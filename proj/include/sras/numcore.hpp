#ifndef SRAS_NUMCORE_HPP_
#define SRAS_NUMCORE_HPP_

// Small dense numeric kernel shared by the learning modules: row-major
// matrices and vectors, a stable softmax, a portable seeded RNG and AdamW.
//
// Storage precision is a template parameter. Persisted weights are float;
// every reduction accumulates in double.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sras/errors.hpp"

namespace sras {

template <class T>
struct DenseVector {
  std::vector<T> data;

  DenseVector() = default;
  explicit DenseVector(std::size_t dim, T fill = T{}) : data(dim, fill) {}
  DenseVector(std::initializer_list<T> values) : data(values) {}
  explicit DenseVector(std::vector<T> values) : data(std::move(values)) {}

  std::size_t dim() const noexcept { return data.size(); }
  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }
  std::span<T> span() noexcept { return data; }
  std::span<const T> span() const noexcept { return data; }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;
};

template <class T>
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;  // row-major, rows * cols

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, T fill = T{})
      : rows(r), cols(c), data(r * c, fill) {}
  DenseMatrix(std::size_t r, std::size_t c, std::vector<T> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
      throw ShapeError("matrix data length " + std::to_string(data.size()) +
                       " != " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data).subspan(r * cols, cols);
  }
  std::span<T> row(std::size_t r) {
    return std::span<T>(data).subspan(r * cols, cols);
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

template <class A, class B>
double dot(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot of lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  // Four independent accumulators keep the loop vectorizable without
  // relaxing floating-point semantics; the summation order is fixed.
  const std::size_t n = a.size();
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      acc[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
  }
  for (; i < n; ++i) acc[0] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

template <class T>
double l2_norm(std::span<const T> v) {
  return std::sqrt(dot(v, v));
}

// Cosine with the convention that a zero-norm operand has cosine 0.
template <class A, class B>
double cosine(std::span<const A> a, std::span<const B> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

template <class M, class V>
DenseVector<double> matvec(const DenseMatrix<M>& m, std::span<const V> v) {
  if (m.cols != v.size()) {
    throw ShapeError("matvec: matrix has " + std::to_string(m.cols) +
                     " cols, vector has dim " + std::to_string(v.size()));
  }
  DenseVector<double> out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) out[r] = dot(m.row(r), v);
  return out;
}

template <class M, class V>
DenseVector<double> matvec(const DenseMatrix<M>& m, const DenseVector<V>& v) {
  return matvec(m, v.span());
}

inline DenseVector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw ShapeError("softmax of empty vector");
  const double peak = *std::max_element(scores.begin(), scores.end());
  DenseVector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    total += out[i];
  }
  for (double& p : out.data) p /= total;
  return out;
}

inline DenseVector<double> softmax(const DenseVector<double>& scores) {
  return softmax(scores.span());
}

// log(sum(exp(x))) with max subtraction.
inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) throw ShapeError("log_sum_exp of empty vector");
  const double peak = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (double v : x) total += std::exp(v - peak);
  return peak + std::log(total);
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The std:: distributions are implementation-defined, so the
// transforms below (53-bit uniform, rejection-sampled integers, Box-Muller
// normals) are written out to keep streams identical across toolchains.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw ArgumentError("uniform_int bound must be positive");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = uniform_int(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

  // Independent child stream keyed by (seed, tags...). Used to give every
  // rollout its own generator so results do not depend on worker count.
  SeededRng derive(std::initializer_list<std::uint64_t> tags) const {
    std::uint64_t state = seed_;
    std::uint64_t mixed = splitmix64(state);
    for (std::uint64_t tag : tags) {
      state = mixed ^ (tag + 0x632be59bd9b4e019ULL);
      mixed = splitmix64(state);
    }
    return SeededRng(mixed);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct AdamWHyper {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  AdamWHyper hyper;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> first_moment;   // one per parameter block
  std::vector<std::vector<double>> second_moment;

  explicit AdamWState(AdamWHyper h = {}) : hyper(h) {
    if (!(hyper.lr > 0.0)) throw ArgumentError("AdamW lr must be positive");
  }
};

template <class Real>
struct ParamBlock {
  std::string name;
  std::span<Real> values;
  std::span<const double> grads;
};

// One decoupled-weight-decay Adam step over all blocks. t is incremented
// before bias correction; the decay term uses the pre-step parameter value:
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + lambda * theta)
// Gradients are validated up front so a bad block leaves every parameter
// untouched.
template <class Real>
void adamw_step(AdamWState& state, std::span<const ParamBlock<Real>> blocks) {
  if (state.first_moment.empty()) {
    for (const auto& b : blocks) {
      state.first_moment.emplace_back(b.values.size(), 0.0);
      state.second_moment.emplace_back(b.values.size(), 0.0);
    }
  }
  if (state.first_moment.size() != blocks.size()) {
    throw ShapeError("AdamW state has " +
                     std::to_string(state.first_moment.size()) +
                     " blocks, step got " + std::to_string(blocks.size()));
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    if (blk.values.size() != blk.grads.size() ||
        blk.values.size() != state.first_moment[b].size()) {
      throw ShapeError("AdamW block '" + blk.name + "' shape mismatch");
    }
    for (double g : blk.grads) {
      if (!std::isfinite(g)) {
        throw TrainingError("non-finite gradient in parameter '" + blk.name +
                            "'");
      }
    }
  }

  const AdamWHyper& hp = state.hyper;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(hp.beta1, t);
  const double bc2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    const auto& blk = blocks[b];
    for (std::size_t i = 0; i < blk.values.size(); ++i) {
      const double g = blk.grads[i];
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      const double theta = static_cast<double>(blk.values[i]);
      const double updated = theta - hp.lr * (m_hat / (std::sqrt(v_hat) + hp.eps)) -
                             hp.lr * hp.weight_decay * theta;
      blk.values[i] = static_cast<Real>(updated);
    }
  }
}

template <class Real>
void adamw_step(AdamWState& state, std::initializer_list<ParamBlock<Real>> blocks) {
  adamw_step(state, std::span<const ParamBlock<Real>>(blocks.begin(), blocks.size()));
}

}  // namespace sras

#endif  // SRAS_NUMCORE_HPP_
