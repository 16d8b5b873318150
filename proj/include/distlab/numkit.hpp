#pragma once

// Low-level numerics shared by every module: a dense row-major matrix,
// stable log-sum-exp / softmax / sigmoid, probability clamping, and a
// seedable random stream.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace distlab {

using Vec = std::vector<double>;

// Floor applied to probabilities before any logarithm.
inline constexpr double kProbFloor = 1e-12;

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, Vec data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // Appends one row; the first row fixes the column count of an empty matrix.
  void append_row(std::span<const double> values);

  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

// out = M * x  (out sized M.rows()).
void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> out);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// log sum_i exp(v_i) via max shift. Throws ParamError on empty input.
double log_sum_exp(std::span<const double> v);

Vec softmax(std::span<const double> v);
void softmax_inplace(std::span<double> v);

// 1 / (1 + e^-z), evaluated without overflow for either sign.
double sigmoid(double z);

// Clamps into [kProbFloor, 1 - kProbFloor].
double clamp_prob(double p);

// Natural log of a clamped probability.
double safe_log(double p);

// True when every entry is in [0,1], the sum is 1 within tol, and size >= 2.
bool is_prob_vector(std::span<const double> p, double tol = 1e-9);

double sum(std::span<const double> v);
double mean(std::span<const double> v);
// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> v);

// Deterministic random stream. Two streams constructed from the same
// (origin_seed, stream_index) produce the same draws. Normal variates use the
// Box-Muller transform on 53-bit uniforms from a 64-bit Mersenne Twister.
class RandomStream {
 public:
  RandomStream(std::uint64_t origin_seed, std::uint64_t stream_index);

  std::uint64_t origin_seed() const noexcept { return origin_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Index i drawn with probability probs[i] (inverse-CDF).
  std::size_t categorical(std::span<const double> probs);
  bool bernoulli(double p) { return uniform() < p; }

  // Seed of a child stream; children of one parent with distinct indices are
  // decorrelated.
  RandomStream derive(std::uint64_t child_index) const;

 private:
  std::uint64_t origin_seed_;
  std::uint64_t stream_index_;
  std::uint64_t mixed_seed_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// 64-bit avalanche mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

RandomStream derive_stream(std::uint64_t origin_seed, std::uint64_t stream_index);

template <typename T>
void shuffle(std::vector<T>& items, RandomStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.uniform_index(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace distlab
