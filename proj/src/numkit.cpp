#include "distlab/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "distlab/error.hpp"

namespace distlab {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Vec data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ParamError("matrix data length does not equal rows * cols");
  }
}

void DenseMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw ParamError("appended row has " + std::to_string(values.size()) +
                     " columns, expected " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> out) {
  if (x.size() != m.cols() || out.size() != m.rows()) {
    throw ParamError("matvec dimension mismatch");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), x);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw ParamError("empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void softmax_inplace(std::span<double> v) {
  if (v.empty()) throw ParamError("empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    s += x;
  }
  for (double& x : v) x /= s;
}

Vec softmax(std::span<const double> v) {
  Vec out(v.begin(), v.end());
  softmax_inplace(out);
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

double safe_log(double p) { return std::log(clamp_prob(p)); }

bool is_prob_vector(std::span<const double> p, double tol) {
  if (p.size() < 2) return false;
  double s = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) return false;
    s += x;
  }
  return std::abs(s - 1.0) <= tol;
}

double sum(std::span<const double> v) {
  // Neumaier compensated summation so cross-draw aggregates do not drift.
  double s = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  return s + c;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw ParamError("mean of empty vector");
  return sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  Vec sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return sum(sq) / static_cast<double>(v.size() - 1);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t origin_seed, std::uint64_t stream_index)
    : origin_seed_(origin_seed),
      stream_index_(stream_index),
      mixed_seed_(mix64(mix64(origin_seed) ^ mix64(stream_index + 0x632be59bd9b4e019ULL))),
      engine_(mixed_seed_) {}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw ParamError("uniform_index over empty range");
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

std::size_t RandomStream::categorical(std::span<const double> probs) {
  if (probs.empty()) throw ParamError("categorical over empty distribution");
  const double u = uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

RandomStream RandomStream::derive(std::uint64_t child_index) const {
  return RandomStream(mixed_seed_, child_index);
}

RandomStream derive_stream(std::uint64_t origin_seed, std::uint64_t stream_index) {
  return RandomStream(origin_seed, stream_index);
}

}  // namespace distlab
