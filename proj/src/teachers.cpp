#include "distlab/teachers.hpp"

#include <cmath>

#include "distlab/error.hpp"

namespace distlab {

DenseMatrix predict_all_logits(const LogitPredictor& model, const DenseMatrix& features) {
  DenseMatrix out(features.rows(), model.num_classes());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const Vec logits = model.predict_logits(features.row(i));
    std::copy(logits.begin(), logits.end(), out.row(i).begin());
  }
  return out;
}

TeacherOutput teacher_from_probs(DenseMatrix probs) {
  DenseMatrix logits(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    for (std::size_t c = 0; c < probs.cols(); ++c) logits(i, c) = safe_log(probs(i, c));
  }
  return {std::move(probs), std::move(logits)};
}

TeacherOutput teacher_from_logits(DenseMatrix logits) {
  DenseMatrix probs = logits;
  for (std::size_t i = 0; i < probs.rows(); ++i) softmax_inplace(probs.row(i));
  return {std::move(probs), std::move(logits)};
}

TeacherOutput bayes_teacher(const BayesAnnotatedDataset& data) {
  if (!data.bayes_probs) throw ParamError("Bayes teacher requires annotated data");
  return teacher_from_probs(*data.bayes_probs);
}

TeacherOutput noisy_biased_teacher(const BayesAnnotatedDataset& data, std::span<const double> theta,
                                   double alpha, double sigma, RandomStream& stream) {
  if (data.num_classes != 2) throw ParamError("noisy-biased teacher requires a binary problem");
  if (theta.size() != data.dim()) throw ParamError("theta dimension does not match features");
  if (alpha < 0.0 || alpha > 1.0) throw ParamError("alpha must lie in [0, 1]");
  if (sigma < 0.0) throw ParamError("sigma must be >= 0");
  DenseMatrix probs(data.size(), 2);
  const double noise_scale = sigma * sigma;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double eps = stream.normal();
    const double q = (1.0 - alpha) * sigmoid(dot(theta, data.features.row(i)) + noise_scale * eps) +
                     alpha / 2.0;
    probs(i, 0) = 1.0 - q;
    probs(i, 1) = q;
  }
  return teacher_from_probs(std::move(probs));
}

double distortion_psi(double u, double alpha) {
  if (alpha < 1.0) throw ParamError("distortion alpha must be >= 1");
  if (alpha == 1.0) return u;
  if (u <= 0.5) return 0.5 * std::pow(2.0 * u, alpha);
  return 0.5 + 0.5 * std::pow(2.0 * u - 1.0, 1.0 / alpha);
}

TeacherOutput distorted_teacher(const BayesAnnotatedDataset& data, double distortion_alpha) {
  if (distortion_alpha < 1.0) throw ParamError("distortion alpha must be >= 1");
  if (!data.bayes_probs) throw ParamError("distorted teacher requires annotated data");
  if (data.num_classes != 2) throw ParamError("distorted teacher requires a binary problem");
  DenseMatrix probs(data.size(), 2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double q = distortion_psi((*data.bayes_probs)(i, 1), distortion_alpha);
    probs(i, 0) = 1.0 - q;
    probs(i, 1) = q;
  }
  return teacher_from_probs(std::move(probs));
}

TeacherOutput label_smoothing_teacher(std::span<const int> labels, double smoothing_alpha,
                                      int num_classes) {
  if (smoothing_alpha < 0.0 || smoothing_alpha > 1.0) {
    throw ParamError("smoothing alpha must lie in [0, 1]");
  }
  if (num_classes < 2) throw ParamError("label smoothing requires at least two classes");
  const auto l = static_cast<std::size_t>(num_classes);
  const double off = smoothing_alpha / static_cast<double>(num_classes);
  DenseMatrix probs(labels.size(), l, off);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw ParamError("label out of range");
    probs(i, static_cast<std::size_t>(labels[i])) = (1.0 - smoothing_alpha) + off;
  }
  return teacher_from_probs(std::move(probs));
}

TeacherOutput LearnedTeacher::operator()(const DenseMatrix& features) const {
  return teacher_from_logits(predict_all_logits(*model_, features));
}

LearnedTeacher learned_teacher(const LogitPredictor& model) { return LearnedTeacher(model); }

double teacher_mse(const TeacherOutput& teacher, const BayesAnnotatedDataset& data) {
  if (!data.bayes_probs) throw ParamError("teacher MSE requires annotated data");
  if (teacher.size() != data.size() ||
      teacher.num_classes() != static_cast<std::size_t>(data.num_classes)) {
    throw ParamError("teacher output shape does not match dataset");
  }
  Vec terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    terms[i] = squared_distance(teacher.probs.row(i), data.bayes_probs->row(i));
  }
  return mean(terms);
}

TeacherBiasVariance teacher_bias_variance(const TeacherFactory& factory,
                                          const BayesAnnotatedDataset& data, int trials,
                                          const RandomStream& stream) {
  if (trials < 2) throw ParamError("bias-variance estimate needs at least 2 trials");
  if (!data.bayes_probs) throw ParamError("bias-variance estimate requires annotated data");
  const std::size_t n = data.size();
  const auto l = static_cast<std::size_t>(data.num_classes);
  const auto t_count = static_cast<std::size_t>(trials);

  // Welford accumulators per (example, class).
  DenseMatrix mean_probs(n, l);
  DenseMatrix m2(n, l);
  Vec per_trial_mse(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    RandomStream rng = stream.derive(t);
    const TeacherOutput out = factory(rng);
    if (out.size() != n || out.num_classes() != l) {
      throw ParamError("teacher factory output shape does not match dataset");
    }
    per_trial_mse[t] = teacher_mse(out, data);
    const double k = static_cast<double>(t + 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < l; ++c) {
        const double v = out.probs(i, c);
        const double delta = v - mean_probs(i, c);
        mean_probs(i, c) += delta / k;
        m2(i, c) += delta * (v - mean_probs(i, c));
      }
    }
  }
  // The squared distance of the trial mean overstates the squared bias by
  // Var/T on average; subtracting it makes both terms unbiased and their sum
  // equal to the direct MSE.
  Vec bias_terms(n);
  Vec var_terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t c = 0; c < l; ++c) v += m2(i, c) / static_cast<double>(t_count - 1);
    var_terms[i] = v;
    bias_terms[i] = squared_distance(mean_probs.row(i), data.bayes_probs->row(i)) -
                    v / static_cast<double>(t_count);
  }
  TeacherBiasVariance r;
  r.bias_sq = mean(bias_terms);
  r.variance = mean(var_terms);
  r.mse_bound = r.bias_sq + r.variance;
  r.mse = mean(per_trial_mse);
  r.mse_stderr = std::sqrt(sample_variance(per_trial_mse) / static_cast<double>(t_count));
  return r;
}

}  // namespace distlab
