#pragma once

// Teacher families. Each produces, for every example, a probability vector
// p^t(x) and logits s(x) with probs = softmax(logits).

#include <functional>
#include <span>
#include <vector>

#include "distlab/datagen.hpp"
#include "distlab/numkit.hpp"
#include "distlab/predictor.hpp"

namespace distlab {

struct TeacherOutput {
  DenseMatrix probs;   // N x L
  DenseMatrix logits;  // N x L

  std::size_t size() const noexcept { return probs.rows(); }
  std::size_t num_classes() const noexcept { return probs.cols(); }
};

struct TeacherParams {
  double alpha = 0.0;            // noisy-biased mix toward 1/2
  double sigma = 0.0;            // noisy-biased noise scale (enters as sigma^2)
  double smoothing_alpha = 0.0;  // label smoothing
  double distortion_alpha = 1.0; // calibration distortion exponent, >= 1
  double scale_a = 1.0;          // sigmoid-logit negative weighting scale
};

// Wraps probabilities; logits are the logs of clamped probabilities.
TeacherOutput teacher_from_probs(DenseMatrix probs);
// Wraps logits; probabilities are their row-wise softmax.
TeacherOutput teacher_from_logits(DenseMatrix logits);

TeacherOutput bayes_teacher(const BayesAnnotatedDataset& data);

// q = (1 - alpha) sigmoid(theta^T x + sigma^2 eps) + alpha / 2, with a fresh
// eps ~ N(0,1) per example on every call.
TeacherOutput noisy_biased_teacher(const BayesAnnotatedDataset& data, std::span<const double> theta,
                                   double alpha, double sigma, RandomStream& stream);

// Calibration-distorting map on [0,1]; fixes 1/2 and preserves the side of 1/2.
double distortion_psi(double u, double alpha);
TeacherOutput distorted_teacher(const BayesAnnotatedDataset& data, double distortion_alpha);

// (1 - alpha) e_y + alpha / L.
TeacherOutput label_smoothing_teacher(std::span<const int> labels, double smoothing_alpha,
                                      int num_classes);

// Teacher backed by a trained model. Holds a reference; the model must
// outlive the wrapper.
class LearnedTeacher {
 public:
  explicit LearnedTeacher(const LogitPredictor& model) : model_(&model) {}
  const LogitPredictor& model() const noexcept { return *model_; }
  TeacherOutput operator()(const DenseMatrix& features) const;

 private:
  const LogitPredictor* model_;
};

LearnedTeacher learned_teacher(const LogitPredictor& model);

// Mean over examples of ||p^t(x_n) - p*(x_n)||^2.
double teacher_mse(const TeacherOutput& teacher, const BayesAnnotatedDataset& data);

struct TeacherBiasVariance {
  double bias_sq = 0.0;     // mean_x ||E_t p^t(x) - p*(x)||^2, unbiased (may dip below 0)
  double variance = 0.0;    // mean_x sum_y Var_t[p^t_y(x)]
  double mse_bound = 0.0;   // bias_sq + variance
  double mse = 0.0;         // mean over trials of teacher_mse
  double mse_stderr = 0.0;  // standard error of `mse` across trials
};

using TeacherFactory = std::function<TeacherOutput(RandomStream&)>;

// Draws `trials` teacher realizations on a fixed dataset; trial t uses
// stream.derive(t).
TeacherBiasVariance teacher_bias_variance(const TeacherFactory& factory,
                                          const BayesAnnotatedDataset& data, int trials,
                                          const RandomStream& stream);

}  // namespace distlab
