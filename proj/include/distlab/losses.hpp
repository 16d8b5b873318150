#pragma once

// Softmax cross-entropy family, the generalized (weighted-negative) softmax
// cross-entropy, double distillation, and the four empirical risk estimators.
// Gradients are with respect to the student logits f.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "distlab/datagen.hpp"
#include "distlab/numkit.hpp"
#include "distlab/predictor.hpp"
#include "distlab/teachers.hpp"

namespace distlab {

enum class RiskEstimatorKind { kOneHot, kDistilled, kBayesDistilled, kDoubleDistilled };

std::string_view to_string(RiskEstimatorKind kind);
RiskEstimatorKind parse_risk_kind(std::string_view name);

struct NegativeWeightScheme {
  enum class Kind { kUniform, kOneMinusProb, kSigmoidLogit };
  Kind kind = Kind::kUniform;
  double scale_a = 1.0;

  static NegativeWeightScheme uniform() { return {Kind::kUniform, 1.0}; }
  static NegativeWeightScheme one_minus_prob() { return {Kind::kOneMinusProb, 1.0}; }
  static NegativeWeightScheme sigmoid_logit(double a) { return {Kind::kSigmoidLogit, a}; }
};

std::string_view to_string(NegativeWeightScheme::Kind kind);
NegativeWeightScheme::Kind parse_scheme_kind(std::string_view name);

// -f_y + logsumexp(f).
double softmax_xent(int y, std::span<const double> f);
// Entry y is softmax_xent(y, f).
Vec loss_vector(std::span<const double> f);
// p^T loss_vector(f).
double weighted_xent(std::span<const double> p, std::span<const double> f);
// log sum_k P_k exp(f_k - f_y). May be negative.
double generalized_xent(int y, std::span<const double> f, std::span<const double> weights);

// Normalized negative weights (sum 1, entries floored at kProbFloor before
// normalization). `teacher_logits` is only read by the sigmoid-logit scheme.
Vec negative_weights(const NegativeWeightScheme& scheme, std::span<const double> teacher_probs,
                     std::span<const double> teacher_logits);

// sum_y p^t_y generalized_xent(y, f, w) with one shared weight vector w.
double double_distill_loss(std::span<const double> teacher_probs,
                           std::span<const double> teacher_logits, std::span<const double> f,
                           const NegativeWeightScheme& scheme);

// Per-example supervision. `label` is read by one_hot; `probs` by
// distilled/bayes_distilled/double_distilled (teacher or Bayes targets);
// `logits` by double_distilled.
struct LossTarget {
  int label = -1;
  std::span<const double> probs;
  std::span<const double> logits;
};

double example_loss(RiskEstimatorKind kind, const LossTarget& target, std::span<const double> f,
                    const NegativeWeightScheme& scheme = {});

// Gradient of example_loss with respect to f.
Vec loss_gradient(RiskEstimatorKind kind, const LossTarget& target, std::span<const double> f,
                  const NegativeWeightScheme& scheme = {});
// Writes the gradient into `out` (sized f.size()) without allocating beyond
// scratch for the double-distilled weights.
void loss_gradient_into(RiskEstimatorKind kind, const LossTarget& target,
                        std::span<const double> f, const NegativeWeightScheme& scheme,
                        std::span<double> out);

// Gradient of generalized_xent(y, f, weights): q - e_y with q the
// weight-tilted softmax.
Vec generalized_xent_gradient(int y, std::span<const double> f, std::span<const double> weights);

struct RiskEstimate {
  double value = 0.0;
  Vec per_example_terms;
  double empirical_variance = 0.0;
  // False when there is a single term and the variance is undefined (reported as 0).
  bool variance_defined = false;
};

RiskEstimate make_risk_estimate(Vec terms);

// Estimator evaluated on precomputed student logits (N x L). `teacher` is
// required for distilled/double_distilled; bayes_distilled reads p* from
// `data`.
RiskEstimate empirical_risk_from_logits(RiskEstimatorKind kind, const BayesAnnotatedDataset& data,
                                        const DenseMatrix& logits,
                                        const TeacherOutput* teacher = nullptr,
                                        const NegativeWeightScheme& scheme = {});

RiskEstimate empirical_risk(RiskEstimatorKind kind, const BayesAnnotatedDataset& data,
                            const LogitPredictor& model, const TeacherOutput* teacher = nullptr,
                            const NegativeWeightScheme& scheme = {});

}  // namespace distlab
