#pragma once

// Evaluation metrics and Monte-Carlo statistics of risk estimators.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "distlab/datagen.hpp"
#include "distlab/losses.hpp"
#include "distlab/numkit.hpp"
#include "distlab/predictor.hpp"
#include "distlab/teachers.hpp"

namespace distlab {

struct MetricReport {
  std::map<std::string, double> values;
  std::size_t num_examples = 0;
  std::size_t num_classes = 0;
  std::size_t k = 0;
};

// Mann-Whitney AUC with midrank tie credit. labels are 0/1; throws
// ParamError("AUC undefined ...") when only one class is present.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

// Mean -log(clamped p_{y_n}).
double log_loss(const DenseMatrix& probs, std::span<const int> labels);

// Equal-width bins over (0,1] on top-label confidence; argmax ties go to the
// lowest index.
double ece(const DenseMatrix& probs, std::span<const int> labels, std::size_t num_bins = 15);

// Indices of the k largest scores, ordered by score then lowest index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

double precision_at_k(const DenseMatrix& scores, std::span<const int> labels, std::size_t k);
double top_k_loss(const DenseMatrix& scores, std::span<const int> labels, std::size_t k);

// Mean KL(p* || clamped p), with 0 log 0 = 0.
double kl_to_bayes(const DenseMatrix& probs, const DenseMatrix& bayes_probs);

// Fraction of examples whose argmax (lowest index on ties) is y_n.
double accuracy(const DenseMatrix& scores, std::span<const int> labels);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

// Cross-draw summary of one estimator.
struct EstimatorSummary {
  Vec values;         // one estimate per draw
  double mean = 0.0;
  double variance = 0.0;     // unbiased, across draws
  double mean_stderr = 0.0;
  double variance_stderr = 0.0;  // delta-method standard error of `variance`
};

EstimatorSummary summarize_estimates(Vec values);

// Standard error of var(a) - var(b) for paired draws.
double paired_variance_gap_stderr(const EstimatorSummary& a, const EstimatorSummary& b);

struct PopulationRisk {
  double value = 0.0;
  double stderr_ = 0.0;
};

using DatasetSampler = std::function<BayesAnnotatedDataset(std::size_t n, RandomStream&)>;
// Draws a teacher realization for a dataset (fresh randomness per call).
using TeacherDraw = std::function<TeacherOutput(const BayesAnnotatedDataset&, RandomStream&)>;

// R(f) = E_x[p*(x)^T loss(f(x))] from `samples` draws, in chunks.
PopulationRisk population_risk_mc(const LogitPredictor& predictor, const DatasetSampler& sampler,
                                  std::size_t samples, RandomStream& stream);

struct EstimatorStatistics {
  std::map<RiskEstimatorKind, EstimatorSummary> by_kind;
  PopulationRisk population;
};

// Draws `trials` samples of size n (draw t uses stream.derive(t)) and
// evaluates every requested estimator on the same draw. `teacher` is needed
// for distilled/double_distilled. population_samples = 0 skips the
// population-risk estimate.
EstimatorStatistics estimator_statistics(std::span<const RiskEstimatorKind> kinds,
                                         const LogitPredictor& predictor,
                                         const DatasetSampler& sampler, std::size_t n,
                                         int trials, const RandomStream& stream,
                                         const TeacherDraw& teacher = {},
                                         std::size_t population_samples = 0);

// Every quantity in the teacher bias-variance bound on the distilled risk.
struct BiasVarianceReport {
  double distilled_sq_error = 0.0;   // E[(R~ - R)^2]
  double distilled_sq_error_stderr = 0.0;
  double bayes_sq_error = 0.0;       // E[(R^* - R)^2]
  double bayes_sq_error_stderr = 0.0;
  double sq_error_gap_stderr = 0.0;  // stderr of the paired difference of the two above
  double loss_variance_over_n = 0.0; // V[p^t(x)^T loss(f(x))] / N
  double mean_teacher_distance = 0.0;  // E||p^t - p*||_2
  // Split of the teacher MSE, estimated on a fixed probe set of x's.
  double teacher_bias_sq = 0.0;      // E_x ||E p^t(x) - p*(x)||^2
  double teacher_variance = 0.0;     // E_x sum_y Var[p^t_y(x)]
  double teacher_probe_mse = 0.0;    // direct MSE on the probe set
  double teacher_probe_mse_stderr = 0.0;
  double teacher_mse = 0.0;          // E||p^t - p*||^2 over all evaluated x
  double loss_norm_bound = 0.0;      // C = max over evaluated x of ||loss(f(x))||_2
  double population_risk = 0.0;
  double population_risk_stderr = 0.0;

  // V/N + C^2 (E||p^t - p*||)^2
  double first_bound() const;
  // V/N + C^2 E||p^t - p*||^2 (= V/N + C^2 (bias^2 + variance))
  double second_bound() const;
  // E[(R~-R)^2] <= first_bound <= second_bound, the first step with
  // `slack_se` standard errors of slack.
  bool chain_holds(double slack_se = 3.0) const;
  // E[(R^*-R)^2] <= E[(R~-R)^2] within `slack_se` paired standard errors.
  bool unbiased_teacher_ordering_holds(double slack_se = 2.0) const;
};

struct BiasVarianceOptions {
  std::size_t n = 50;
  int trials = 2000;
  std::size_t population_samples = 1'000'000;
  std::size_t teacher_probe_points = 200;  // fixed x's for the teacher bias/variance split
  int teacher_probe_trials = 200;
};

BiasVarianceReport bias_variance_report(const TeacherDraw& teacher, const LogitPredictor& predictor,
                                        const DatasetSampler& sampler,
                                        const BiasVarianceOptions& options,
                                        const RandomStream& stream);

}  // namespace distlab
