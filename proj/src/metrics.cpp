#include "distlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distlab/error.hpp"

namespace distlab {

namespace {

// Average (1-based) ranks with ties sharing their midrank.
Vec midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  Vec ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::size_t argmax_lowest(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

void check_rows(const DenseMatrix& m, std::span<const int> labels) {
  if (m.rows() != labels.size()) throw ParamError("prediction rows do not match label count");
  if (m.rows() == 0) throw ParamError("no examples");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= m.cols()) throw ParamError("label out of range");
  }
}

void check_k(std::size_t k, std::size_t num_classes) {
  if (k < 1 || k > num_classes) {
    throw ParamError("k = " + std::to_string(k) + " must lie in [1, " + std::to_string(num_classes) + "]");
  }
}

bool in_top_k(std::span<const double> row, std::size_t label, std::size_t k) {
  // Rank of `label` under (score desc, index asc) ordering.
  std::size_t ahead = 0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] > row[label] || (row[c] == row[label] && c < label)) ++ahead;
  }
  return ahead < k;
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ParamError("score and label lengths differ");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ParamError("AUC labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ParamError("AUC undefined: need both positive and negative labels");
  const Vec ranks = midranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double log_loss(const DenseMatrix& probs, std::span<const int> labels) {
  check_rows(probs, labels);
  Vec terms(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    terms[i] = -safe_log(probs(i, static_cast<std::size_t>(labels[i])));
  }
  return mean(terms);
}

double ece(const DenseMatrix& probs, std::span<const int> labels, std::size_t num_bins) {
  if (num_bins < 1) throw ParamError("ECE needs at least one bin");
  check_rows(probs, labels);
  Vec conf_sum(num_bins, 0.0), hit_sum(num_bins, 0.0), count(num_bins, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = probs.row(i);
    const std::size_t pred = argmax_lowest(row);
    const double conf = row[pred];
    auto bin = static_cast<std::ptrdiff_t>(std::ceil(conf * static_cast<double>(num_bins))) - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(num_bins) - 1);
    conf_sum[static_cast<std::size_t>(bin)] += conf;
    hit_sum[static_cast<std::size_t>(bin)] += pred == static_cast<std::size_t>(labels[i]) ? 1.0 : 0.0;
    count[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double n = static_cast<double>(labels.size());
  double total = 0.0;
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (count[b] == 0.0) continue;
    total += (count[b] / n) * std::abs(hit_sum[b] / count[b] - conf_sum[b] / count[b]);
  }
  return total;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  check_k(k, scores.size());
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

double precision_at_k(const DenseMatrix& scores, std::span<const int> labels, std::size_t k) {
  check_rows(scores, labels);
  check_k(k, scores.cols());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += in_top_k(scores.row(i), static_cast<std::size_t>(labels[i]), k) ? 1 : 0;
  }
  return static_cast<double>(hits) / (static_cast<double>(k) * static_cast<double>(labels.size()));
}

double top_k_loss(const DenseMatrix& scores, std::span<const int> labels, std::size_t k) {
  check_rows(scores, labels);
  check_k(k, scores.cols());
  std::size_t misses = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    misses += in_top_k(scores.row(i), static_cast<std::size_t>(labels[i]), k) ? 0 : 1;
  }
  return static_cast<double>(misses) / static_cast<double>(labels.size());
}

double kl_to_bayes(const DenseMatrix& probs, const DenseMatrix& bayes_probs) {
  if (probs.rows() != bayes_probs.rows() || probs.cols() != bayes_probs.cols()) {
    throw ParamError("prediction and Bayes probability shapes differ");
  }
  if (probs.rows() == 0) throw ParamError("no examples");
  Vec terms(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double kl = 0.0;
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      const double p = bayes_probs(i, c);
      if (p > 0.0) kl += p * (std::log(p) - safe_log(probs(i, c)));
    }
    terms[i] = kl;
  }
  return mean(terms);
}

double accuracy(const DenseMatrix& scores, std::span<const int> labels) {
  check_rows(scores, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += argmax_lowest(scores.row(i)) == static_cast<std::size_t>(labels[i]) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ParamError("spearman needs two equal-length series");
  const Vec ra = midranks(a);
  const Vec rb = midranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

EstimatorSummary summarize_estimates(Vec values) {
  if (values.size() < 2) throw ParamError("estimator statistics need at least 2 draws");
  EstimatorSummary s;
  const double t = static_cast<double>(values.size());
  s.mean = mean(values);
  s.variance = sample_variance(values);
  s.mean_stderr = std::sqrt(s.variance / t);
  Vec sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - s.mean) * (values[i] - s.mean);
  s.variance_stderr = std::sqrt(sample_variance(sq) / t);
  s.values = std::move(values);
  return s;
}

double paired_variance_gap_stderr(const EstimatorSummary& a, const EstimatorSummary& b) {
  if (a.values.size() != b.values.size()) throw ParamError("paired summaries differ in length");
  Vec diff(a.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double da = a.values[i] - a.mean;
    const double db = b.values[i] - b.mean;
    diff[i] = da * da - db * db;
  }
  return std::sqrt(sample_variance(diff) / static_cast<double>(diff.size()));
}

PopulationRisk population_risk_mc(const LogitPredictor& predictor, const DatasetSampler& sampler,
                                  std::size_t samples, RandomStream& stream) {
  if (samples < 2) throw ParamError("population risk needs at least 2 samples");
  constexpr std::size_t kChunk = 10000;
  Vec chunk_sums;
  Vec chunk_sq;
  std::size_t done = 0;
  while (done < samples) {
    const std::size_t m = std::min(kChunk, samples - done);
    const BayesAnnotatedDataset data = sampler(m, stream);
    if (!data.bayes_probs) throw ParamError("population risk requires Bayes probabilities");
    const RiskEstimate r = empirical_risk(RiskEstimatorKind::kBayesDistilled, data, predictor);
    chunk_sums.push_back(sum(r.per_example_terms));
    Vec sq(r.per_example_terms.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = r.per_example_terms[i] * r.per_example_terms[i];
    chunk_sq.push_back(sum(sq));
    done += m;
  }
  const double n = static_cast<double>(samples);
  PopulationRisk out;
  out.value = sum(chunk_sums) / n;
  const double var = std::max(0.0, (sum(chunk_sq) - n * out.value * out.value) / (n - 1.0));
  out.stderr_ = std::sqrt(var / n);
  return out;
}

EstimatorStatistics estimator_statistics(std::span<const RiskEstimatorKind> kinds,
                                         const LogitPredictor& predictor,
                                         const DatasetSampler& sampler, std::size_t n, int trials,
                                         const RandomStream& stream, const TeacherDraw& teacher,
                                         std::size_t population_samples) {
  if (trials < 2) throw ParamError("estimator statistics need at least 2 trials");
  const bool needs_teacher = std::any_of(kinds.begin(), kinds.end(), [](RiskEstimatorKind k) {
    return k == RiskEstimatorKind::kDistilled || k == RiskEstimatorKind::kDoubleDistilled;
  });
  if (needs_teacher && !teacher) throw ParamError("distilled estimators require a teacher");

  std::map<RiskEstimatorKind, Vec> values;
  for (std::size_t t = 0; t < static_cast<std::size_t>(trials); ++t) {
    RandomStream rng = stream.derive(t);
    const BayesAnnotatedDataset data = sampler(n, rng);
    const DenseMatrix logits = predict_all_logits(predictor, data.features);
    TeacherOutput snapshot;
    if (needs_teacher) snapshot = teacher(data, rng);
    for (RiskEstimatorKind kind : kinds) {
      values[kind].push_back(
          empirical_risk_from_logits(kind, data, logits, needs_teacher ? &snapshot : nullptr).value);
    }
  }
  EstimatorStatistics out;
  for (auto& [kind, v] : values) out.by_kind.emplace(kind, summarize_estimates(std::move(v)));
  if (population_samples > 0) {
    RandomStream rng = stream.derive(~std::uint64_t{0});
    out.population = population_risk_mc(predictor, sampler, population_samples, rng);
  }
  return out;
}

double BiasVarianceReport::first_bound() const {
  return loss_variance_over_n +
         loss_norm_bound * loss_norm_bound * mean_teacher_distance * mean_teacher_distance;
}

double BiasVarianceReport::second_bound() const {
  return loss_variance_over_n + loss_norm_bound * loss_norm_bound * teacher_mse;
}

bool BiasVarianceReport::chain_holds(double slack_se) const {
  // Jensen's step compares pooled sample moments, so it holds up to rounding.
  return distilled_sq_error - slack_se * distilled_sq_error_stderr <= first_bound() &&
         first_bound() <= second_bound() * (1.0 + 1e-12);
}

bool BiasVarianceReport::unbiased_teacher_ordering_holds(double slack_se) const {
  return bayes_sq_error <= distilled_sq_error + slack_se * sq_error_gap_stderr;
}

BiasVarianceReport bias_variance_report(const TeacherDraw& teacher, const LogitPredictor& predictor,
                                        const DatasetSampler& sampler,
                                        const BiasVarianceOptions& options,
                                        const RandomStream& stream) {
  if (options.trials < 2) throw ParamError("bias-variance report needs at least 2 trials");
  if (!teacher) throw ParamError("bias-variance report requires a teacher");
  BiasVarianceReport r;
  {
    RandomStream rng = stream.derive(~std::uint64_t{0});
    const PopulationRisk pop = population_risk_mc(predictor, sampler, options.population_samples, rng);
    r.population_risk = pop.value;
    r.population_risk_stderr = pop.stderr_;
  }
  const auto trials = static_cast<std::size_t>(options.trials);
  Vec distilled_sq(trials), bayes_sq(trials), gap(trials);
  Vec pooled_terms, pooled_dist, pooled_dist_sq;
  pooled_terms.reserve(trials * options.n);
  double max_loss_norm = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rng = stream.derive(t);
    const BayesAnnotatedDataset data = sampler(options.n, rng);
    if (!data.bayes_probs) throw ParamError("bias-variance report requires Bayes probabilities");
    const TeacherOutput pt = teacher(data, rng);
    double distilled = 0.0, bayes = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Vec losses = loss_vector(predictor.predict_logits(data.features.row(i)));
      const double term = dot(pt.probs.row(i), losses);
      distilled += term;
      bayes += dot(data.bayes_probs->row(i), losses);
      pooled_terms.push_back(term);
      const double dist_sq = squared_distance(pt.probs.row(i), data.bayes_probs->row(i));
      pooled_dist_sq.push_back(dist_sq);
      pooled_dist.push_back(std::sqrt(dist_sq));
      max_loss_norm = std::max(max_loss_norm, std::sqrt(dot(losses, losses)));
    }
    const double nn = static_cast<double>(data.size());
    const double dr = distilled / nn - r.population_risk;
    const double br = bayes / nn - r.population_risk;
    distilled_sq[t] = dr * dr;
    bayes_sq[t] = br * br;
    gap[t] = distilled_sq[t] - bayes_sq[t];
  }
  const double tt = static_cast<double>(trials);
  r.distilled_sq_error = mean(distilled_sq);
  r.distilled_sq_error_stderr = std::sqrt(sample_variance(distilled_sq) / tt);
  r.bayes_sq_error = mean(bayes_sq);
  r.bayes_sq_error_stderr = std::sqrt(sample_variance(bayes_sq) / tt);
  r.sq_error_gap_stderr = std::sqrt(sample_variance(gap) / tt);
  r.loss_variance_over_n = sample_variance(pooled_terms) / static_cast<double>(options.n);
  r.mean_teacher_distance = mean(pooled_dist);
  r.teacher_mse = mean(pooled_dist_sq);
  r.loss_norm_bound = max_loss_norm;

  RandomStream probe_rng = stream.derive(~std::uint64_t{0} - 1);
  const BayesAnnotatedDataset probe = sampler(options.teacher_probe_points, probe_rng);
  const TeacherBiasVariance bv = teacher_bias_variance(
      [&](RandomStream& rng) { return teacher(probe, rng); }, probe, options.teacher_probe_trials,
      probe_rng.derive(1));
  r.teacher_bias_sq = bv.bias_sq;
  r.teacher_variance = bv.variance;
  r.teacher_probe_mse = bv.mse;
  r.teacher_probe_mse_stderr = bv.mse_stderr;
  return r;
}

}  // namespace distlab
