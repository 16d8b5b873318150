#include "distlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "distlab/error.hpp"

namespace distlab {

std::string_view to_string(RiskEstimatorKind kind) {
  switch (kind) {
    case RiskEstimatorKind::kOneHot: return "one_hot";
    case RiskEstimatorKind::kDistilled: return "distilled";
    case RiskEstimatorKind::kBayesDistilled: return "bayes_distilled";
    case RiskEstimatorKind::kDoubleDistilled: return "double_distilled";
  }
  return "unknown";
}

RiskEstimatorKind parse_risk_kind(std::string_view name) {
  if (name == "one_hot") return RiskEstimatorKind::kOneHot;
  if (name == "distilled") return RiskEstimatorKind::kDistilled;
  if (name == "bayes_distilled") return RiskEstimatorKind::kBayesDistilled;
  if (name == "double_distilled") return RiskEstimatorKind::kDoubleDistilled;
  throw ParamError("unknown loss kind '" + std::string(name) + "'");
}

std::string_view to_string(NegativeWeightScheme::Kind kind) {
  switch (kind) {
    case NegativeWeightScheme::Kind::kUniform: return "uniform";
    case NegativeWeightScheme::Kind::kOneMinusProb: return "one_minus_prob";
    case NegativeWeightScheme::Kind::kSigmoidLogit: return "sigmoid_logit";
  }
  return "unknown";
}

NegativeWeightScheme::Kind parse_scheme_kind(std::string_view name) {
  if (name == "uniform") return NegativeWeightScheme::Kind::kUniform;
  if (name == "one_minus_prob") return NegativeWeightScheme::Kind::kOneMinusProb;
  if (name == "sigmoid_logit") return NegativeWeightScheme::Kind::kSigmoidLogit;
  throw ParamError("unknown negative weight scheme '" + std::string(name) + "'");
}

namespace {

void check_label(int y, std::size_t num_classes) {
  if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
    throw ParamError("label " + std::to_string(y) + " out of range");
  }
}

// Weighted log-sum-exp: log sum_k w_k e^{f_k}, skipping zero weights.
double weighted_log_sum_exp(std::span<const double> f, std::span<const double> w) {
  if (w.size() != f.size()) throw ParamError("weight length does not match logits");
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (w[k] < 0.0) throw ParamError("negative weight");
    if (w[k] > 0.0) m = std::max(m, std::log(w[k]) + f[k]);
  }
  if (!std::isfinite(m)) throw ParamError("all-zero weight vector");
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (w[k] > 0.0) s += std::exp(std::log(w[k]) + f[k] - m);
  }
  return m + std::log(s);
}

// q_k = w_k e^{f_k} / sum_j w_j e^{f_j}
void tilted_softmax(std::span<const double> f, std::span<const double> w, std::span<double> q) {
  const double lse = weighted_log_sum_exp(f, w);
  for (std::size_t k = 0; k < f.size(); ++k) {
    q[k] = w[k] > 0.0 ? std::exp(std::log(w[k]) + f[k] - lse) : 0.0;
  }
}

void require_probs(const LossTarget& t, std::size_t num_classes, std::string_view kind) {
  if (t.probs.size() != num_classes) {
    throw ParamError(std::string(kind) + " loss requires target probabilities of length " +
                     std::to_string(num_classes));
  }
}

}  // namespace

double softmax_xent(int y, std::span<const double> f) {
  check_label(y, f.size());
  return log_sum_exp(f) - f[static_cast<std::size_t>(y)];
}

Vec loss_vector(std::span<const double> f) {
  const double lse = log_sum_exp(f);
  Vec out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = lse - f[k];
  return out;
}

double weighted_xent(std::span<const double> p, std::span<const double> f) {
  if (p.size() != f.size()) throw ParamError("probability and logit lengths differ");
  const double lse = log_sum_exp(f);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += p[k] * (lse - f[k]);
  return s;
}

double generalized_xent(int y, std::span<const double> f, std::span<const double> weights) {
  check_label(y, f.size());
  return weighted_log_sum_exp(f, weights) - f[static_cast<std::size_t>(y)];
}

Vec generalized_xent_gradient(int y, std::span<const double> f, std::span<const double> weights) {
  check_label(y, f.size());
  Vec g(f.size());
  tilted_softmax(f, weights, g);
  g[static_cast<std::size_t>(y)] -= 1.0;
  return g;
}

Vec negative_weights(const NegativeWeightScheme& scheme, std::span<const double> teacher_probs,
                     std::span<const double> teacher_logits) {
  const std::size_t l = teacher_probs.size();
  if (l == 0) throw ParamError("empty teacher distribution");
  Vec w(l);
  switch (scheme.kind) {
    case NegativeWeightScheme::Kind::kUniform:
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(l));
      return w;
    case NegativeWeightScheme::Kind::kOneMinusProb:
      for (std::size_t k = 0; k < l; ++k) w[k] = std::max(1.0 - teacher_probs[k], kProbFloor);
      break;
    case NegativeWeightScheme::Kind::kSigmoidLogit:
      if (!(scheme.scale_a > 0.0)) throw ParamError("sigmoid_logit scale must be > 0");
      if (teacher_logits.size() != l) throw ParamError("sigmoid_logit scheme requires teacher logits");
      for (std::size_t k = 0; k < l; ++k) {
        w[k] = std::max(1.0 - sigmoid(scheme.scale_a * teacher_logits[k]), kProbFloor);
      }
      break;
  }
  const double total = sum(w);
  for (double& v : w) v /= total;
  return w;
}

double double_distill_loss(std::span<const double> teacher_probs,
                           std::span<const double> teacher_logits, std::span<const double> f,
                           const NegativeWeightScheme& scheme) {
  if (teacher_probs.size() != f.size()) throw ParamError("teacher and logit lengths differ");
  const Vec w = negative_weights(scheme, teacher_probs, teacher_logits);
  const double lse = weighted_log_sum_exp(f, w);
  double s = 0.0;
  for (std::size_t y = 0; y < f.size(); ++y) s += teacher_probs[y] * (lse - f[y]);
  return s;
}

double example_loss(RiskEstimatorKind kind, const LossTarget& target, std::span<const double> f,
                    const NegativeWeightScheme& scheme) {
  switch (kind) {
    case RiskEstimatorKind::kOneHot:
      return softmax_xent(target.label, f);
    case RiskEstimatorKind::kDistilled:
    case RiskEstimatorKind::kBayesDistilled:
      require_probs(target, f.size(), to_string(kind));
      return weighted_xent(target.probs, f);
    case RiskEstimatorKind::kDoubleDistilled:
      require_probs(target, f.size(), to_string(kind));
      return double_distill_loss(target.probs, target.logits, f, scheme);
  }
  throw ParamError("unknown loss kind");
}

void loss_gradient_into(RiskEstimatorKind kind, const LossTarget& target,
                        std::span<const double> f, const NegativeWeightScheme& scheme,
                        std::span<double> out) {
  const std::size_t l = f.size();
  if (out.size() != l) throw ParamError("gradient buffer has wrong length");
  switch (kind) {
    case RiskEstimatorKind::kOneHot: {
      check_label(target.label, l);
      std::copy(f.begin(), f.end(), out.begin());
      softmax_inplace(out);
      out[static_cast<std::size_t>(target.label)] -= 1.0;
      return;
    }
    case RiskEstimatorKind::kDistilled:
    case RiskEstimatorKind::kBayesDistilled: {
      require_probs(target, l, to_string(kind));
      std::copy(f.begin(), f.end(), out.begin());
      softmax_inplace(out);
      for (std::size_t k = 0; k < l; ++k) out[k] -= target.probs[k];
      return;
    }
    case RiskEstimatorKind::kDoubleDistilled: {
      require_probs(target, l, to_string(kind));
      // sum_y p_y (q - e_y) = q * sum(p) - p
      const Vec w = negative_weights(scheme, target.probs, target.logits);
      tilted_softmax(f, w, out);
      const double mass = sum(target.probs);
      for (std::size_t k = 0; k < l; ++k) out[k] = out[k] * mass - target.probs[k];
      return;
    }
  }
  throw ParamError("unknown loss kind");
}

Vec loss_gradient(RiskEstimatorKind kind, const LossTarget& target, std::span<const double> f,
                  const NegativeWeightScheme& scheme) {
  Vec g(f.size());
  loss_gradient_into(kind, target, f, scheme, g);
  return g;
}

RiskEstimate make_risk_estimate(Vec terms) {
  if (terms.empty()) throw ParamError("risk estimate over no examples");
  RiskEstimate r;
  r.value = mean(terms);
  r.variance_defined = terms.size() >= 2;
  r.empirical_variance = sample_variance(terms);
  r.per_example_terms = std::move(terms);
  return r;
}

RiskEstimate empirical_risk_from_logits(RiskEstimatorKind kind, const BayesAnnotatedDataset& data,
                                        const DenseMatrix& logits, const TeacherOutput* teacher,
                                        const NegativeWeightScheme& scheme) {
  const std::size_t n = data.size();
  if (logits.rows() != n) throw ParamError("logit rows do not match dataset");
  const bool needs_teacher =
      kind == RiskEstimatorKind::kDistilled || kind == RiskEstimatorKind::kDoubleDistilled;
  if (needs_teacher && teacher == nullptr) {
    throw ParamError(std::string(to_string(kind)) + " risk requires a teacher");
  }
  if (needs_teacher && teacher->size() != n) throw ParamError("teacher rows do not match dataset");
  if (kind == RiskEstimatorKind::kBayesDistilled && !data.bayes_probs) {
    throw ParamError("bayes_distilled risk requires Bayes probabilities");
  }
  Vec terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    LossTarget t;
    t.label = data.labels[i];
    if (kind == RiskEstimatorKind::kBayesDistilled) {
      t.probs = data.bayes_probs->row(i);
    } else if (needs_teacher) {
      t.probs = teacher->probs.row(i);
      t.logits = teacher->logits.row(i);
    }
    terms[i] = example_loss(kind, t, logits.row(i), scheme);
  }
  return make_risk_estimate(std::move(terms));
}

RiskEstimate empirical_risk(RiskEstimatorKind kind, const BayesAnnotatedDataset& data,
                            const LogitPredictor& model, const TeacherOutput* teacher,
                            const NegativeWeightScheme& scheme) {
  return empirical_risk_from_logits(kind, data, predict_all_logits(model, data.features), teacher,
                                    scheme);
}

}  // namespace distlab
