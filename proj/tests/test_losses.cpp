#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "distlab/datagen.hpp"
#include "distlab/error.hpp"
#include "distlab/losses.hpp"
#include "distlab/models.hpp"
#include "distlab/teachers.hpp"

using namespace distlab;

namespace {

Vec random_logits(RandomStream& s, std::size_t L, double scale = 3.0) {
  Vec f(L);
  for (double& v : f) v = s.normal(0.0, scale);
  return f;
}

Vec random_probs(RandomStream& s, std::size_t L) {
  Vec p(L);
  for (double& v : p) v = s.uniform_open();
  const double z = sum(p);
  for (double& v : p) v /= z;
  return p;
}

// Central differences of a scalar function of f.
template <typename F>
Vec numeric_gradient(F&& fn, Vec f, double eps = 1e-5) {
  Vec g(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double keep = f[k];
    f[k] = keep + eps;
    const double up = fn(f);
    f[k] = keep - eps;
    const double down = fn(f);
    f[k] = keep;
    g[k] = (up - down) / (2.0 * eps);
  }
  return g;
}

double rel_err(const Vec& a, const Vec& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]) / std::max({std::abs(a[k]), std::abs(b[k]), 1e-4}));
  }
  return worst;
}

// Direct evaluation of log sum_k P_k exp(f_k - f_y) in long double.
double generalized_reference(int y, const Vec& f, const Vec& P) {
  long double s = 0.0L;
  for (std::size_t k = 0; k < f.size(); ++k) {
    s += static_cast<long double>(P[k]) * std::exp(static_cast<long double>(f[k]) - f[y]);
  }
  return static_cast<double>(std::log(s));
}

}  // namespace

TEST(SoftmaxXent, Values) {
  EXPECT_NEAR(softmax_xent(0, Vec{0.0, 0.0}), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(softmax_xent(0, Vec{1.0, 0.0}), std::log1p(std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(softmax_xent(0, Vec{1.0, 0.0}), 0.313262, 1e-6);
  for (double c : {-50.0, 0.0, 3.5}) EXPECT_NEAR(softmax_xent(2, Vec{c, c, c, c, c}), std::log(5.0), 1e-12);
}

TEST(SoftmaxXent, NonNegativeAndRangeChecked) {
  RandomStream s(1, 0);
  for (int t = 0; t < 200; ++t) {
    const Vec f = random_logits(s, 4, 10.0);
    for (int y = 0; y < 4; ++y) EXPECT_GE(softmax_xent(y, f), 0.0);
  }
  EXPECT_THROW(softmax_xent(2, Vec{0.0, 0.0}), ParamError);
  EXPECT_THROW(softmax_xent(-1, Vec{0.0, 0.0}), ParamError);
}

TEST(LossVector, Values) {
  const Vec a = loss_vector(Vec{0.0, 0.0});
  EXPECT_NEAR(a[0], std::numbers::ln2, 1e-15);
  EXPECT_NEAR(a[1], std::numbers::ln2, 1e-15);
  const Vec b = loss_vector(Vec{1.0, 0.0});
  EXPECT_NEAR(b[0], std::log1p(std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(b[1], std::log1p(std::exp(1.0)), 1e-15);
}

TEST(LossVector, MinimumAtArgmax) {
  RandomStream s(2, 0);
  for (int t = 0; t < 200; ++t) {
    const Vec f = random_logits(s, 6);
    const Vec l = loss_vector(f);
    EXPECT_EQ(std::min_element(l.begin(), l.end()) - l.begin(), std::max_element(f.begin(), f.end()) - f.begin());
  }
}

TEST(WeightedXent, Reductions) {
  RandomStream s(3, 0);
  const Vec f = random_logits(s, 3);
  EXPECT_NEAR(weighted_xent(Vec{0.0, 1.0, 0.0}, f), softmax_xent(1, f), 1e-14);
  EXPECT_NEAR(weighted_xent(Vec{0.5, 0.5}, Vec{0.0, 0.0}), std::numbers::ln2, 1e-15);
  EXPECT_THROW(weighted_xent(Vec{0.5, 0.5}, Vec{0.0, 0.0, 0.0}), ParamError);
}

TEST(WeightedXent, EqualsKlPlusEntropy) {
  RandomStream s(4, 0);
  for (int t = 0; t < 100; ++t) {
    const Vec p = random_probs(s, 5);
    const Vec f = random_logits(s, 5);
    const Vec q = softmax(f);
    double kl = 0.0, h = 0.0;
    for (std::size_t y = 0; y < 5; ++y) {
      kl += p[y] * std::log(p[y] / q[y]);
      h -= p[y] * std::log(p[y]);
    }
    EXPECT_NEAR(weighted_xent(p, f), kl + h, 1e-12);
  }
}

TEST(GeneralizedXent, Values) {
  EXPECT_NEAR(generalized_xent(0, Vec{0.0, 0.0}, Vec{0.5, 0.5}), 0.0, 1e-15);
  RandomStream s(5, 0);
  const Vec f = random_logits(s, 4);
  EXPECT_NEAR(generalized_xent(2, f, Vec{0.0, 0.0, 1.0, 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(generalized_xent(0, Vec{1.0, 0.0}, Vec{0.0, 1.0}), -1.0, 1e-15);
  EXPECT_THROW(generalized_xent(0, Vec{1.0, 0.0}, Vec{0.0, 0.0}), ParamError);
}

TEST(GeneralizedXent, UniformIsShiftedSoftmaxXent) {
  RandomStream s(6, 0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t L = 2 + s.uniform_index(9);
    const Vec f = random_logits(s, L, 5.0);
    const Vec P(L, 1.0 / static_cast<double>(L));
    const int y = static_cast<int>(s.uniform_index(L));
    EXPECT_NEAR(generalized_xent(y, f, P), softmax_xent(y, f) - std::log(static_cast<double>(L)), 1e-12);
  }
}

TEST(GeneralizedXent, MatchesExtendedPrecision) {
  RandomStream s(7, 0);
  for (int t = 0; t < 300; ++t) {
    const Vec f = random_logits(s, 6, 4.0);
    const Vec P = random_probs(s, 6);
    const int y = static_cast<int>(s.uniform_index(6));
    EXPECT_NEAR(generalized_xent(y, f, P), generalized_reference(y, f, P), 1e-12);
  }
}

TEST(NegativeWeights, Schemes) {
  const Vec u = negative_weights(NegativeWeightScheme::uniform(), Vec{0.1, 0.2, 0.3, 0.4}, Vec(4, 0.0));
  for (double w : u) EXPECT_DOUBLE_EQ(w, 0.25);
  const Vec o = negative_weights(NegativeWeightScheme::one_minus_prob(), Vec{1.0, 0.0}, Vec{0.0, -27.0});
  EXPECT_NEAR(o[0], 0.0, 1e-11);
  EXPECT_NEAR(o[1], 1.0, 1e-11);
  EXPECT_GT(o[0], 0.0);
  const Vec g = negative_weights(NegativeWeightScheme::sigmoid_logit(1.0), Vec{0.5, 0.5}, Vec{0.0, 0.0});
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(NegativeWeights, SigmoidLogitFormula) {
  const Vec logits{2.0, -1.0, 0.5};
  const double a = 1.7;
  const Vec w = negative_weights(NegativeWeightScheme::sigmoid_logit(a), softmax(logits), logits);
  Vec expect(3);
  for (std::size_t y = 0; y < 3; ++y) expect[y] = 1.0 - 1.0 / (1.0 + std::exp(-a * logits[y]));
  const double z = expect[0] + expect[1] + expect[2];
  for (std::size_t y = 0; y < 3; ++y) EXPECT_NEAR(w[y], expect[y] / z, 1e-15);
}

TEST(NegativeWeights, NeverAllZero) {
  const Vec w = negative_weights(NegativeWeightScheme::sigmoid_logit(5.0), Vec{0.5, 0.5}, Vec{500.0, 500.0});
  EXPECT_NEAR(w[0] + w[1], 1.0, 1e-15);
  EXPECT_GT(w[0], 0.0);
}

TEST(DoubleDistill, Reductions) {
  RandomStream s(8, 0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t L = 2 + s.uniform_index(6);
    const Vec f = random_logits(s, L);
    const int y = static_cast<int>(s.uniform_index(L));
    Vec e(L, 0.0);
    e[y] = 1.0;
    Vec logits(L);
    for (std::size_t k = 0; k < L; ++k) logits[k] = safe_log(e[k]);
    EXPECT_NEAR(double_distill_loss(e, logits, f, NegativeWeightScheme::uniform()),
                softmax_xent(y, f) - std::log(static_cast<double>(L)), 1e-12);
  }
  const Vec uni(5, 0.2);
  EXPECT_NEAR(double_distill_loss(uni, Vec(5, 0.0), Vec(5, 1.3), NegativeWeightScheme::uniform()), 0.0, 1e-15);
  EXPECT_NEAR(double_distill_loss(Vec{0.5, 0.5}, Vec{0.0, 0.0}, Vec{0.0, 0.0}, NegativeWeightScheme::uniform()),
              0.0, 1e-15);
}

TEST(DoubleDistill, MatchesUnrolledSum) {
  RandomStream s(9, 0);
  for (int t = 0; t < 100; ++t) {
    const Vec logits = random_logits(s, 5);
    const Vec p = softmax(logits);
    const Vec f = random_logits(s, 5);
    const auto scheme = NegativeWeightScheme::sigmoid_logit(0.7);
    const Vec w = negative_weights(scheme, p, logits);
    double expect = 0.0;
    for (int y = 0; y < 5; ++y) expect += p[y] * generalized_reference(y, f, w);
    EXPECT_NEAR(double_distill_loss(p, logits, f, scheme), expect, 1e-12);
  }
}

TEST(DoubleDistill, LinearInTeacherProbs) {
  RandomStream s(10, 0);
  for (int t = 0; t < 100; ++t) {
    const Vec f = random_logits(s, 4);
    const Vec a = random_probs(s, 4);
    const Vec b = random_probs(s, 4);
    const double lam = s.uniform();
    Vec mix(4);
    for (std::size_t k = 0; k < 4; ++k) mix[k] = lam * a[k] + (1.0 - lam) * b[k];
    // Weights fixed by the uniform scheme, so only the positive mixture varies.
    const auto scheme = NegativeWeightScheme::uniform();
    const Vec zero(4, 0.0);
    EXPECT_NEAR(double_distill_loss(mix, zero, f, scheme),
                lam * double_distill_loss(a, zero, f, scheme) + (1.0 - lam) * double_distill_loss(b, zero, f, scheme),
                1e-9);
  }
}

TEST(Gradients, ClosedFormCases) {
  const Vec g = loss_gradient(RiskEstimatorKind::kOneHot, {0, {}, {}}, Vec{0.0, 0.0});
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
  const Vec f{0.3, -1.2, 2.0};
  const Vec p = softmax(f);
  for (double v : loss_gradient(RiskEstimatorKind::kDistilled, {-1, p, {}}, f)) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_THROW(loss_gradient(RiskEstimatorKind::kDistilled, {0, {}, {}}, f), ParamError);
  EXPECT_THROW(loss_gradient(RiskEstimatorKind::kOneHot, {-1, {}, {}}, f), ParamError);
}

TEST(Gradients, FiniteDifferencesAllKinds) {
  RandomStream s(11, 0);
  const NegativeWeightScheme schemes[] = {NegativeWeightScheme::uniform(), NegativeWeightScheme::one_minus_prob(),
                                          NegativeWeightScheme::sigmoid_logit(1.0)};
  for (int t = 0; t < 100; ++t) {
    const std::size_t L = 5;
    const Vec f = random_logits(s, L);
    const Vec tl = random_logits(s, L);
    const Vec tp = softmax(tl);
    const int y = static_cast<int>(s.uniform_index(L));
    const LossTarget target{y, tp, tl};
    for (auto kind : {RiskEstimatorKind::kOneHot, RiskEstimatorKind::kDistilled, RiskEstimatorKind::kBayesDistilled,
                      RiskEstimatorKind::kDoubleDistilled}) {
      for (const auto& scheme : schemes) {
        const Vec analytic = loss_gradient(kind, target, f, scheme);
        const Vec numeric = numeric_gradient([&](const Vec& g) { return example_loss(kind, target, g, scheme); }, f);
        EXPECT_LT(rel_err(analytic, numeric), 1e-4) << to_string(kind);
      }
    }
    Vec P = random_probs(s, L);
    const Vec ga = generalized_xent_gradient(y, f, P);
    const Vec gn = numeric_gradient([&](const Vec& g) { return generalized_xent(y, g, P); }, f);
    EXPECT_LT(rel_err(ga, gn), 1e-4);
  }
}

TEST(Gradients, SumToZeroAndShiftInvariant) {
  RandomStream s(12, 0);
  for (int t = 0; t < 100; ++t) {
    const Vec f = random_logits(s, 4);
    Vec shifted = f;
    const double c = s.normal(0.0, 10.0);
    for (double& v : shifted) v += c;
    const Vec tl = random_logits(s, 4);
    const Vec tp = softmax(tl);
    const LossTarget target{1, tp, tl};
    const auto scheme = NegativeWeightScheme::sigmoid_logit(2.0);
    for (auto kind : {RiskEstimatorKind::kOneHot, RiskEstimatorKind::kDistilled, RiskEstimatorKind::kDoubleDistilled}) {
      const Vec g = loss_gradient(kind, target, f, scheme);
      EXPECT_NEAR(sum(g), 0.0, 1e-9);
      EXPECT_NEAR(example_loss(kind, target, shifted, scheme), example_loss(kind, target, f, scheme), 1e-9);
      const Vec gs = loss_gradient(kind, target, shifted, scheme);
      for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(gs[k], g[k], 1e-9);
    }
  }
}

TEST(Gradients, UniformDoubleEqualsDistilled) {
  RandomStream s(13, 0);
  for (int t = 0; t < 200; ++t) {
    const Vec f = random_logits(s, 6);
    const Vec tl = random_logits(s, 6);
    const Vec tp = softmax(tl);
    const LossTarget target{-1, tp, tl};
    const Vec a = loss_gradient(RiskEstimatorKind::kDoubleDistilled, target, f, NegativeWeightScheme::uniform());
    const Vec b = loss_gradient(RiskEstimatorKind::kDistilled, target, f);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(EmpiricalRisk, DegenerateBayesEqualsOneHot) {
  SyntheticSpec spec;
  spec.sample_count = 30;
  RandomStream s(14, 0);
  auto d = gen_two_gaussians(spec, s);
  DenseMatrix onehot(d.size(), 2);
  for (std::size_t i = 0; i < d.size(); ++i) onehot(i, static_cast<std::size_t>(d.labels[i])) = 1.0;
  d.bayes_probs = onehot;
  LinearModel m(10, 2);
  init_params(m, s);
  const auto a = empirical_risk(RiskEstimatorKind::kOneHot, d, m);
  const auto b = empirical_risk(RiskEstimatorKind::kBayesDistilled, d, m);
  EXPECT_DOUBLE_EQ(a.value, b.value);
  EXPECT_EQ(a.per_example_terms, b.per_example_terms);
  EXPECT_TRUE(a.variance_defined);
  EXPECT_NEAR(a.empirical_variance, sample_variance(a.per_example_terms), 1e-15);
  EXPECT_NEAR(a.value, mean(a.per_example_terms), 1e-15);
}

TEST(EmpiricalRisk, SingleExample) {
  const auto r = make_risk_estimate(Vec{0.7});
  EXPECT_EQ(r.value, 0.7);
  EXPECT_EQ(r.empirical_variance, 0.0);
  EXPECT_FALSE(r.variance_defined);
}

TEST(EmpiricalRisk, MissingTargetsFail) {
  SyntheticSpec spec;
  spec.sample_count = 5;
  RandomStream s(15, 0);
  auto d = gen_two_gaussians(spec, s);
  LinearModel m(10, 2);
  EXPECT_THROW(empirical_risk(RiskEstimatorKind::kDistilled, d, m), Error);
  EXPECT_THROW(empirical_risk(RiskEstimatorKind::kDoubleDistilled, d, m), Error);
  d.bayes_probs.reset();
  EXPECT_THROW(empirical_risk(RiskEstimatorKind::kBayesDistilled, d, m), Error);
}

TEST(EmpiricalRisk, SinglePointBernoulliVariance) {
  // One support point, p* = (1/2, 1/2), loss vector (0, 1): a one-hot term
  // is 0 or 1 with equal odds, the Bayes term is always 1/2.
  const Vec p{0.5, 0.5};
  const Vec losses{0.0, 1.0};
  RandomStream s(16, 0);
  Vec one_hot, bayes;
  for (int t = 0; t < 20000; ++t) {
    one_hot.push_back(losses[s.categorical(p)]);
    bayes.push_back(dot(p, losses));
  }
  EXPECT_NEAR(sample_variance(one_hot), 0.25, 0.01);
  EXPECT_EQ(sample_variance(bayes), 0.0);
}

TEST(RiskKinds, RoundTrip) {
  for (auto k : {RiskEstimatorKind::kOneHot, RiskEstimatorKind::kDistilled, RiskEstimatorKind::kBayesDistilled,
                 RiskEstimatorKind::kDoubleDistilled}) {
    EXPECT_EQ(parse_risk_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_risk_kind("bogus"), ParamError);
  EXPECT_EQ(parse_scheme_kind("sigmoid_logit"), NegativeWeightScheme::Kind::kSigmoidLogit);
}
