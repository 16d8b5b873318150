#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "distlab/config.hpp"
#include "distlab/error.hpp"
#include "distlab/experiments.hpp"
#include "distlab/metrics.hpp"

using namespace distlab;

namespace {

std::string csv(const ResultTable& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

ExperimentConfig quick(std::string_view text) { return parse_config_text(text); }

std::set<std::string> metric_names(const ResultTable& t) {
  std::set<std::string> names;
  for (const auto& r : t.rows) names.insert(r.metric);
  return names;
}

std::string expect_config_error(std::string_view text) {
  try {
    ExperimentConfig c = parse_config_text(text);
    validate(c);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for " << text;
  return {};
}

}  // namespace

TEST(Config, DefaultsValidateForEveryExperiment) {
  for (auto name : experiment_names()) {
    const ExperimentConfig c = default_config(parse_experiment(name));
    EXPECT_NO_THROW(validate(c)) << name;
    EXPECT_EQ(to_string(c.experiment), name);
  }
}

TEST(Config, JsonRoundTrip) {
  for (auto name : experiment_names()) {
    const ExperimentConfig c = default_config(parse_experiment(name));
    const auto j = to_json(c);
    EXPECT_EQ(to_json(parse_config(j)).dump(), j.dump()) << name;
  }
}

TEST(Config, StrictKeys) {
  EXPECT_NE(expect_config_error(R"({"experiment":"distortion","teacher":{"alhpa":0.1}})").find("teacher.alhpa"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"experiment":"distortion","bogus":1})").find("bogus"), std::string::npos);
  EXPECT_NE(expect_config_error(R"({"experiment":"distortion","sweep":{"learningrate":[1]}})")
                .find("unknown sweep key 'learningrate'"),
            std::string::npos);
  const std::string msg = expect_config_error(R"({"experiment":"nope"})");
  EXPECT_NE(msg.find("unknown experiment"), std::string::npos);
  EXPECT_NE(msg.find("bayes_vs_onehot"), std::string::npos);
}

TEST(Config, RangeChecks) {
  expect_config_error(R"({"experiment":"distortion","trials":0})");
  expect_config_error(R"({"experiment":"distortion","teacher":{"distortion_alpha":0.5}})");
  expect_config_error(R"({"experiment":"bias_variance_grid","teacher":{"alpha":1.5}})");
  expect_config_error(R"({"experiment":"tree_depth","generator":{"kind":"two_gaussians"}})");
  expect_config_error(R"({"experiment":"distortion","train":{"learning_rate":-1}})");
  expect_config_error(R"({"experiment":"distortion","sweep":{"distortion_alpha":[]}})");
}

TEST(Sweep, GridOrderFirstKeySlowest) {
  const auto c = quick(R"({"experiment":"bias_variance_grid","sweep":{"alpha":[0,0.5],"sigma":[1,2,3]}})");
  const auto grid = sweep_grid(c);
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_EQ(grid[0], (std::vector<double>{0, 1}));
  EXPECT_EQ(grid[2], (std::vector<double>{0, 3}));
  EXPECT_EQ(grid[3], (std::vector<double>{0.5, 1}));
  const auto r = resolve_point(c, grid[4]);
  EXPECT_EQ(r.teacher.alpha, 0.5);
  EXPECT_EQ(r.teacher.sigma, 2.0);
}

TEST(Sweep, SeedsKeyedOnData) {
  const auto c = default_config(ExperimentKind::kBiasVarianceGrid);
  const auto grid = sweep_grid(c);
  const auto a = resolve_point(c, grid[0]);
  const auto b = resolve_point(c, grid.back());
  EXPECT_EQ(trial_seed(a, 3), trial_seed(b, 3));
  EXPECT_NE(trial_seed(a, 3), trial_seed(a, 4));
  auto n = a;
  apply_parameter(n, "sample_count", 40);
  EXPECT_NE(trial_seed(n, 3), trial_seed(a, 3));
}

TEST(BayesVsOneHot, RowCountAndHeader) {
  const auto c = quick(R"({"experiment":"bayes_vs_onehot","test_size":200,"train":{"epochs":3}})");
  const ResultTable t = run_experiment(c, 2);
  EXPECT_EQ(t.rows.size(), 1000u);
  EXPECT_EQ(metric_names(t), (std::set<std::string>{"auc_one_hot", "auc_bayes_distilled"}));
  const std::string text = csv(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "experiment,sample_count,trial,seed,metric,value");
  for (const auto& r : t.rows) {
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
  }
}

TEST(Runner, IndependentOfJobCount) {
  const auto c = quick(
      R"({"experiment":"class_separation","trials":6,"test_size":300,"train":{"epochs":10},
          "sweep":{"separation":[0.5,2]}})");
  EXPECT_EQ(csv(run_experiment(c, 1)), csv(run_experiment(c, 3)));
}

TEST(Runner, MetricValuesSelectsPoint) {
  const auto c = quick(
      R"({"experiment":"class_separation","trials":4,"test_size":300,"train":{"epochs":10},
          "sweep":{"separation":[0.5,4]}})");
  const auto t = run_experiment(c, 1);
  const auto lo = metric_values(t, {0.5}, "auc_one_hot");
  const auto hi = metric_values(t, {4.0}, "auc_one_hot");
  ASSERT_EQ(lo.size(), 4u);
  ASSERT_EQ(hi.size(), 4u);
  EXPECT_GT(mean(hi), mean(lo));
}

TEST(Distortion, MetricsAndAgreement) {
  const auto c = quick(
      R"({"experiment":"distortion","trials":3,"test_size":500,"train":{"epochs":10},
          "sweep":{"distortion_alpha":[1,4]}})");
  const auto t = run_experiment(c, 1);
  EXPECT_EQ(t.rows.size(), 2u * 3u * 3u);
  for (double a : {1.0, 4.0}) {
    for (double v : metric_values(t, {a}, "teacher_argmax_agreement")) EXPECT_EQ(v, 1.0);
  }
  for (double v : metric_values(t, {1.0}, "teacher_mse")) EXPECT_EQ(v, 0.0);
}

TEST(BiasVarianceGrid, Metrics) {
  const auto c = quick(
      R"({"experiment":"bias_variance_grid","trials":2,"test_size":300,"train":{"epochs":5},
          "sweep":{"alpha":[0,0.6],"sigma":[0]}})");
  const auto t = run_experiment(c, 1);
  EXPECT_EQ(metric_names(t), (std::set<std::string>{"teacher_mse", "student_auc"}));
  for (double v : metric_values(t, {0, 0}, "teacher_mse")) EXPECT_EQ(v, 0.0);
  for (double v : metric_values(t, {0.6, 0}, "teacher_mse")) EXPECT_GT(v, 0.0);
}

TEST(TreeDepth, TrainMseNonIncreasing) {
  const auto c = quick(R"({"experiment":"tree_depth","trials":5,"test_size":500})");
  const auto t = run_experiment(c, 1);
  EXPECT_EQ(t.rows.size(), 5u * 5u * 3u);
  const double depths[] = {1, 2, 4, 8, 16};
  for (std::size_t trial = 0; trial < 5; ++trial) {
    double prev = 1.0;
    for (double d : depths) {
      const double v = metric_values(t, {d}, "teacher_train_mse")[trial];
      EXPECT_LE(v, prev + 1e-15);
      prev = v;
    }
  }
}

TEST(VarianceCheck, AnalyticPoint) {
  const auto exact = single_point_variance_exact(Vec{0.5, 0.5}, Vec{0.0, 1.0}, 1);
  EXPECT_EQ(exact.one_hot, 0.25);
  EXPECT_EQ(exact.bayes_distilled, 0.0);
  RandomStream s(1, 0);
  const auto mc = single_point_variance_mc(Vec{0.5, 0.5}, Vec{0.0, 1.0}, 1, 20000, s);
  EXPECT_NEAR(mc.one_hot, 0.25, 0.01);
  EXPECT_EQ(mc.bayes_distilled, 0.0);

  const auto c = quick(
      R"({"experiment":"variance_check","trials":1,"generator":{"sample_count":1},
          "estimator":{"predictor":"analytic_point","draws":5000}})");
  const auto t = run_experiment(c, 1);
  EXPECT_EQ(metric_values(t, {}, "var_one_hot_exact")[0], 0.25);
  EXPECT_EQ(metric_values(t, {}, "var_bayes_distilled_exact")[0], 0.0);
}

TEST(VarianceCheck, NearBayesRows) {
  const auto c = quick(
      R"({"experiment":"variance_check","trials":2,
          "estimator":{"draws":300,"population_samples":20000,"probe_points":30,"probe_trials":30}})");
  const auto t = run_experiment(c, 1);
  const auto names = metric_names(t);
  for (const char* m : {"var_one_hot", "var_bayes_distilled", "var_distilled", "first_bound", "second_bound",
                        "chain_holds", "prop4_holds", "population_risk"}) {
    EXPECT_TRUE(names.count(m)) << m;
  }
  for (double v : metric_values(t, {}, "chain_holds")) EXPECT_EQ(v, 1.0);
}

TEST(DoubleDistill, SmallSyntheticRun) {
  const auto c = quick(
      R"({"experiment":"double_distill","trials":2,"test_size":400,
          "generator":{"num_classes":10,"sample_count":300},
          "train":{"epochs":3},"retrieval":{"scale_a_values":[1]}})");
  const auto t = run_experiment(c, 1);
  const auto names = metric_names(t);
  for (const char* arm : {"one_hot", "distilled", "double_distilled_a1"}) {
    for (const std::string prefix : {"p_at_1_", "p_at_3_", "p_at_5_", "top_k_loss_1_", "p_at_L_"}) {
      EXPECT_TRUE(names.count(prefix + arm)) << prefix + arm;
    }
    for (double v : metric_values(t, {}, std::string("p_at_L_") + arm)) EXPECT_DOUBLE_EQ(v, 0.1);
    const auto p3 = metric_values(t, {}, std::string("p_at_3_") + arm);
    const auto l3 = metric_values(t, {}, std::string("top_k_loss_3_") + arm);
    for (std::size_t i = 0; i < p3.size(); ++i) EXPECT_NEAR(l3[i], 1.0 - 3.0 * p3[i], 1e-12);
  }
}

TEST(DoubleDistill, IngestedMultilabelFile) {
  const auto path = std::filesystem::temp_directory_path() / "distlab_test_multilabel.txt";
  {
    std::ofstream out(path);
    out << "60 4 6\n";
    RandomStream s(2, 0);
    for (int i = 0; i < 60; ++i) {
      const int a = static_cast<int>(s.uniform_index(6));
      const int b = (a + 1) % 6;
      out << a << "," << b;
      for (int j = 0; j < 4; ++j) out << " " << j << ":" << format_number(s.normal() + (j == a % 4 ? 2.0 : 0.0));
      out << "\n";
    }
  }
  auto j = nlohmann::ordered_json::parse(
      R"({"experiment":"double_distill","trials":1,"train":{"epochs":2},
          "retrieval":{"scale_a_values":[1],"teacher_epochs":2,"teacher_hidden":4}})");
  j["retrieval"]["data_path"] = path.string();
  const auto c = parse_config(j);
  const auto t = run_experiment(c, 1);
  EXPECT_FALSE(t.rows.empty());
  for (const auto& r : t.rows) EXPECT_TRUE(std::isfinite(r.value));
  std::filesystem::remove(path);
}

TEST(Numbers, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_number(x)), x);
}
