#pragma once

// Declarative experiment configuration, parsed strictly from JSON: unknown
// keys and unknown sweep parameters are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "distlab/datagen.hpp"
#include "distlab/losses.hpp"
#include "distlab/models.hpp"
#include "distlab/teachers.hpp"

namespace distlab {

enum class ExperimentKind {
  kBayesVsOneHot,
  kClassSeparation,
  kDistortion,
  kBiasVarianceGrid,
  kTreeDepth,
  kVarianceCheck,
  kDoubleDistill,
};

const std::vector<std::string_view>& experiment_names();
std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment(std::string_view name);

enum class ModelKind { kLinear, kMlp };

struct StudentConfig {
  ModelKind model = ModelKind::kLinear;
  std::size_t hidden = 8;
  Activation activation = Activation::kRelu;
  double learning_rate = 0.1;
  std::size_t batch_size = 16;  // 0 = full batch
  std::size_t epochs = 100;
  double weight_decay = 0.0;
};

struct ForestConfig {
  std::size_t num_estimators = 3;
  std::size_t depth = 4;
  std::size_t min_leaf = 1;
  bool bootstrap = true;
  std::size_t student_depth = 4;
};

enum class PredictorKind { kNearBayes, kZero, kAnalyticPoint };

struct EstimatorConfig {
  std::size_t draws = 2000;
  std::size_t population_samples = 1'000'000;
  PredictorKind predictor = PredictorKind::kNearBayes;
  double predictor_noise = 1.0;  // stddev of the perturbation around theta*
  std::size_t probe_points = 200;
  std::size_t probe_trials = 200;
};

struct RetrievalConfig {
  std::vector<double> scale_a_values{0.5, 1.0, 2.0};
  std::vector<std::size_t> ks{1, 3, 5};
  // Optional multilabel file; when empty the synthetic mixture is used.
  std::string data_path;
  int index_base = 0;
  double test_fraction = 0.2;
  std::size_t teacher_hidden = 64;
  std::size_t teacher_epochs = 30;
};

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kBayesVsOneHot;
  SyntheticSpec generator;
  TeacherParams teacher;
  StudentConfig train;
  ForestConfig forest;
  EstimatorConfig estimator;
  RetrievalConfig retrieval;
  std::vector<SweepAxis> sweep;  // config order; first key varies slowest
  std::size_t trials = 100;
  std::size_t test_size = 10000;
  std::uint64_t base_seed = 1;
  std::string output_path;
};

// Defaults for one experiment (desk scale).
ExperimentConfig default_config(ExperimentKind kind);

// Parses a JSON document over the experiment's defaults. Throws ConfigError
// naming the offending key.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Fully resolved JSON; parse_config(to_json(c)) reproduces c.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

// Sweep keys accepted by an experiment.
const std::vector<std::string_view>& sweep_keys(ExperimentKind kind);

// Copy of `base` with a sweep parameter assigned.
void apply_parameter(ExperimentConfig& config, std::string_view key, double value);

// Throws ConfigError when any invariant fails.
void validate(const ExperimentConfig& config);

}  // namespace distlab
