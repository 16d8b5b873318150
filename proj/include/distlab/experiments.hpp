#pragma once

// Experiment drivers. Each runner expands the sweep grid, runs every
// (grid point, trial) pair, possibly on several threads, and returns rows in
// grid-then-trial order.

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "distlab/config.hpp"
#include "distlab/models.hpp"

namespace distlab {

struct ResultRow {
  std::vector<double> sweep_values;  // parallel to ResultTable::sweep_keys
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct ResultTable {
  std::string experiment;
  std::vector<std::string> sweep_keys;
  std::vector<ResultRow> rows;
};

// Cartesian product of the sweep axes; the first axis varies slowest. A
// config without a sweep has one empty grid point.
std::vector<std::vector<double>> sweep_grid(const ExperimentConfig& config);

// Copy of `config` with one grid point applied.
ExperimentConfig resolve_point(const ExperimentConfig& config, const std::vector<double>& point);

// Seed of one trial. It depends on base_seed, the trial index and the
// parameters that shape the data (generator fields and test_size), so grid
// points differing only in teacher or training settings see the same data.
std::uint64_t trial_seed(const ExperimentConfig& resolved, std::size_t trial);

ResultTable run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

ResultTable run_bayes_vs_onehot(const ExperimentConfig& config, std::size_t jobs = 1);
ResultTable run_class_separation(const ExperimentConfig& config, std::size_t jobs = 1);
ResultTable run_distortion(const ExperimentConfig& config, std::size_t jobs = 1);
ResultTable run_bias_variance_grid(const ExperimentConfig& config, std::size_t jobs = 1);
ResultTable run_tree_depth(const ExperimentConfig& config, std::size_t jobs = 1);
ResultTable run_variance_check(const ExperimentConfig& config, std::size_t jobs = 1);
ResultTable run_double_distill(const ExperimentConfig& config, std::size_t jobs = 1);

// Shortest round-trip decimal form.
std::string format_number(double value);

// Header "experiment,<sweep keys>,trial,seed,metric,value" then one line per row.
void write_csv(const ResultTable& table, std::ostream& out);

// Values (only the first) of metric rows matching a grid point, in trial order.
std::vector<double> metric_values(const ResultTable& table, const std::vector<double>& point,
                                  const std::string& metric);

// Cross-draw variances of the one-hot and Bayes-distilled risk for a
// population with a single support point: p* fixed, loss vector fixed.
struct SinglePointVariance {
  double one_hot = 0.0;
  double bayes_distilled = 0.0;
};
SinglePointVariance single_point_variance_exact(std::span<const double> bayes_probs,
                                                std::span<const double> losses, std::size_t n);
SinglePointVariance single_point_variance_mc(std::span<const double> bayes_probs,
                                             std::span<const double> losses, std::size_t n,
                                             std::size_t draws, RandomStream& stream);

// Binary linear predictor with logit difference (theta + noise * z)^T x,
// z ~ N(0, I).
LinearModel near_bayes_predictor(std::span<const double> theta, double noise, RandomStream& stream);

std::unique_ptr<Model> make_student(const StudentConfig& config, std::size_t input_dim,
                                    std::size_t num_classes);

}  // namespace distlab
