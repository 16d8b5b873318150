#include "distlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include "distlab/datagen.hpp"
#include "distlab/error.hpp"
#include "distlab/losses.hpp"
#include "distlab/metrics.hpp"
#include "distlab/teachers.hpp"
#include "distlab/trees.hpp"

namespace distlab {

namespace {

using Metrics = std::vector<std::pair<std::string, double>>;
using TrialFn = std::function<Metrics(const ExperimentConfig&, std::size_t, RandomStream&)>;

// Sub-streams of one trial.
enum : std::uint64_t {
  kTrainStream = 0,
  kTestStream = 1,
  kInitStream = 2,
  kShuffleStream = 3,
  kTeacherStream = 4,
  kForestStream = 5,
  kEstimatorStream = 6,
  kReportStream = 7,
  kMeansStream = 8,
  kSplitStream = 9,
  kTeacherTrainStream = 10,
};

ResultTable run_grid(const ExperimentConfig& config, std::size_t jobs, const TrialFn& trial_fn) {
  validate(config);
  const auto grid = sweep_grid(config);
  const std::size_t trials = config.trials;
  const std::size_t total = grid.size() * trials;

  std::vector<ExperimentConfig> resolved;
  resolved.reserve(grid.size());
  for (const auto& point : grid) resolved.push_back(resolve_point(config, point));

  std::vector<Metrics> results(total);
  std::vector<std::uint64_t> seeds(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      const std::size_t g = job / trials;
      const std::size_t t = job % trials;
      try {
        seeds[job] = trial_seed(resolved[g], t);
        RandomStream stream(seeds[job], 0);
        results[job] = trial_fn(resolved[g], t, stream);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(total, 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ResultTable table;
  table.experiment = std::string(to_string(config.experiment));
  for (const auto& axis : config.sweep) table.sweep_keys.push_back(axis.key);
  for (std::size_t job = 0; job < total; ++job) {
    for (auto& [name, value] : results[job]) {
      if (!std::isfinite(value)) {
        throw Error("non-finite value for metric '" + name + "' in trial " +
                    std::to_string(job % trials));
      }
      table.rows.push_back({grid[job / trials], job % trials, seeds[job], std::move(name), value});
    }
  }
  return table;
}

TrainConfig train_config(const StudentConfig& s, RiskEstimatorKind kind,
                         NegativeWeightScheme scheme = {}) {
  TrainConfig c;
  c.learning_rate = s.learning_rate;
  c.batch_size = s.batch_size;
  c.epochs = s.epochs;
  c.weight_decay = s.weight_decay;
  c.loss_kind = kind;
  c.scheme = scheme;
  return c;
}

// Trains a copy of `init` with a copy of the shared shuffle stream, so every
// arm of a trial starts from the same weights and sees the same batches.
std::unique_ptr<Model> train_arm(const Model& init, const BayesAnnotatedDataset& train,
                                 const TeacherOutput* teacher, TrainConfig tc,
                                 const RandomStream& shuffle) {
  if (tc.batch_size == 0) tc.batch_size = std::max<std::size_t>(train.size(), 1);
  auto model = init.clone();
  RandomStream s = shuffle;
  train_sgd(*model, train, teacher, tc, s);
  return model;
}

Vec binary_scores(const LogitPredictor& model, const DenseMatrix& features) {
  Vec scores(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const Vec f = model.predict_logits(features.row(i));
    scores[i] = f[1] - f[0];
  }
  return scores;
}

double binary_auc(const LogitPredictor& model, const BayesAnnotatedDataset& test) {
  const Vec scores = binary_scores(model, test.features);
  return auc_roc(scores, test.labels);
}

SyntheticSpec with_count(SyntheticSpec spec, std::size_t n) {
  spec.sample_count = n;
  return spec;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Metrics onehot_vs_distilled_trial(const ExperimentConfig& c, std::size_t, RandomStream& stream) {
  RandomStream train_s = stream.derive(kTrainStream);
  RandomStream test_s = stream.derive(kTestStream);
  RandomStream init_s = stream.derive(kInitStream);
  const auto train = generate(c.generator, train_s);
  const auto test = generate(with_count(c.generator, c.test_size), test_s);
  auto init = make_student(c.train, train.dim(), 2);
  init_params(*init, init_s);
  const RandomStream shuffle = stream.derive(kShuffleStream);
  auto oh = train_arm(*init, train, nullptr, train_config(c.train, RiskEstimatorKind::kOneHot), shuffle);
  auto bd = train_arm(*init, train, nullptr, train_config(c.train, RiskEstimatorKind::kBayesDistilled),
                      shuffle);
  return {{"auc_one_hot", binary_auc(*oh, test)}, {"auc_bayes_distilled", binary_auc(*bd, test)}};
}

Metrics distortion_trial(const ExperimentConfig& c, std::size_t, RandomStream& stream) {
  RandomStream train_s = stream.derive(kTrainStream);
  RandomStream test_s = stream.derive(kTestStream);
  RandomStream init_s = stream.derive(kInitStream);
  const auto train = generate(c.generator, train_s);
  const auto test = generate(with_count(c.generator, c.test_size), test_s);
  auto init = make_student(c.train, train.dim(), 2);
  init_params(*init, init_s);
  const double alpha = c.teacher.distortion_alpha;
  const TeacherOutput teacher = distorted_teacher(train, alpha);
  auto student = train_arm(*init, train, &teacher, train_config(c.train, RiskEstimatorKind::kDistilled),
                           stream.derive(kShuffleStream));

  const TeacherOutput test_teacher = distorted_teacher(test, alpha);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (argmax(test_teacher.probs.row(i)) == argmax(test.bayes_probs->row(i))) ++agree;
  }
  return {{"auc_distilled", binary_auc(*student, test)},
          {"teacher_argmax_agreement", static_cast<double>(agree) / static_cast<double>(test.size())},
          {"teacher_mse", teacher_mse(test_teacher, test)}};
}

Metrics bias_variance_trial(const ExperimentConfig& c, std::size_t, RandomStream& stream) {
  RandomStream train_s = stream.derive(kTrainStream);
  RandomStream test_s = stream.derive(kTestStream);
  RandomStream init_s = stream.derive(kInitStream);
  RandomStream teacher_s = stream.derive(kTeacherStream);
  const auto train = generate(c.generator, train_s);
  const auto test = generate(with_count(c.generator, c.test_size), test_s);
  const Vec theta = two_gaussians_theta(c.generator.dim, c.generator.separation);
  const TeacherOutput teacher =
      noisy_biased_teacher(train, theta, c.teacher.alpha, c.teacher.sigma, teacher_s);
  auto init = make_student(c.train, train.dim(), 2);
  init_params(*init, init_s);
  auto student = train_arm(*init, train, &teacher, train_config(c.train, RiskEstimatorKind::kDistilled),
                           stream.derive(kShuffleStream));
  return {{"teacher_mse", teacher_mse(teacher, train)}, {"student_auc", binary_auc(*student, test)}};
}

Metrics tree_depth_trial(const ExperimentConfig& c, std::size_t, RandomStream& stream) {
  RandomStream train_s = stream.derive(kTrainStream);
  RandomStream test_s = stream.derive(kTestStream);
  RandomStream forest_s = stream.derive(kForestStream);
  const auto train = generate(c.generator, train_s);
  const auto test = generate(with_count(c.generator, c.test_size), test_s);
  ForestOptions opts;
  opts.num_estimators = c.forest.num_estimators;
  opts.max_depth = c.forest.depth;
  opts.min_leaf = c.forest.min_leaf;
  opts.bootstrap = c.forest.bootstrap;
  const RandomForest forest = fit_forest(train, opts, forest_s);
  const TeacherOutput test_teacher = teacher_from_probs(predict_all_probs(forest, test.features));
  const DenseMatrix train_targets = predict_all_probs(forest, train.features);
  const DecisionTree student = fit_tree_regressor_to_probs(train.features, train_targets,
                                                           c.forest.student_depth, c.forest.min_leaf);
  Vec scores(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) scores[i] = student.predict_probs(test.features.row(i))[1];
  return {{"teacher_train_mse", forest.training_impurity()},
          {"teacher_test_mse", teacher_mse(test_teacher, test)},
          {"student_auc", auc_roc(scores, test.labels)}};
}

Metrics variance_check_trial(const ExperimentConfig& c, std::size_t, RandomStream& stream) {
  const EstimatorConfig& e = c.estimator;
  if (e.predictor == PredictorKind::kAnalyticPoint) {
    const Vec p{0.5, 0.5};
    const Vec losses{0.0, 1.0};
    const auto exact = single_point_variance_exact(p, losses, c.generator.sample_count);
    RandomStream mc_s = stream.derive(kEstimatorStream);
    const auto mc = single_point_variance_mc(p, losses, c.generator.sample_count, e.draws, mc_s);
    return {{"var_one_hot_exact", exact.one_hot},
            {"var_bayes_distilled_exact", exact.bayes_distilled},
            {"var_one_hot_mc", mc.one_hot},
            {"var_bayes_distilled_mc", mc.bayes_distilled}};
  }

  const Vec theta = two_gaussians_theta(c.generator.dim, c.generator.separation);
  LinearModel predictor(static_cast<std::size_t>(c.generator.dim), 2);
  if (e.predictor == PredictorKind::kNearBayes) {
    RandomStream init_s = stream.derive(kInitStream);
    predictor = near_bayes_predictor(theta, e.predictor_noise, init_s);
  }
  const SyntheticSpec spec = c.generator;
  const DatasetSampler sampler = [spec](std::size_t n, RandomStream& s) {
    return gen_two_gaussians(with_count(spec, n), s);
  };
  const double alpha = c.teacher.alpha;
  const double sigma = c.teacher.sigma;
  const TeacherDraw teacher = [theta, alpha, sigma](const BayesAnnotatedDataset& d, RandomStream& s) {
    return noisy_biased_teacher(d, theta, alpha, sigma, s);
  };

  const RiskEstimatorKind kinds[] = {RiskEstimatorKind::kOneHot, RiskEstimatorKind::kBayesDistilled,
                                     RiskEstimatorKind::kDistilled};
  const auto stats = estimator_statistics(kinds, predictor, sampler, spec.sample_count,
                                          static_cast<int>(e.draws), stream.derive(kEstimatorStream),
                                          teacher, 0);
  BiasVarianceOptions opts;
  opts.n = spec.sample_count;
  opts.trials = static_cast<int>(e.draws);
  opts.population_samples = e.population_samples;
  opts.teacher_probe_points = e.probe_points;
  opts.teacher_probe_trials = static_cast<int>(e.probe_trials);
  const auto report = bias_variance_report(teacher, predictor, sampler, opts, stream.derive(kReportStream));

  const auto& oh = stats.by_kind.at(RiskEstimatorKind::kOneHot);
  const auto& bd = stats.by_kind.at(RiskEstimatorKind::kBayesDistilled);
  const auto& di = stats.by_kind.at(RiskEstimatorKind::kDistilled);
  return {{"mean_one_hot", oh.mean},
          {"var_one_hot", oh.variance},
          {"mean_stderr_one_hot", oh.mean_stderr},
          {"mean_bayes_distilled", bd.mean},
          {"var_bayes_distilled", bd.variance},
          {"mean_stderr_bayes_distilled", bd.mean_stderr},
          {"mean_distilled", di.mean},
          {"var_distilled", di.variance},
          {"var_gap_stderr", paired_variance_gap_stderr(oh, bd)},
          {"population_risk", report.population_risk},
          {"population_risk_stderr", report.population_risk_stderr},
          {"distilled_sq_error", report.distilled_sq_error},
          {"distilled_sq_error_stderr", report.distilled_sq_error_stderr},
          {"bayes_sq_error", report.bayes_sq_error},
          {"sq_error_gap_stderr", report.sq_error_gap_stderr},
          {"first_bound", report.first_bound()},
          {"second_bound", report.second_bound()},
          {"loss_norm_bound", report.loss_norm_bound},
          {"teacher_bias_sq", report.teacher_bias_sq},
          {"teacher_variance", report.teacher_variance},
          {"teacher_probe_mse", report.teacher_probe_mse},
          {"teacher_probe_mse_stderr", report.teacher_probe_mse_stderr},
          {"chain_holds", report.chain_holds() ? 1.0 : 0.0},
          {"prop4_holds", report.unbiased_teacher_ordering_holds() ? 1.0 : 0.0}};
}

struct Split {
  BayesAnnotatedDataset train;
  BayesAnnotatedDataset test;
};

BayesAnnotatedDataset take_rows(const BayesAnnotatedDataset& data, std::span<const std::size_t> rows) {
  BayesAnnotatedDataset out;
  out.num_classes = data.num_classes;
  out.features = DenseMatrix(0, data.dim());
  for (std::size_t r : rows) {
    out.features.append_row(data.features.row(r));
    out.labels.push_back(data.labels[r]);
  }
  return out;
}

Split random_split(const BayesAnnotatedDataset& data, double test_fraction, RandomStream& stream) {
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, stream);
  std::size_t n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(order.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, order.size() - 1);
  const std::span<const std::size_t> all(order);
  return {take_rows(data, all.subspan(n_test)), take_rows(data, all.first(n_test))};
}

Metrics double_distill_trial(const ExperimentConfig& c, const BayesAnnotatedDataset* ingested,
                             RandomStream& stream) {
  BayesAnnotatedDataset train;
  BayesAnnotatedDataset test;
  std::optional<TeacherOutput> teacher;
  std::unique_ptr<Model> teacher_model;
  if (ingested) {
    RandomStream split_s = stream.derive(kSplitStream);
    auto split = random_split(*ingested, c.retrieval.test_fraction, split_s);
    train = std::move(split.train);
    test = std::move(split.test);
    StudentConfig tcfg = c.train;
    tcfg.model = ModelKind::kMlp;
    tcfg.hidden = c.retrieval.teacher_hidden;
    tcfg.activation = Activation::kRelu;
    tcfg.epochs = c.retrieval.teacher_epochs;
    teacher_model = make_student(tcfg, train.dim(), static_cast<std::size_t>(train.num_classes));
    RandomStream tinit = stream.derive(kTeacherTrainStream);
    init_params(*teacher_model, tinit);
    RandomStream tshuffle = tinit.derive(0);
    TrainConfig ttc = train_config(tcfg, RiskEstimatorKind::kOneHot);
    if (ttc.batch_size == 0) ttc.batch_size = train.size();
    train_sgd(*teacher_model, train, nullptr, ttc, tshuffle);
    teacher = learned_teacher(*teacher_model)(train.features);
  } else {
    RandomStream means_s = stream.derive(kMeansStream);
    const DenseMatrix means = draw_mixture_means(c.generator.num_classes, c.generator.dim,
                                                 c.generator.mixture_radius, means_s);
    RandomStream train_s = stream.derive(kTrainStream);
    RandomStream test_s = stream.derive(kTestStream);
    train = gen_mixture_with_means(means, c.generator.sample_count, train_s);
    test = gen_mixture_with_means(means, c.test_size, test_s);
    teacher = bayes_teacher(train);
  }

  const std::size_t L = static_cast<std::size_t>(train.num_classes);
  auto init = make_student(c.train, train.dim(), L);
  RandomStream init_s = stream.derive(kInitStream);
  init_params(*init, init_s);
  const RandomStream shuffle_s = stream.derive(kShuffleStream);

  std::vector<std::pair<std::string, std::unique_ptr<Model>>> arms;
  arms.emplace_back("one_hot", train_arm(*init, train, nullptr,
                                         train_config(c.train, RiskEstimatorKind::kOneHot), shuffle_s));
  arms.emplace_back("distilled", train_arm(*init, train, &*teacher,
                                           train_config(c.train, RiskEstimatorKind::kDistilled), shuffle_s));
  for (double a : c.retrieval.scale_a_values) {
    arms.emplace_back("double_distilled_a" + format_number(a),
                      train_arm(*init, train, &*teacher,
                                train_config(c.train, RiskEstimatorKind::kDoubleDistilled,
                                             NegativeWeightScheme::sigmoid_logit(a)),
                                shuffle_s));
  }

  Metrics out;
  for (const auto& [name, model] : arms) {
    const DenseMatrix logits = predict_all_logits(*model, test.features);
    for (std::size_t k : c.retrieval.ks) {
      if (k > L) continue;
      out.emplace_back("p_at_" + std::to_string(k) + "_" + name, precision_at_k(logits, test.labels, k));
      out.emplace_back("top_k_loss_" + std::to_string(k) + "_" + name, top_k_loss(logits, test.labels, k));
    }
    out.emplace_back("p_at_L_" + name, precision_at_k(logits, test.labels, L));
  }
  return out;
}

void require_generator(const ExperimentConfig& c, GeneratorKind kind, std::string_view name) {
  if (c.generator.kind != kind) {
    throw ConfigError(std::string(to_string(c.experiment)) + " requires generator.kind = " +
                      std::string(name));
  }
}

}  // namespace

std::vector<std::vector<double>> sweep_grid(const ExperimentConfig& config) {
  std::vector<std::vector<double>> grid{{}};
  for (const auto& axis : config.sweep) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : grid) {
      for (double v : axis.values) {
        auto point = prefix;
        point.push_back(v);
        next.push_back(std::move(point));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

ExperimentConfig resolve_point(const ExperimentConfig& config, const std::vector<double>& point) {
  if (point.size() != config.sweep.size()) throw ParamError("grid point does not match the sweep");
  ExperimentConfig out = config;
  for (std::size_t i = 0; i < point.size(); ++i) apply_parameter(out, config.sweep[i].key, point[i]);
  return out;
}

std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t trial) {
  std::uint64_t h = mix64(c.base_seed);
  auto feed = [&h](std::uint64_t v) { h = mix64(h ^ mix64(v + 0x9e3779b97f4a7c15ULL)); };
  feed(static_cast<std::uint64_t>(c.generator.kind));
  feed(static_cast<std::uint64_t>(c.generator.dim));
  feed(static_cast<std::uint64_t>(c.generator.num_classes));
  feed(std::bit_cast<std::uint64_t>(c.generator.separation));
  feed(std::bit_cast<std::uint64_t>(c.generator.mixture_radius));
  feed(c.generator.sample_count);
  feed(c.test_size);
  feed(trial);
  return h;
}

ResultTable run_bayes_vs_onehot(const ExperimentConfig& config, std::size_t jobs) {
  require_generator(config, GeneratorKind::kTwoGaussians, "two_gaussians");
  return run_grid(config, jobs, onehot_vs_distilled_trial);
}

ResultTable run_class_separation(const ExperimentConfig& config, std::size_t jobs) {
  require_generator(config, GeneratorKind::kTwoGaussians, "two_gaussians");
  return run_grid(config, jobs, onehot_vs_distilled_trial);
}

ResultTable run_distortion(const ExperimentConfig& config, std::size_t jobs) {
  require_generator(config, GeneratorKind::kTwoGaussians, "two_gaussians");
  return run_grid(config, jobs, distortion_trial);
}

ResultTable run_bias_variance_grid(const ExperimentConfig& config, std::size_t jobs) {
  require_generator(config, GeneratorKind::kTwoGaussians, "two_gaussians");
  return run_grid(config, jobs, bias_variance_trial);
}

ResultTable run_tree_depth(const ExperimentConfig& config, std::size_t jobs) {
  require_generator(config, GeneratorKind::kSlab2d, "slab2d");
  return run_grid(config, jobs, tree_depth_trial);
}

ResultTable run_variance_check(const ExperimentConfig& config, std::size_t jobs) {
  require_generator(config, GeneratorKind::kTwoGaussians, "two_gaussians");
  return run_grid(config, jobs, variance_check_trial);
}

ResultTable run_double_distill(const ExperimentConfig& config, std::size_t jobs) {
  std::optional<BayesAnnotatedDataset> ingested;
  if (!config.retrieval.data_path.empty()) {
    ingested = expand_multilabel_to_multiclass(
        load_multilabel_sparse(config.retrieval.data_path, config.retrieval.index_base));
  } else {
    require_generator(config, GeneratorKind::kMulticlassMixture, "multiclass_mixture");
  }
  const BayesAnnotatedDataset* data = ingested ? &*ingested : nullptr;
  return run_grid(config, jobs, [data](const ExperimentConfig& c, std::size_t, RandomStream& s) {
    return double_distill_trial(c, data, s);
  });
}

ResultTable run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  switch (config.experiment) {
    case ExperimentKind::kBayesVsOneHot: return run_bayes_vs_onehot(config, jobs);
    case ExperimentKind::kClassSeparation: return run_class_separation(config, jobs);
    case ExperimentKind::kDistortion: return run_distortion(config, jobs);
    case ExperimentKind::kBiasVarianceGrid: return run_bias_variance_grid(config, jobs);
    case ExperimentKind::kTreeDepth: return run_tree_depth(config, jobs);
    case ExperimentKind::kVarianceCheck: return run_variance_check(config, jobs);
    case ExperimentKind::kDoubleDistill: return run_double_distill(config, jobs);
  }
  throw ConfigError("unknown experiment");
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_csv(const ResultTable& table, std::ostream& out) {
  out << "experiment";
  for (const auto& k : table.sweep_keys) out << ',' << k;
  out << ",trial,seed,metric,value\n";
  for (const auto& row : table.rows) {
    out << table.experiment;
    for (double v : row.sweep_values) out << ',' << format_number(v);
    out << ',' << row.trial << ',' << row.seed << ',' << row.metric << ',' << format_number(row.value)
        << '\n';
  }
}

std::vector<double> metric_values(const ResultTable& table, const std::vector<double>& point,
                                  const std::string& metric) {
  std::vector<double> out;
  for (const auto& row : table.rows) {
    if (row.metric == metric && row.sweep_values == point) out.push_back(row.value);
  }
  return out;
}

SinglePointVariance single_point_variance_exact(std::span<const double> p,
                                                std::span<const double> losses, std::size_t n) {
  if (p.size() != losses.size() || n == 0) throw ParamError("single-point variance: bad arguments");
  double m = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) m += p[y] * losses[y];
  double var = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) var += p[y] * (losses[y] - m) * (losses[y] - m);
  return {var / static_cast<double>(n), 0.0};
}

SinglePointVariance single_point_variance_mc(std::span<const double> p, std::span<const double> losses,
                                             std::size_t n, std::size_t draws, RandomStream& stream) {
  if (p.size() != losses.size() || n == 0 || draws < 2) {
    throw ParamError("single-point variance: bad arguments");
  }
  const double bayes_term = dot(p, losses);
  Vec one_hot(draws);
  Vec bayes(draws);
  Vec terms(n);
  for (std::size_t t = 0; t < draws; ++t) {
    for (std::size_t i = 0; i < n; ++i) terms[i] = losses[stream.categorical(p)];
    one_hot[t] = mean(terms);
    bayes[t] = bayes_term;
  }
  return {sample_variance(one_hot), sample_variance(bayes)};
}

LinearModel near_bayes_predictor(std::span<const double> theta, double noise, RandomStream& stream) {
  LinearModel model(theta.size(), 2);
  for (std::size_t j = 0; j < theta.size(); ++j) model.weight(1, j) = theta[j] + noise * stream.normal();
  return model;
}

std::unique_ptr<Model> make_student(const StudentConfig& s, std::size_t d, std::size_t L) {
  if (s.model == ModelKind::kLinear) return std::make_unique<LinearModel>(d, L);
  return std::make_unique<MLPModel>(d, s.hidden, L, s.activation);
}

}  // namespace distlab
