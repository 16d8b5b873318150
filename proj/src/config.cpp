#include "distlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "distlab/error.hpp"

namespace distlab {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kSweepKeys[] = {
    "sample_count", "separation", "dim", "num_classes", "mixture_radius",
    "alpha", "sigma", "smoothing_alpha", "distortion_alpha", "scale_a",
    "learning_rate", "batch_size", "epochs", "weight_decay", "hidden",
    "depth", "student_depth", "num_estimators", "min_leaf", "predictor_noise",
};

std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::kTwoGaussians: return "two_gaussians";
    case GeneratorKind::kSlab2d: return "slab2d";
    case GeneratorKind::kMulticlassMixture: return "multiclass_mixture";
  }
  return "unknown";
}

GeneratorKind parse_generator(std::string_view s) {
  if (s == "two_gaussians") return GeneratorKind::kTwoGaussians;
  if (s == "slab2d") return GeneratorKind::kSlab2d;
  if (s == "multiclass_mixture") return GeneratorKind::kMulticlassMixture;
  throw ConfigError("generator.kind: unknown generator '" + std::string(s) +
                    "' (expected two_gaussians, slab2d, multiclass_mixture)");
}

std::string_view to_string(ModelKind k) { return k == ModelKind::kLinear ? "linear" : "mlp"; }

std::string_view to_string(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

std::string_view to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::kNearBayes: return "near_bayes";
    case PredictorKind::kZero: return "zero";
    case PredictorKind::kAnalyticPoint: return "analytic_point";
  }
  return "unknown";
}

// Reads the members of one JSON object, rejecting keys nobody consumed.
class ObjectReader {
 public:
  ObjectReader(const ordered_json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(where("") + " must be a JSON object");
  }

  template <typename T>
  void read(std::string_view key, T& out) {
    const std::string k(key);
    seen_.insert(k);
    if (!obj_.contains(k)) return;
    const ordered_json& v = obj_.at(k);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where(k) + " must be a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where(k) + " must be a string");
        out = v.get<std::string>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(where(k) + " must be a number");
        out = v.get<T>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number()) throw ConfigError(where(k) + " must be a number");
        const double d = v.get<double>();
        if (d < 0 || std::floor(d) != d) throw ConfigError(where(k) + " must be a non-negative integer");
        out = v.is_number_unsigned() ? static_cast<T>(v.get<std::uint64_t>()) : static_cast<T>(d);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(k) + ": " + e.what());
    }
  }

  const ordered_json* child(std::string_view key) {
    const std::string k(key);
    seen_.insert(k);
    return obj_.contains(k) ? &obj_.at(k) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + where(k) + "'");
    }
  }

  std::string where(std::string_view key) const {
    if (prefix_.empty()) return std::string(key);
    return key.empty() ? prefix_ : prefix_ + "." + std::string(key);
  }

 private:
  const ordered_json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <typename T>
std::vector<T> read_list(const ordered_json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a non-empty array");
  std::vector<T> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + " entries must be numbers");
    if constexpr (std::is_integral_v<T>) {
      const double d = e.get<double>();
      if (d < 0 || std::floor(d) != d) throw ConfigError(where + " entries must be non-negative integers");
      out.push_back(static_cast<T>(d));
    } else {
      out.push_back(e.get<T>());
    }
  }
  return out;
}

std::size_t as_count(std::string_view key, double v) {
  if (v < 0 || std::floor(v) != v) {
    throw ConfigError("sweep value for '" + std::string(key) + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

const std::vector<std::string_view>& experiment_names() {
  static const std::vector<std::string_view> names{
      "bayes_vs_onehot", "class_separation", "distortion", "bias_variance_grid",
      "tree_depth",      "variance_check",   "double_distill"};
  return names;
}

std::string_view to_string(ExperimentKind kind) {
  return experiment_names()[static_cast<std::size_t>(kind)];
}

ExperimentKind parse_experiment(std::string_view name) {
  const auto& names = experiment_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    std::string msg = "unknown experiment '" + std::string(name) + "'; valid experiments:";
    for (auto n : names) msg += " " + std::string(n);
    throw ConfigError(msg);
  }
  return static_cast<ExperimentKind>(it - names.begin());
}

const std::vector<std::string_view>& sweep_keys(ExperimentKind) {
  static const std::vector<std::string_view> keys(std::begin(kSweepKeys), std::end(kSweepKeys));
  return keys;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.generator.kind = GeneratorKind::kTwoGaussians;
  c.generator.dim = 10;
  c.generator.num_classes = 2;
  c.generator.separation = 2.0 * std::sqrt(10.0);
  c.generator.sample_count = 20;
  c.trials = 100;
  c.test_size = 10000;
  // Full-batch descent with a light L2 penalty.
  c.train.learning_rate = 0.5;
  c.train.batch_size = 0;
  c.train.epochs = 500;
  c.train.weight_decay = 0.01;
  switch (kind) {
    case ExperimentKind::kBayesVsOneHot:
      c.sweep = {{"sample_count", {10, 20, 50, 100, 1000}}};
      break;
    case ExperimentKind::kClassSeparation:
      c.sweep = {{"separation", {0.5, 1, 2, 4}}};
      break;
    case ExperimentKind::kDistortion:
      c.sweep = {{"distortion_alpha", {1, 2, 4, 8}}};
      break;
    case ExperimentKind::kBiasVarianceGrid:
      c.trials = 30;
      c.sweep = {{"alpha", {0, 0.3, 0.6}}, {"sigma", {0, 0.5, 1}}};
      break;
    case ExperimentKind::kTreeDepth:
      c.generator.kind = GeneratorKind::kSlab2d;
      c.generator.dim = 2;
      c.generator.sample_count = 100;
      c.trials = 100;
      c.sweep = {{"depth", {1, 2, 4, 8, 16}}};
      break;
    case ExperimentKind::kVarianceCheck:
      c.generator.sample_count = 50;
      c.teacher.sigma = 0.5;
      c.trials = 20;
      break;
    case ExperimentKind::kDoubleDistill:
      c.generator.kind = GeneratorKind::kMulticlassMixture;
      c.generator.dim = 20;
      c.generator.num_classes = 50;
      c.generator.mixture_radius = 3.0;
      c.generator.sample_count = 2000;
      c.trials = 20;
      c.test_size = 5000;
      c.train.model = ModelKind::kMlp;
      c.train.hidden = 8;
      c.train.activation = Activation::kIdentity;
      c.train.learning_rate = 0.1;
      c.train.batch_size = 32;
      c.train.epochs = 20;
      break;
  }
  return c;
}

void apply_parameter(ExperimentConfig& c, std::string_view key, double v) {
  if (key == "sample_count") c.generator.sample_count = as_count(key, v);
  else if (key == "separation") c.generator.separation = v;
  else if (key == "dim") c.generator.dim = static_cast<int>(as_count(key, v));
  else if (key == "num_classes") c.generator.num_classes = static_cast<int>(as_count(key, v));
  else if (key == "mixture_radius") c.generator.mixture_radius = v;
  else if (key == "alpha") c.teacher.alpha = v;
  else if (key == "sigma") c.teacher.sigma = v;
  else if (key == "smoothing_alpha") c.teacher.smoothing_alpha = v;
  else if (key == "distortion_alpha") c.teacher.distortion_alpha = v;
  else if (key == "scale_a") c.teacher.scale_a = v;
  else if (key == "learning_rate") c.train.learning_rate = v;
  else if (key == "batch_size") c.train.batch_size = as_count(key, v);
  else if (key == "epochs") c.train.epochs = as_count(key, v);
  else if (key == "weight_decay") c.train.weight_decay = v;
  else if (key == "hidden") c.train.hidden = as_count(key, v);
  else if (key == "depth") c.forest.depth = as_count(key, v);
  else if (key == "student_depth") c.forest.student_depth = as_count(key, v);
  else if (key == "num_estimators") c.forest.num_estimators = as_count(key, v);
  else if (key == "min_leaf") c.forest.min_leaf = as_count(key, v);
  else if (key == "predictor_noise") c.estimator.predictor_noise = v;
  else throw ConfigError("unknown sweep key '" + std::string(key) + "'");
}

void validate(const ExperimentConfig& c) {
  const auto& keys = sweep_keys(c.experiment);
  std::set<std::string> seen;
  for (const auto& axis : c.sweep) {
    if (std::find(keys.begin(), keys.end(), axis.key) == keys.end()) {
      throw ConfigError("unknown sweep key '" + axis.key + "'");
    }
    if (!seen.insert(axis.key).second) throw ConfigError("duplicate sweep key '" + axis.key + "'");
    if (axis.values.empty()) throw ConfigError("sweep key '" + axis.key + "' has no values");
    ExperimentConfig probe = c;
    for (double v : axis.values) apply_parameter(probe, axis.key, v);
  }
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.generator.dim < 1) throw ConfigError("generator.dim must be >= 1");
  if (c.generator.num_classes < 2) throw ConfigError("generator.num_classes must be >= 2");
  if (c.generator.sample_count < 1) throw ConfigError("generator.sample_count must be >= 1");
  if (c.generator.kind == GeneratorKind::kTwoGaussians && !(c.generator.separation > 0)) {
    throw ConfigError("generator.separation must be > 0");
  }
  if (c.generator.kind == GeneratorKind::kSlab2d &&
      (c.generator.dim != 2 || c.generator.num_classes != 2)) {
    throw ConfigError("slab2d requires dim = 2 and num_classes = 2");
  }
  if (c.generator.kind == GeneratorKind::kTwoGaussians && c.generator.num_classes != 2) {
    throw ConfigError("two_gaussians requires num_classes = 2");
  }
  if (!(c.train.learning_rate > 0)) throw ConfigError("train.learning_rate must be > 0");
  if (c.train.weight_decay < 0) throw ConfigError("train.weight_decay must be >= 0");
  if (c.train.hidden < 1) throw ConfigError("train.hidden must be >= 1");
  if (c.teacher.alpha < 0 || c.teacher.alpha > 1) throw ConfigError("teacher.alpha must lie in [0, 1]");
  if (c.teacher.sigma < 0) throw ConfigError("teacher.sigma must be >= 0");
  if (c.teacher.smoothing_alpha < 0 || c.teacher.smoothing_alpha > 1) {
    throw ConfigError("teacher.smoothing_alpha must lie in [0, 1]");
  }
  if (c.teacher.distortion_alpha < 1) throw ConfigError("teacher.distortion_alpha must be >= 1");
  if (!(c.teacher.scale_a > 0)) throw ConfigError("teacher.scale_a must be > 0");
  if (c.forest.num_estimators < 1) throw ConfigError("forest.num_estimators must be >= 1");
  if (c.estimator.draws < 2) throw ConfigError("estimator.draws must be >= 2");
  if (c.estimator.probe_trials < 2) throw ConfigError("estimator.probe_trials must be >= 2");
  for (double a : c.retrieval.scale_a_values) {
    if (!(a > 0)) throw ConfigError("retrieval.scale_a_values entries must be > 0");
  }
  if (!(c.retrieval.test_fraction > 0 && c.retrieval.test_fraction < 1)) {
    throw ConfigError("retrieval.test_fraction must lie in (0, 1)");
  }
  for (std::size_t k : c.retrieval.ks) {
    if (k < 1) throw ConfigError("retrieval.ks entries must be >= 1");
  }

  // Experiment-specific generator requirements.
  const bool binary_gaussian = c.experiment == ExperimentKind::kBayesVsOneHot ||
                               c.experiment == ExperimentKind::kClassSeparation ||
                               c.experiment == ExperimentKind::kDistortion ||
                               c.experiment == ExperimentKind::kBiasVarianceGrid ||
                               c.experiment == ExperimentKind::kVarianceCheck;
  if (binary_gaussian && c.generator.kind != GeneratorKind::kTwoGaussians) {
    throw ConfigError(std::string(to_string(c.experiment)) + " requires generator.kind = two_gaussians");
  }
  if (c.experiment == ExperimentKind::kTreeDepth && c.generator.kind != GeneratorKind::kSlab2d) {
    throw ConfigError("tree_depth requires generator.kind = slab2d");
  }
  if (c.experiment == ExperimentKind::kDoubleDistill && c.retrieval.data_path.empty() &&
      c.generator.kind != GeneratorKind::kMulticlassMixture) {
    throw ConfigError("double_distill requires generator.kind = multiclass_mixture or retrieval.data_path");
  }
  if (binary_gaussian || c.experiment == ExperimentKind::kDoubleDistill ||
      c.experiment == ExperimentKind::kTreeDepth) {
    if (c.test_size < 2 && c.experiment != ExperimentKind::kDoubleDistill) {
      throw ConfigError("test_size must be >= 2");
    }
  }
}

ExperimentConfig parse_config(const ordered_json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("experiment") || !doc.at("experiment").is_string()) {
    throw ConfigError("config must name an 'experiment'");
  }
  ExperimentConfig c = default_config(parse_experiment(doc.at("experiment").get<std::string>()));
  ObjectReader top(doc, "");
  std::string experiment_name;
  top.read("experiment", experiment_name);

  if (const auto* g = top.child("generator")) {
    ObjectReader r(*g, "generator");
    std::string kind(to_string(c.generator.kind));
    r.read("kind", kind);
    c.generator.kind = parse_generator(kind);
    r.read("dim", c.generator.dim);
    r.read("num_classes", c.generator.num_classes);
    r.read("separation", c.generator.separation);
    r.read("mixture_radius", c.generator.mixture_radius);
    r.read("sample_count", c.generator.sample_count);
    r.finish();
  }
  if (const auto* t = top.child("teacher")) {
    ObjectReader r(*t, "teacher");
    r.read("alpha", c.teacher.alpha);
    r.read("sigma", c.teacher.sigma);
    r.read("smoothing_alpha", c.teacher.smoothing_alpha);
    r.read("distortion_alpha", c.teacher.distortion_alpha);
    r.read("scale_a", c.teacher.scale_a);
    r.finish();
  }
  if (const auto* t = top.child("train")) {
    ObjectReader r(*t, "train");
    std::string model(to_string(c.train.model));
    std::string activation(to_string(c.train.activation));
    r.read("model", model);
    r.read("hidden", c.train.hidden);
    r.read("activation", activation);
    r.read("learning_rate", c.train.learning_rate);
    r.read("batch_size", c.train.batch_size);
    r.read("epochs", c.train.epochs);
    r.read("weight_decay", c.train.weight_decay);
    r.finish();
    if (model == "linear") c.train.model = ModelKind::kLinear;
    else if (model == "mlp") c.train.model = ModelKind::kMlp;
    else throw ConfigError("train.model must be 'linear' or 'mlp'");
    if (activation == "relu") c.train.activation = Activation::kRelu;
    else if (activation == "identity") c.train.activation = Activation::kIdentity;
    else throw ConfigError("train.activation must be 'relu' or 'identity'");
  }
  if (const auto* f = top.child("forest")) {
    ObjectReader r(*f, "forest");
    r.read("num_estimators", c.forest.num_estimators);
    r.read("depth", c.forest.depth);
    r.read("min_leaf", c.forest.min_leaf);
    r.read("bootstrap", c.forest.bootstrap);
    r.read("student_depth", c.forest.student_depth);
    r.finish();
  }
  if (const auto* e = top.child("estimator")) {
    ObjectReader r(*e, "estimator");
    std::string predictor(to_string(c.estimator.predictor));
    r.read("draws", c.estimator.draws);
    r.read("population_samples", c.estimator.population_samples);
    r.read("predictor", predictor);
    r.read("predictor_noise", c.estimator.predictor_noise);
    r.read("probe_points", c.estimator.probe_points);
    r.read("probe_trials", c.estimator.probe_trials);
    r.finish();
    if (predictor == "near_bayes") c.estimator.predictor = PredictorKind::kNearBayes;
    else if (predictor == "zero") c.estimator.predictor = PredictorKind::kZero;
    else if (predictor == "analytic_point") c.estimator.predictor = PredictorKind::kAnalyticPoint;
    else throw ConfigError("estimator.predictor must be near_bayes, zero or analytic_point");
  }
  if (const auto* q = top.child("retrieval")) {
    ObjectReader r(*q, "retrieval");
    if (const auto* a = r.child("scale_a_values")) {
      c.retrieval.scale_a_values = read_list<double>(*a, "retrieval.scale_a_values");
    }
    if (const auto* k = r.child("ks")) c.retrieval.ks = read_list<std::size_t>(*k, "retrieval.ks");
    r.read("data_path", c.retrieval.data_path);
    r.read("index_base", c.retrieval.index_base);
    r.read("test_fraction", c.retrieval.test_fraction);
    r.read("teacher_hidden", c.retrieval.teacher_hidden);
    r.read("teacher_epochs", c.retrieval.teacher_epochs);
    r.finish();
  }
  if (const auto* s = top.child("sweep")) {
    if (!s->is_object()) throw ConfigError("sweep must be a JSON object of parameter lists");
    c.sweep.clear();
    for (const auto& [key, values] : s->items()) {
      const auto& keys = sweep_keys(c.experiment);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown sweep key '" + key + "'");
      }
      c.sweep.push_back({key, read_list<double>(values, "sweep." + key)});
    }
  }
  top.read("trials", c.trials);
  top.read("test_size", c.test_size);
  top.read("base_seed", c.base_seed);
  top.read("output_path", c.output_path);
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["generator"] = {
      {"kind", std::string(to_string(c.generator.kind))},
      {"dim", c.generator.dim},
      {"num_classes", c.generator.num_classes},
      {"separation", c.generator.separation},
      {"mixture_radius", c.generator.mixture_radius},
      {"sample_count", c.generator.sample_count},
  };
  j["teacher"] = {
      {"alpha", c.teacher.alpha},
      {"sigma", c.teacher.sigma},
      {"smoothing_alpha", c.teacher.smoothing_alpha},
      {"distortion_alpha", c.teacher.distortion_alpha},
      {"scale_a", c.teacher.scale_a},
  };
  j["train"] = {
      {"model", std::string(to_string(c.train.model))},
      {"hidden", c.train.hidden},
      {"activation", std::string(to_string(c.train.activation))},
      {"learning_rate", c.train.learning_rate},
      {"batch_size", c.train.batch_size},
      {"epochs", c.train.epochs},
      {"weight_decay", c.train.weight_decay},
  };
  j["forest"] = {
      {"num_estimators", c.forest.num_estimators},
      {"depth", c.forest.depth},
      {"min_leaf", c.forest.min_leaf},
      {"bootstrap", c.forest.bootstrap},
      {"student_depth", c.forest.student_depth},
  };
  j["estimator"] = {
      {"draws", c.estimator.draws},
      {"population_samples", c.estimator.population_samples},
      {"predictor", std::string(to_string(c.estimator.predictor))},
      {"predictor_noise", c.estimator.predictor_noise},
      {"probe_points", c.estimator.probe_points},
      {"probe_trials", c.estimator.probe_trials},
  };
  j["retrieval"] = {
      {"scale_a_values", c.retrieval.scale_a_values},
      {"ks", c.retrieval.ks},
      {"data_path", c.retrieval.data_path},
      {"index_base", c.retrieval.index_base},
      {"test_fraction", c.retrieval.test_fraction},
      {"teacher_hidden", c.retrieval.teacher_hidden},
      {"teacher_epochs", c.retrieval.teacher_epochs},
  };
  ordered_json sweep = ordered_json::object();
  for (const auto& axis : c.sweep) sweep[axis.key] = axis.values;
  j["sweep"] = sweep;
  j["trials"] = c.trials;
  j["test_size"] = c.test_size;
  j["base_seed"] = c.base_seed;
  j["output_path"] = c.output_path;
  return j;
}

}  // namespace distlab
