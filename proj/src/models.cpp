#include "distlab/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "distlab/error.hpp"

namespace distlab {

void Model::add_block(std::string name, std::size_t rows, std::size_t cols) {
  blocks_.push_back({std::move(name), rows, cols, params_.size()});
  params_.resize(params_.size() + rows * cols, 0.0);
}

LinearModel::LinearModel(std::size_t input_dim, std::size_t num_classes)
    : dim_(input_dim), classes_(num_classes) {
  if (input_dim < 1 || num_classes < 2) throw ParamError("linear model needs d >= 1 and L >= 2");
  add_block("weights", num_classes, input_dim);
  add_block("bias", 1, num_classes);
}

Vec LinearModel::predict_logits(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw ParamError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(dim_));
  }
  Vec out(classes_);
  const double* w = params_.data();
  const double* b = params_.data() + classes_ * dim_;
  for (std::size_t c = 0; c < classes_; ++c) {
    out[c] = b[c] + dot({w + c * dim_, dim_}, x);
  }
  return out;
}

void LinearModel::backprop(std::span<const double> x, std::span<const double> dlogits,
                           std::span<double> grad) const {
  double* gw = grad.data();
  double* gb = grad.data() + classes_ * dim_;
  for (std::size_t c = 0; c < classes_; ++c) {
    const double g = dlogits[c];
    if (g == 0.0) continue;
    double* row = gw + c * dim_;
    for (std::size_t j = 0; j < dim_; ++j) row[j] += g * x[j];
    gb[c] += g;
  }
}

MLPModel::MLPModel(std::size_t input_dim, std::size_t hidden, std::size_t num_classes,
                   Activation activation)
    : dim_(input_dim), hidden_(hidden), classes_(num_classes), activation_(activation) {
  if (input_dim < 1 || hidden < 1 || num_classes < 2) {
    throw ParamError("MLP needs d >= 1, H >= 1 and L >= 2");
  }
  add_block("hidden_weights", hidden, input_dim);
  add_block("hidden_bias", 1, hidden);
  add_block("output_weights", num_classes, hidden);
  add_block("output_bias", 1, num_classes);
}

void MLPModel::hidden_activations(std::span<const double> x, std::span<double> pre,
                                  std::span<double> post) const {
  const auto w1 = block(0);
  const auto b1 = block(1);
  for (std::size_t h = 0; h < hidden_; ++h) {
    pre[h] = b1[h] + dot(w1.subspan(h * dim_, dim_), x);
    post[h] = (activation_ == Activation::kRelu && pre[h] < 0.0) ? 0.0 : pre[h];
  }
}

Vec MLPModel::predict_logits(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw ParamError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(dim_));
  }
  Vec pre(hidden_), post(hidden_);
  hidden_activations(x, pre, post);
  const auto w2 = block(2);
  const auto b2 = block(3);
  Vec out(classes_);
  for (std::size_t c = 0; c < classes_; ++c) out[c] = b2[c] + dot(w2.subspan(c * hidden_, hidden_), post);
  return out;
}

void MLPModel::backprop(std::span<const double> x, std::span<const double> dlogits,
                        std::span<double> grad) const {
  Vec pre(hidden_), post(hidden_);
  hidden_activations(x, pre, post);
  const auto w2 = block(2);
  double* gw1 = grad.data() + blocks_[0].offset;
  double* gb1 = grad.data() + blocks_[1].offset;
  double* gw2 = grad.data() + blocks_[2].offset;
  double* gb2 = grad.data() + blocks_[3].offset;

  Vec dpost(hidden_, 0.0);
  for (std::size_t c = 0; c < classes_; ++c) {
    const double g = dlogits[c];
    if (g == 0.0) continue;
    gb2[c] += g;
    for (std::size_t h = 0; h < hidden_; ++h) {
      gw2[c * hidden_ + h] += g * post[h];
      dpost[h] += g * w2[c * hidden_ + h];
    }
  }
  for (std::size_t h = 0; h < hidden_; ++h) {
    const double dpre = (activation_ == Activation::kRelu && pre[h] < 0.0) ? 0.0 : dpost[h];
    if (dpre == 0.0) continue;
    gb1[h] += dpre;
    for (std::size_t j = 0; j < dim_; ++j) gw1[h * dim_ + j] += dpre * x[j];
  }
}

void init_params(Model& model, RandomStream& stream) {
  auto params = model.params();
  for (const auto& b : model.blocks()) {
    const bool is_bias = b.rows == 1 && b.name.find("bias") != std::string::npos;
    for (std::size_t i = 0; i < b.rows * b.cols; ++i) {
      params[b.offset + i] = is_bias ? 0.0 : stream.normal() / std::sqrt(static_cast<double>(b.cols));
    }
  }
}

namespace {

LossTarget target_for(const BayesAnnotatedDataset& data, const TeacherOutput* teacher,
                      RiskEstimatorKind kind, std::size_t i) {
  LossTarget t;
  t.label = data.labels[i];
  if (kind == RiskEstimatorKind::kBayesDistilled) {
    t.probs = data.bayes_probs->row(i);
  } else if (kind == RiskEstimatorKind::kDistilled || kind == RiskEstimatorKind::kDoubleDistilled) {
    t.probs = teacher->probs.row(i);
    t.logits = teacher->logits.row(i);
  }
  return t;
}

void check_requirements(const BayesAnnotatedDataset& data, const TeacherOutput* teacher,
                        RiskEstimatorKind kind, const Model& model) {
  if (data.dim() != model.input_dim()) throw ParamError("dataset dimension does not match model");
  if (static_cast<std::size_t>(data.num_classes) != model.num_classes()) {
    throw ParamError("dataset class count does not match model");
  }
  if (kind == RiskEstimatorKind::kBayesDistilled && !data.bayes_probs) {
    throw ParamError("bayes_distilled training requires Bayes probabilities");
  }
  if (kind == RiskEstimatorKind::kDistilled || kind == RiskEstimatorKind::kDoubleDistilled) {
    if (teacher == nullptr) {
      throw ParamError(std::string(to_string(kind)) + " training requires a teacher");
    }
    if (teacher->size() != data.size() || teacher->num_classes() != model.num_classes()) {
      throw ParamError("teacher output shape does not match dataset");
    }
  }
}

}  // namespace

double batch_loss_and_gradient(const Model& model, const BayesAnnotatedDataset& data,
                               const TeacherOutput* teacher, RiskEstimatorKind kind,
                               const NegativeWeightScheme& scheme,
                               std::span<const std::size_t> indices, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  Vec dlogits(model.num_classes());
  double total = 0.0;
  for (std::size_t i : indices) {
    const Vec logits = model.predict_logits(data.features.row(i));
    const LossTarget t = target_for(data, teacher, kind, i);
    total += example_loss(kind, t, logits, scheme);
    loss_gradient_into(kind, t, logits, scheme, dlogits);
    model.backprop(data.features.row(i), dlogits, grad);
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (double& g : grad) g *= inv;
  return total * inv;
}

TrainResult train_sgd(Model& model, const BayesAnnotatedDataset& data, const TeacherOutput* teacher,
                      const TrainConfig& config, RandomStream& stream) {
  check_requirements(data, teacher, config.loss_kind, model);
  if (!(config.learning_rate > 0.0)) throw ParamError("learning rate must be > 0");
  if (config.batch_size < 1) throw ParamError("batch size must be >= 1");
  if (config.weight_decay < 0.0) throw ParamError("weight decay must be >= 0");

  TrainResult result;
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vec grad(model.params().size());
  auto params = model.params();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, stream);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const double batch_loss = batch_loss_and_gradient(model, data, teacher, config.loss_kind,
                                                        config.scheme, batch, grad);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      for (std::size_t k = 0; k < params.size(); ++k) {
        params[k] -= config.learning_rate * (grad[k] + config.weight_decay * params[k]);
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss) ||
        !std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); })) {
      throw Error("training diverged at epoch " + std::to_string(epoch + 1));
    }
    result.epoch_losses.push_back(epoch_loss);
  }
  return result;
}

double grad_check(const Model& model, const BayesAnnotatedDataset& data, RiskEstimatorKind kind,
                  const TeacherOutput* teacher, double eps, const NegativeWeightScheme& scheme) {
  if (eps < 1e-7 || eps > 1e-3) throw ParamError("grad_check eps must lie in [1e-7, 1e-3]");
  check_requirements(data, teacher, kind, model);
  std::vector<std::size_t> idx(std::min<std::size_t>(5, data.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});

  Vec analytic(model.params().size());
  batch_loss_and_gradient(model, data, teacher, kind, scheme, idx, analytic);

  std::unique_ptr<Model> probe = model.clone();
  auto p = probe->params();
  Vec scratch(p.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double saved = p[k];
    p[k] = saved + eps;
    const double up = batch_loss_and_gradient(*probe, data, teacher, kind, scheme, idx, scratch);
    p[k] = saved - eps;
    const double down = batch_loss_and_gradient(*probe, data, teacher, kind, scheme, idx, scratch);
    p[k] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-4});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
  }
  return worst;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void write_checkpoint(const Model& model, std::ostream& out) {
  const auto params = model.params();
  for (const auto& b : model.blocks()) {
    out << b.name << ' ' << b.rows << ' ' << b.cols;
    for (std::size_t i = 0; i < b.rows * b.cols; ++i) out << ' ' << format_double(params[b.offset + i]);
    out << '\n';
  }
}

std::string checkpoint_string(const Model& model) {
  std::ostringstream ss;
  write_checkpoint(model, ss);
  return ss.str();
}

void read_checkpoint(Model& model, std::istream& in) {
  auto params = model.params();
  std::string line;
  std::size_t lineno = 0;
  for (const auto& b : model.blocks()) {
    do {
      if (!std::getline(in, line)) throw ParseError("checkpoint is missing block " + b.name, lineno);
      ++lineno;
    } while (line.empty());
    std::istringstream ls(line);
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(ls >> name >> rows >> cols)) throw ParseError("malformed block header", lineno);
    if (name != b.name || rows != b.rows || cols != b.cols) {
      throw ParseError("block " + name + " does not match model block " + b.name, lineno);
    }
    std::string tok;
    for (std::size_t i = 0; i < rows * cols; ++i) {
      if (!(ls >> tok)) throw ParseError("block " + name + " has too few values", lineno);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("invalid value '" + tok + "'", lineno);
      }
      params[b.offset + i] = v;
    }
    if (ls >> tok) throw ParseError("block " + name + " has too many values", lineno);
  }
}

}  // namespace distlab
