#pragma once

// Trainable students/teachers: a linear softmax model and a one-hidden-layer
// MLP, both with parameters in one flat buffer, plus a minibatch SGD trainer
// and a finite-difference gradient checker.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distlab/datagen.hpp"
#include "distlab/losses.hpp"
#include "distlab/numkit.hpp"
#include "distlab/predictor.hpp"
#include "distlab/teachers.hpp"

namespace distlab {

// A named rows x cols view into a model's flat parameter buffer.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
};

class Model : public LogitPredictor {
 public:
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }

  // Adds d(loss)/d(params) to `grad` given d(loss)/d(logits) at input x.
  virtual void backprop(std::span<const double> x, std::span<const double> dlogits,
                        std::span<double> grad) const = 0;
  virtual std::unique_ptr<Model> clone() const = 0;

 protected:
  void add_block(std::string name, std::size_t rows, std::size_t cols);
  std::span<double> block(std::size_t i) {
    return {params_.data() + blocks_[i].offset, blocks_[i].rows * blocks_[i].cols};
  }
  std::span<const double> block(std::size_t i) const {
    return {params_.data() + blocks_[i].offset, blocks_[i].rows * blocks_[i].cols};
  }

  Vec params_;
  std::vector<ParamBlock> blocks_;
};

// logits = W x + b with W: L x d.
class LinearModel final : public Model {
 public:
  LinearModel(std::size_t input_dim, std::size_t num_classes);

  std::size_t input_dim() const override { return dim_; }
  std::size_t num_classes() const override { return classes_; }
  Vec predict_logits(std::span<const double> x) const override;
  void backprop(std::span<const double> x, std::span<const double> dlogits,
                std::span<double> grad) const override;
  std::unique_ptr<Model> clone() const override { return std::make_unique<LinearModel>(*this); }

  double weight(std::size_t cls, std::size_t j) const { return params_[cls * dim_ + j]; }
  double& weight(std::size_t cls, std::size_t j) { return params_[cls * dim_ + j]; }
  double bias(std::size_t cls) const { return params_[classes_ * dim_ + cls]; }
  double& bias(std::size_t cls) { return params_[classes_ * dim_ + cls]; }

 private:
  std::size_t dim_;
  std::size_t classes_;
};

enum class Activation { kRelu, kIdentity };

// logits = W2 act(W1 x + b1) + b2.
class MLPModel final : public Model {
 public:
  MLPModel(std::size_t input_dim, std::size_t hidden, std::size_t num_classes,
           Activation activation = Activation::kRelu);

  std::size_t input_dim() const override { return dim_; }
  std::size_t num_classes() const override { return classes_; }
  std::size_t hidden() const noexcept { return hidden_; }
  Activation activation() const noexcept { return activation_; }
  Vec predict_logits(std::span<const double> x) const override;
  void backprop(std::span<const double> x, std::span<const double> dlogits,
                std::span<double> grad) const override;
  std::unique_ptr<Model> clone() const override { return std::make_unique<MLPModel>(*this); }

  std::span<double> hidden_weights() { return block(0); }
  std::span<double> hidden_bias() { return block(1); }
  std::span<double> output_weights() { return block(2); }
  std::span<double> output_bias() { return block(3); }

 private:
  void hidden_activations(std::span<const double> x, std::span<double> pre,
                          std::span<double> post) const;

  std::size_t dim_;
  std::size_t hidden_;
  std::size_t classes_;
  Activation activation_;
};

// Weights ~ N(0, 1/fan_in), biases zero.
void init_params(Model& model, RandomStream& stream);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  RiskEstimatorKind loss_kind = RiskEstimatorKind::kOneHot;
  NegativeWeightScheme scheme{};
};

struct TrainResult {
  Vec epoch_losses;  // mean per-example loss over each epoch's minibatches
};

// Minibatch SGD with per-epoch reshuffling drawn from `stream`. `teacher` is
// snapshotted by the caller and required for distilled/double_distilled;
// bayes_distilled reads p* from the dataset. Throws Error("training
// diverged ...") on a non-finite loss.
TrainResult train_sgd(Model& model, const BayesAnnotatedDataset& data, const TeacherOutput* teacher,
                      const TrainConfig& config, RandomStream& stream);

// Mean loss and its gradient over the given example indices.
double batch_loss_and_gradient(const Model& model, const BayesAnnotatedDataset& data,
                               const TeacherOutput* teacher, RiskEstimatorKind kind,
                               const NegativeWeightScheme& scheme,
                               std::span<const std::size_t> indices, std::span<double> grad);

// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-4)
// using central differences on the first min(5, N) examples.
double grad_check(const Model& model, const BayesAnnotatedDataset& data,
                  RiskEstimatorKind kind, const TeacherOutput* teacher, double eps,
                  const NegativeWeightScheme& scheme = {});

// Checkpoint text: one line per block, "name rows cols v v v ...".
void write_checkpoint(const Model& model, std::ostream& out);
std::string checkpoint_string(const Model& model);
// Reads values into an already-shaped model; block names and shapes must match.
void read_checkpoint(Model& model, std::istream& in);

}  // namespace distlab
