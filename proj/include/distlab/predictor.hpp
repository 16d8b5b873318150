#pragma once

#include <span>

#include "distlab/numkit.hpp"

namespace distlab {

// Anything that maps a feature row to L logits.
class LogitPredictor {
 public:
  virtual ~LogitPredictor() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual Vec predict_logits(std::span<const double> x) const = 0;
};

// Logits for every row of `features` (N x L).
DenseMatrix predict_all_logits(const LogitPredictor& model, const DenseMatrix& features);

}  // namespace distlab
