#pragma once

// Axis-aligned CART trees: a Gini classifier with Laplace-smoothed leaves, a
// squared-error regressor onto probability vectors, and bootstrap forests.
// Routing rule: go left iff x[feature] <= threshold.

#include <optional>
#include <span>
#include <vector>

#include "distlab/datagen.hpp"
#include "distlab/numkit.hpp"
#include "distlab/predictor.hpp"

namespace distlab {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Vec leaf_probs;        // leaves only
  double weight = 0.0;   // training samples reaching the node
  double impurity = 0.0; // Gini (classifier) or SSE per sample (regressor)

  bool is_leaf() const noexcept { return feature < 0; }
};

class DecisionTree final : public LogitPredictor {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t input_dim, std::size_t num_classes,
               std::size_t max_depth);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t max_depth() const noexcept { return max_depth_; }
  // Longest root-to-leaf path.
  std::size_t depth() const;
  std::size_t leaf_count() const;

  std::size_t input_dim() const override { return dim_; }
  std::size_t num_classes() const override { return classes_; }
  Vec predict_logits(std::span<const double> x) const override;
  const Vec& predict_probs(std::span<const double> x) const;

  // Sample-weighted mean leaf impurity on the tree's own training sample. For
  // the classifier this is the squared error of raw leaf frequencies against
  // one-hot labels; for the regressor, the squared error to the targets.
  double training_impurity() const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t dim_ = 0;
  std::size_t classes_ = 0;
  std::size_t max_depth_ = 0;
};

// `sample` lists training rows (repeats allowed, as from a bootstrap); empty
// means every row once.
DecisionTree fit_tree_classifier(const BayesAnnotatedDataset& data, std::size_t max_depth,
                                 std::size_t min_leaf = 1,
                                 std::span<const std::size_t> sample = {});

DecisionTree fit_tree_regressor_to_probs(const DenseMatrix& features,
                                         const DenseMatrix& target_probs, std::size_t max_depth,
                                         std::size_t min_leaf = 1);

class RandomForest final : public LogitPredictor {
 public:
  explicit RandomForest(std::vector<DecisionTree> trees);

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  std::size_t num_estimators() const noexcept { return trees_.size(); }

  std::size_t input_dim() const override { return trees_.front().input_dim(); }
  std::size_t num_classes() const override { return trees_.front().num_classes(); }
  Vec predict_logits(std::span<const double> x) const override;
  Vec predict_probs(std::span<const double> x) const;
  // Mean over members of DecisionTree::training_impurity.
  double training_impurity() const;

 private:
  std::vector<DecisionTree> trees_;
};

struct ForestOptions {
  std::size_t num_estimators = 3;
  std::size_t max_depth = 4;
  std::size_t min_leaf = 1;
  bool bootstrap = true;
};

RandomForest fit_forest(const BayesAnnotatedDataset& data, const ForestOptions& options,
                        RandomStream& stream);

Vec tree_predict_probs(const DecisionTree& tree, std::span<const double> x);
Vec tree_predict_probs(const RandomForest& forest, std::span<const double> x);
DenseMatrix predict_all_probs(const DecisionTree& tree, const DenseMatrix& features);
DenseMatrix predict_all_probs(const RandomForest& forest, const DenseMatrix& features);

}  // namespace distlab
