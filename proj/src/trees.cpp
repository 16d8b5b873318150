#include "distlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distlab/error.hpp"

namespace distlab {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t input_dim,
                           std::size_t num_classes, std::size_t max_depth)
    : nodes_(std::move(nodes)), dim_(input_dim), classes_(num_classes), max_depth_(max_depth) {}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

const Vec& DecisionTree::predict_probs(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw ParamError("input has dimension " + std::to_string(x.size()) + ", tree expects " +
                     std::to_string(dim_));
  }
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    const int next = x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                    : node->right;
    node = &nodes_[static_cast<std::size_t>(next)];
  }
  return node->leaf_probs;
}

Vec DecisionTree::predict_logits(std::span<const double> x) const {
  const Vec& p = predict_probs(x);
  Vec out(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) out[c] = safe_log(p[c]);
  return out;
}

double DecisionTree::training_impurity() const {
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& n : nodes_) {
    if (!n.is_leaf()) continue;
    total += n.weight;
    weighted += n.weight * n.impurity;
  }
  return total > 0.0 ? weighted / total : 0.0;
}

namespace {

// Greedy top-down growth minimizing the summed squared deviation of per-sample
// target vectors from their node mean. With one-hot targets this is weighted
// Gini impurity.
class Grower {
 public:
  enum class LeafRule { kLaplace, kMean };

  Grower(const DenseMatrix& features, const DenseMatrix& targets, std::size_t max_depth,
         std::size_t min_leaf, LeafRule rule)
      : features_(features), targets_(targets), max_depth_(max_depth),
        min_leaf_(std::max<std::size_t>(1, min_leaf)), rule_(rule) {}

  std::vector<TreeNode> grow(std::vector<std::size_t> sample) {
    nodes_.clear();
    build(std::move(sample), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double cost = 0.0;
    bool found = false;
  };

  // Two-pass SSE of the targets over `idx`, and their mean.
  double sse(std::span<const std::size_t> idx, Vec& mean_out) const {
    const std::size_t l = targets_.cols();
    mean_out.assign(l, 0.0);
    for (std::size_t i : idx) {
      const auto t = targets_.row(i);
      for (std::size_t c = 0; c < l; ++c) mean_out[c] += t[c];
    }
    for (double& m : mean_out) m /= static_cast<double>(idx.size());
    double s = 0.0;
    for (std::size_t i : idx) s += squared_distance(targets_.row(i), mean_out);
    return s;
  }

  Split best_split(std::vector<std::size_t>& idx) const {
    const std::size_t n = idx.size();
    const std::size_t l = targets_.cols();
    Split best;
    Vec left_sum(l), total_sum(l, 0.0);
    double total_sq = 0.0;
    for (std::size_t i : idx) {
      const auto t = targets_.row(i);
      for (std::size_t c = 0; c < l; ++c) {
        total_sum[c] += t[c];
        total_sq += t[c] * t[c];
      }
    }
    for (std::size_t f = 0; f < features_.cols(); ++f) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return features_(a, f) < features_(b, f);
      });
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      double left_sq = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto t = targets_.row(idx[k]);
        for (std::size_t c = 0; c < l; ++c) {
          left_sum[c] += t[c];
          left_sq += t[c] * t[c];
        }
        const double v = features_(idx[k], f);
        const double v_next = features_(idx[k + 1], f);
        if (!(v < v_next)) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        double left_norm = 0.0, right_norm = 0.0;
        for (std::size_t c = 0; c < l; ++c) {
          left_norm += left_sum[c] * left_sum[c];
          const double r = total_sum[c] - left_sum[c];
          right_norm += r * r;
        }
        const double cost = (left_sq - left_norm / static_cast<double>(nl)) +
                            (total_sq - left_sq - right_norm / static_cast<double>(nr));
        if (!best.found || cost < best.cost) {
          best = {f, 0.5 * (v + v_next), cost, true};
          // Midpoints of adjacent doubles can round up onto v_next.
          if (!(best.threshold < v_next)) best.threshold = v;
        }
      }
    }
    return best;
  }

  int build(std::vector<std::size_t> idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Vec node_mean;
    const double node_sse = sse(idx, node_mean);
    {
      TreeNode& node = nodes_.back();
      node.weight = static_cast<double>(idx.size());
      node.impurity = node_sse / node.weight;
    }
    const bool stop = depth >= max_depth_ || idx.size() < 2 * min_leaf_ || node_sse <= 1e-14;
    Split split;
    if (!stop) split = best_split(idx);
    if (!split.found) {
      make_leaf(id, idx, node_mean);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (features_(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int left_id = build(std::move(left), depth + 1);
    const int right_id = build(std::move(right), depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    return id;
  }

  void make_leaf(int id, std::span<const std::size_t> idx, const Vec& mean) {
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    if (rule_ == LeafRule::kMean) {
      node.leaf_probs = mean;
      return;
    }
    // Laplace add-one on class counts; targets are one-hot so mean * n = counts.
    const double n = static_cast<double>(idx.size());
    const double l = static_cast<double>(mean.size());
    node.leaf_probs.resize(mean.size());
    for (std::size_t c = 0; c < mean.size(); ++c) node.leaf_probs[c] = (std::round(mean[c] * n) + 1.0) / (n + l);
  }

  const DenseMatrix& features_;
  const DenseMatrix& targets_;
  std::size_t max_depth_;
  std::size_t min_leaf_;
  LeafRule rule_;
  std::vector<TreeNode> nodes_;
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

DecisionTree fit_tree_classifier(const BayesAnnotatedDataset& data, std::size_t max_depth,
                                 std::size_t min_leaf, std::span<const std::size_t> sample) {
  if (data.size() == 0) throw ParamError("cannot fit a tree to an empty dataset");
  const auto l = static_cast<std::size_t>(data.num_classes);
  DenseMatrix one_hot(data.size(), l);
  for (std::size_t i = 0; i < data.size(); ++i) {
    one_hot(i, static_cast<std::size_t>(data.labels[i])) = 1.0;
  }
  std::vector<std::size_t> idx =
      sample.empty() ? all_rows(data.size()) : std::vector<std::size_t>(sample.begin(), sample.end());
  Grower grower(data.features, one_hot, max_depth, min_leaf, Grower::LeafRule::kLaplace);
  return DecisionTree(grower.grow(std::move(idx)), data.dim(), l, max_depth);
}

DecisionTree fit_tree_regressor_to_probs(const DenseMatrix& features,
                                         const DenseMatrix& target_probs, std::size_t max_depth,
                                         std::size_t min_leaf) {
  if (features.rows() == 0) throw ParamError("cannot fit a tree to an empty dataset");
  if (target_probs.rows() != features.rows()) throw ParamError("target rows do not match features");
  for (std::size_t i = 0; i < target_probs.rows(); ++i) {
    if (!is_prob_vector(target_probs.row(i))) {
      throw ParamError("target row " + std::to_string(i) + " is not a distribution");
    }
  }
  Grower grower(features, target_probs, max_depth, min_leaf, Grower::LeafRule::kMean);
  return DecisionTree(grower.grow(all_rows(features.rows())), features.cols(), target_probs.cols(),
                      max_depth);
}

RandomForest::RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {
  if (trees_.empty()) throw ParamError("a forest needs at least one tree");
}

Vec RandomForest::predict_probs(std::span<const double> x) const {
  Vec out(num_classes(), 0.0);
  for (const auto& t : trees_) {
    const Vec& p = t.predict_probs(x);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += p[c];
  }
  for (double& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

Vec RandomForest::predict_logits(std::span<const double> x) const {
  Vec p = predict_probs(x);
  for (double& v : p) v = safe_log(v);
  return p;
}

double RandomForest::training_impurity() const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.training_impurity();
  return s / static_cast<double>(trees_.size());
}

RandomForest fit_forest(const BayesAnnotatedDataset& data, const ForestOptions& options,
                        RandomStream& stream) {
  if (options.num_estimators < 1) throw ParamError("a forest needs at least one tree");
  std::vector<DecisionTree> trees;
  trees.reserve(options.num_estimators);
  const std::size_t n = data.size();
  std::vector<std::size_t> sample(n);
  for (std::size_t t = 0; t < options.num_estimators; ++t) {
    if (options.bootstrap) {
      for (auto& s : sample) s = stream.uniform_index(n);
    } else {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    trees.push_back(fit_tree_classifier(data, options.max_depth, options.min_leaf, sample));
  }
  return RandomForest(std::move(trees));
}

Vec tree_predict_probs(const DecisionTree& tree, std::span<const double> x) {
  return tree.predict_probs(x);
}

Vec tree_predict_probs(const RandomForest& forest, std::span<const double> x) {
  return forest.predict_probs(x);
}

DenseMatrix predict_all_probs(const DecisionTree& tree, const DenseMatrix& features) {
  DenseMatrix out(features.rows(), tree.num_classes());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const Vec& p = tree.predict_probs(features.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

DenseMatrix predict_all_probs(const RandomForest& forest, const DenseMatrix& features) {
  DenseMatrix out(features.rows(), forest.num_classes());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const Vec p = forest.predict_probs(features.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace distlab
