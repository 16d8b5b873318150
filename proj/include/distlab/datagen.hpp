#pragma once

// Synthetic generators with known Bayes class-probabilities, plus dense CSV
// and sparse multilabel ingestion.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distlab/numkit.hpp"

namespace distlab {

struct BayesAnnotatedDataset {
  DenseMatrix features;                // N x d
  std::vector<int> labels;             // N, values in [0, num_classes)
  std::optional<DenseMatrix> bayes_probs;  // N x L when known
  int num_classes = 2;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  bool has_bayes() const noexcept { return bayes_probs.has_value(); }

  // Throws ParamError when any structural invariant is broken.
  void validate() const;
};

enum class GeneratorKind { kTwoGaussians, kSlab2d, kMulticlassMixture };

struct SyntheticSpec {
  GeneratorKind kind = GeneratorKind::kTwoGaussians;
  int dim = 10;
  int num_classes = 2;
  double separation = 6.324555320336759;  // 2 * sqrt(10)
  double mixture_radius = 3.0;
  std::size_t sample_count = 100;
  std::uint64_t seed = 0;
};

// Two-Gaussian problem: class means +-mu with mu = (r/2)(1,...,1)/sqrt(d),
// identity covariance and equal priors. Posterior p*(y=1|x) = sigmoid(theta^T x)
// with theta = 2 mu.
Vec two_gaussians_theta(int dim, double separation);
BayesAnnotatedDataset gen_two_gaussians(const SyntheticSpec& spec, RandomStream& stream);

// eta(x) = sigmoid(2 (||x||_inf - 0.5)) for x ~ N(0, I_2).
double slab_eta(std::span<const double> x);
BayesAnnotatedDataset gen_slab2d(std::size_t n, RandomStream& stream);

// Class means on the sphere of radius spec.mixture_radius. Means are drawn
// from `means_stream`, samples from `stream`.
DenseMatrix draw_mixture_means(int num_classes, int dim, double radius, RandomStream& means_stream);
// Exact posterior softmax_y(mu_y^T x - |mu_y|^2 / 2).
Vec mixture_posterior(const DenseMatrix& means, std::span<const double> x);
BayesAnnotatedDataset gen_mixture_with_means(const DenseMatrix& means, std::size_t n,
                                             RandomStream& stream);
BayesAnnotatedDataset gen_multiclass_mixture(const SyntheticSpec& spec, RandomStream& stream);

// Dispatches on spec.kind.
BayesAnnotatedDataset generate(const SyntheticSpec& spec, RandomStream& stream);

// CSV: d feature columns then an integer label, no header. The class count is
// max(label)+1 (at least 2) unless num_classes is given.
BayesAnnotatedDataset load_dense_csv(const std::filesystem::path& path,
                                     std::optional<int> num_classes = std::nullopt);
BayesAnnotatedDataset parse_dense_csv(const std::string& text,
                                      std::optional<int> num_classes = std::nullopt);

struct MultilabelRecord {
  std::vector<std::pair<std::size_t, double>> features;  // (index, value), zero-based
  std::vector<int> labels;
};

struct MultilabelDataset {
  std::size_t dim = 0;
  int num_labels = 0;
  std::vector<MultilabelRecord> records;
};

// Header "N d L"; each line "l1,l2,... idx:val idx:val ...". index_base is
// subtracted from every feature index (use 1 for one-based files).
MultilabelDataset load_multilabel_sparse(const std::filesystem::path& path, int index_base = 0);
MultilabelDataset parse_multilabel_sparse(const std::string& text, int index_base = 0);

// One multiclass example per (record, label) pair; records with no labels
// produce nothing.
BayesAnnotatedDataset expand_multilabel_to_multiclass(const MultilabelDataset& data);

}  // namespace distlab
