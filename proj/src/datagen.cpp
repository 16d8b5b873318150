#include "distlab/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "distlab/error.hpp"

namespace distlab {

void BayesAnnotatedDataset::validate() const {
  const std::size_t n = labels.size();
  if (n < 1) throw ParamError("dataset must contain at least one example");
  if (features.rows() != n) throw ParamError("feature rows do not match label count");
  if (features.cols() < 1) throw ParamError("dataset must have at least one feature");
  if (num_classes < 2) throw ParamError("dataset must have at least two classes");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw ParamError("label out of range");
  }
  if (bayes_probs) {
    if (bayes_probs->rows() != n ||
        bayes_probs->cols() != static_cast<std::size_t>(num_classes)) {
      throw ParamError("bayes_probs shape does not match dataset");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_prob_vector(bayes_probs->row(i))) {
        throw ParamError("bayes_probs row " + std::to_string(i) + " is not a distribution");
      }
    }
  }
}

Vec two_gaussians_theta(int dim, double separation) {
  if (dim < 1) throw ParamError("dimension must be >= 1");
  if (!(separation > 0.0)) throw ParamError("separation must be > 0");
  const double component = separation / std::sqrt(static_cast<double>(dim));
  // theta = 2 mu = r (1,...,1) / sqrt(d)
  return Vec(static_cast<std::size_t>(dim), component);
}

BayesAnnotatedDataset gen_two_gaussians(const SyntheticSpec& spec, RandomStream& stream) {
  if (spec.num_classes != 2) throw ParamError("two_gaussians requires num_classes = 2");
  const Vec theta = two_gaussians_theta(spec.dim, spec.separation);
  const auto d = static_cast<std::size_t>(spec.dim);
  const double mu = theta[0] / 2.0;
  const std::size_t n = spec.sample_count;
  if (n < 1) throw ParamError("sample_count must be >= 1");

  BayesAnnotatedDataset out;
  out.num_classes = 2;
  out.features = DenseMatrix(n, d);
  out.bayes_probs = DenseMatrix(n, 2);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = stream.bernoulli(0.5) ? 1.0 : -1.0;
    auto x = out.features.row(i);
    for (std::size_t j = 0; j < d; ++j) x[j] = sign * mu + stream.normal();
    const double q = sigmoid(dot(theta, x));
    (*out.bayes_probs)(i, 0) = 1.0 - q;
    (*out.bayes_probs)(i, 1) = q;
    out.labels[i] = stream.bernoulli(q) ? 1 : 0;
  }
  return out;
}

double slab_eta(std::span<const double> x) {
  double inf_norm = 0.0;
  for (double v : x) inf_norm = std::max(inf_norm, std::abs(v));
  return sigmoid(2.0 * (inf_norm - 0.5));
}

BayesAnnotatedDataset gen_slab2d(std::size_t n, RandomStream& stream) {
  if (n < 1) throw ParamError("sample count must be >= 1");
  BayesAnnotatedDataset out;
  out.num_classes = 2;
  out.features = DenseMatrix(n, 2);
  out.bayes_probs = DenseMatrix(n, 2);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = out.features.row(i);
    x[0] = stream.normal();
    x[1] = stream.normal();
    const double eta = slab_eta(x);
    (*out.bayes_probs)(i, 0) = 1.0 - eta;
    (*out.bayes_probs)(i, 1) = eta;
    out.labels[i] = stream.bernoulli(eta) ? 1 : 0;
  }
  return out;
}

DenseMatrix draw_mixture_means(int num_classes, int dim, double radius,
                               RandomStream& means_stream) {
  if (num_classes < 2) throw ParamError("multiclass mixture requires num_classes >= 2");
  if (dim < 1) throw ParamError("dimension must be >= 1");
  DenseMatrix means(static_cast<std::size_t>(num_classes), static_cast<std::size_t>(dim));
  for (std::size_t c = 0; c < means.rows(); ++c) {
    auto row = means.row(c);
    double norm_sq = 0.0;
    while (norm_sq < 1e-12) {
      for (double& v : row) v = means_stream.normal();
      norm_sq = dot(row, row);
    }
    const double scale = radius / std::sqrt(norm_sq);
    for (double& v : row) v *= scale;
  }
  return means;
}

Vec mixture_posterior(const DenseMatrix& means, std::span<const double> x) {
  Vec scores(means.rows());
  for (std::size_t c = 0; c < means.rows(); ++c) {
    const auto mu = means.row(c);
    scores[c] = dot(mu, x) - 0.5 * dot(mu, mu);
  }
  softmax_inplace(scores);
  return scores;
}

BayesAnnotatedDataset gen_mixture_with_means(const DenseMatrix& means, std::size_t n,
                                             RandomStream& stream) {
  if (means.rows() < 2) throw ParamError("multiclass mixture requires num_classes >= 2");
  if (n < 1) throw ParamError("sample_count must be >= 1");
  const std::size_t num_classes = means.rows();
  const std::size_t d = means.cols();
  BayesAnnotatedDataset out;
  out.num_classes = static_cast<int>(num_classes);
  out.features = DenseMatrix(n, d);
  out.bayes_probs = DenseMatrix(n, num_classes);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t component = stream.uniform_index(num_classes);
    auto x = out.features.row(i);
    const auto mu = means.row(component);
    for (std::size_t j = 0; j < d; ++j) x[j] = mu[j] + stream.normal();
    const Vec post = mixture_posterior(means, x);
    std::copy(post.begin(), post.end(), out.bayes_probs->row(i).begin());
    out.labels[i] = static_cast<int>(stream.categorical(post));
  }
  return out;
}

BayesAnnotatedDataset gen_multiclass_mixture(const SyntheticSpec& spec, RandomStream& stream) {
  if (spec.num_classes < 2) throw ParamError("multiclass mixture requires num_classes >= 2");
  RandomStream means_stream = derive_stream(spec.seed, 0);
  const DenseMatrix means =
      draw_mixture_means(spec.num_classes, spec.dim, spec.mixture_radius, means_stream);
  return gen_mixture_with_means(means, spec.sample_count, stream);
}

BayesAnnotatedDataset generate(const SyntheticSpec& spec, RandomStream& stream) {
  switch (spec.kind) {
    case GeneratorKind::kTwoGaussians:
      return gen_two_gaussians(spec, stream);
    case GeneratorKind::kSlab2d:
      return gen_slab2d(spec.sample_count, stream);
    case GeneratorKind::kMulticlassMixture:
      return gen_multiclass_mixture(spec, stream);
  }
  throw ParamError("unknown generator kind");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  return v;
}

long long parse_int(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid integer '" + std::string(tok) + "'", line);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

}  // namespace

BayesAnnotatedDataset parse_dense_csv(const std::string& text, std::optional<int> num_classes) {
  BayesAnnotatedDataset out;
  std::size_t cols = 0;
  int max_label = -1;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() < 2) throw ParseError("expected features followed by a label", lineno);
    if (cols == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw ParseError("expected " + std::to_string(cols) + " columns, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    Vec row(cols - 1);
    for (std::size_t j = 0; j + 1 < cols; ++j) row[j] = parse_double(fields[j], lineno);
    const long long label = parse_int(fields.back(), lineno);
    if (label < 0 || (num_classes && label >= *num_classes)) {
      throw ParseError("label " + std::to_string(label) + " out of range", lineno);
    }
    out.features.append_row(row);
    out.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (out.labels.empty()) throw ParseError("no examples in CSV input", 0);
  out.num_classes = num_classes.value_or(std::max(2, max_label + 1));
  out.validate();
  return out;
}

BayesAnnotatedDataset load_dense_csv(const std::filesystem::path& path,
                                     std::optional<int> num_classes) {
  return parse_dense_csv(read_file(path), num_classes);
}

MultilabelDataset parse_multilabel_sparse(const std::string& text, int index_base) {
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw ParseError("missing header", 0);

  std::istringstream header{std::string(lines[first])};
  long long n = -1, d = -1, l = -1;
  if (!(header >> n >> d >> l) || n < 0 || d < 1 || l < 1) {
    throw ParseError("header must be 'N d L'", first + 1);
  }
  MultilabelDataset out;
  out.dim = static_cast<std::size_t>(d);
  out.num_labels = static_cast<int>(l);

  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = lines[i];
    if (trim(line).empty()) continue;
    MultilabelRecord rec;

    // The label field is everything before the first whitespace, unless the
    // line starts with whitespace or the first token is already a feature.
    std::string_view rest = line;
    if (!std::isspace(static_cast<unsigned char>(line.front()))) {
      const std::size_t ws = line.find_first_of(" \t");
      const std::string_view first_tok = line.substr(0, ws);
      if (first_tok.find(':') == std::string_view::npos) {
        for (auto tok : split(first_tok, ',')) {
          if (trim(tok).empty()) continue;
          const long long y = parse_int(tok, lineno);
          if (y < 0 || y >= l) {
            throw ParseError("label " + std::to_string(y) + " out of range", lineno);
          }
          if (std::find(rec.labels.begin(), rec.labels.end(), y) == rec.labels.end()) {
            rec.labels.push_back(static_cast<int>(y));
          }
        }
        rest = ws == std::string_view::npos ? std::string_view{} : line.substr(ws);
      }
    }
    std::istringstream feats{std::string(rest)};
    std::string tok;
    while (feats >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("feature '" + tok + "' lacks ':'", lineno);
      const long long idx = parse_int(std::string_view(tok).substr(0, colon), lineno) - index_base;
      if (idx < 0 || idx >= d) {
        throw ParseError("feature index " + tok.substr(0, colon) + " out of range", lineno);
      }
      const double val = parse_double(std::string_view(tok).substr(colon + 1), lineno);
      rec.features.emplace_back(static_cast<std::size_t>(idx), val);
    }
    out.records.push_back(std::move(rec));
  }
  if (static_cast<long long>(out.records.size()) != n) {
    throw ParseError("header declares " + std::to_string(n) + " records, body has " +
                         std::to_string(out.records.size()),
                     first + 1);
  }
  return out;
}

MultilabelDataset load_multilabel_sparse(const std::filesystem::path& path, int index_base) {
  return parse_multilabel_sparse(read_file(path), index_base);
}

BayesAnnotatedDataset expand_multilabel_to_multiclass(const MultilabelDataset& data) {
  BayesAnnotatedDataset out;
  out.num_classes = std::max(2, data.num_labels);
  Vec dense(data.dim);
  for (const auto& rec : data.records) {
    if (rec.labels.empty()) continue;
    std::fill(dense.begin(), dense.end(), 0.0);
    for (const auto& [idx, val] : rec.features) dense[idx] += val;
    for (int y : rec.labels) {
      out.features.append_row(dense);
      out.labels.push_back(y);
    }
  }
  if (out.labels.empty()) throw ParamError("expansion produced no examples (all records label-free)");
  return out;
}

}  // namespace distlab
