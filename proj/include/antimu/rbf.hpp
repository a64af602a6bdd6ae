#pragma once

// Gaussian RBF classifier: hidden units on fixed centers, a linear output
// layer over K classes, argmax decision with rejection below a threshold.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/features.hpp"
#include "antimu/raster.hpp"

namespace antimu {

struct LabeledSample {
  FeatureVector features;
  int label = 0;  // 1..K
};

struct RbfModel {
  std::vector<FeatureVector> centers;
  std::vector<double> widths;
  std::vector<std::vector<double>> weights;  // K rows of centers.size()
  std::vector<double> biases;                // K
  double reject_threshold = 0.2;
  std::size_t class_count = 0;

  std::size_t neurons() const { return centers.size(); }
  std::size_t dimension() const { return centers.empty() ? 0 : centers.front().size(); }
  bool trained() const {
    return class_count > 0 && weights.size() == class_count && biases.size() == class_count;
  }

  bool operator==(const RbfModel&) const = default;
};

inline std::vector<double> hidden_activations(const RbfModel& model, const FeatureVector& x) {
  if (x.size() != model.dimension())
    throw shape_error("input of dimension " + std::to_string(x.size()) +
                      " for a model of dimension " + std::to_string(model.dimension()));
  std::vector<double> phi(model.neurons());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    double d2 = 0.0;
    const auto& c = model.centers[j];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = x[i] - c[i];
      d2 += t * t;
    }
    const double s = model.widths[j];
    phi[j] = std::exp(-d2 / (2.0 * s * s));
  }
  return phi;
}

inline std::vector<double> output_scores(const RbfModel& model, const std::vector<double>& phi) {
  std::vector<double> scores(model.class_count);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    double s = model.biases[k];
    const auto& w = model.weights[k];
    for (std::size_t j = 0; j < phi.size(); ++j) s += w[j] * phi[j];
    scores[k] = s;
  }
  return scores;
}

// Class in 1..K (lowest index on ties), or kUnknown when the best score is
// below theta. theta = 0 disables rejection.
inline int decide(const std::vector<double>& scores, double reject_threshold) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  if (reject_threshold > 0.0 && scores[best] < reject_threshold) return kUnknown;
  return static_cast<int>(best) + 1;
}

inline int classify(const RbfModel& model, const FeatureVector& x) {
  if (!model.trained()) throw state_error("classify called on an untrained model");
  return decide(output_scores(model, hidden_activations(model, x)), model.reject_threshold);
}

// sigma_j = mean distance from c_j to its q nearest other centers.
inline std::vector<double> initial_widths(const std::vector<FeatureVector>& centers,
                                          std::size_t q = 2) {
  if (centers.empty()) throw input_error("no centers to size");
  std::vector<double> widths(centers.size(), 1.0);
  if (centers.size() == 1) return widths;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    std::vector<double> dist;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (k == j) continue;
      double d2 = 0.0;
      for (std::size_t i = 0; i < centers[j].size(); ++i) {
        const double t = centers[j][i] - centers[k][i];
        d2 += t * t;
      }
      dist.push_back(std::sqrt(d2));
    }
    const std::size_t take = std::min(q, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    double mean = 0.0;
    for (std::size_t i = 0; i < take; ++i) mean += dist[i];
    mean /= static_cast<double>(take);
    widths[j] = mean;
  }
  // Coincident centers would give a zero width; borrow the smallest positive one.
  double smallest = std::numeric_limits<double>::infinity();
  for (double w : widths)
    if (w > 0.0) smallest = std::min(smallest, w);
  if (!std::isfinite(smallest)) smallest = 1.0;
  for (double& w : widths)
    if (!(w > 0.0)) w = smallest;
  return widths;
}

// Percentage of samples whose prediction equals their label (UNKNOWN is wrong).
inline double training_rate(const RbfModel& model, const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw input_error("rate of an empty sample set");
  std::size_t correct = 0;
  for (const auto& s : samples)
    if (classify(model, s.features) == s.label) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(samples.size());
}

/// Fits output weights and biases by ridge least squares from hidden
/// activations to one-hot targets. Biases are not penalized, so a very
/// large ridge factor drives the weights to zero and the biases to the
/// class frequencies. Returns the training classification rate.
inline double fit_output_weights(RbfModel& model, const std::vector<LabeledSample>& samples,
                                 double ridge) {
  if (model.class_count == 0) throw input_error("model has no classes");
  if (model.centers.empty() || model.widths.size() != model.centers.size())
    throw state_error("model needs centers and widths before fitting weights");
  if (!(ridge >= 0.0)) throw config_error("ridge factor must be >= 0");
  const std::size_t K = model.class_count;
  std::vector<std::size_t> per_class(K, 0);
  for (const auto& s : samples) {
    if (s.label < 1 || static_cast<std::size_t>(s.label) > K)
      throw input_error("sample label " + std::to_string(s.label) + " outside [1, " +
                        std::to_string(K) + "]");
    ++per_class[static_cast<std::size_t>(s.label - 1)];
  }
  for (std::size_t k = 0; k < K; ++k)
    if (per_class[k] == 0)
      throw input_error("class " + std::to_string(k + 1) + " has no training samples");

  const std::size_t M = model.neurons();
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(M + 1));
  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(K));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    const auto act = hidden_activations(model, s.features);
    for (std::size_t j = 0; j < M; ++j) phi(r, static_cast<Eigen::Index>(j)) = act[j];
    phi(r, static_cast<Eigen::Index>(M)) = 1.0;
    target(r, s.label - 1) = 1.0;
  }

  Eigen::MatrixXd normal = phi.transpose() * phi;
  for (std::size_t j = 0; j < M; ++j) normal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += ridge;
  // A vanishing ridge with collinear activations leaves the system singular;
  // a floor relative to the diagonal keeps the factorization well defined.
  const double floor = 1e-12 * std::max(1.0, normal.diagonal().maxCoeff());
  for (std::size_t j = 0; j < M; ++j)
    normal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += floor;
  const Eigen::MatrixXd solution = normal.ldlt().solve(phi.transpose() * target);

  model.weights.assign(K, std::vector<double>(M));
  model.biases.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < M; ++j)
      model.weights[k][j] = solution(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    model.biases[k] = solution(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(k));
  }
  for (const auto& row : model.weights)
    for (double w : row)
      if (!std::isfinite(w)) throw state_error("ridge solve produced non-finite weights");
  return training_rate(model, samples);
}

// ---------------------------------------------------------------------------
// Text serialization. Reals are written in shortest round-trip form, so
// read_model(write_model(m)) == m exactly. Layout (docs/formats.md):
//
//   antimu-rbf 1
//   classes K
//   dimension D
//   neurons M
//   threshold <theta>
//   centers        (M lines of D reals)
//   widths         (1 line of M reals)
//   weights        (K lines of M reals)
//   biases         (1 line of K reals)
//   end

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw format_error("cannot format real");
  return std::string(buf, ptr);
}

inline double parse_real(const std::string& token, const std::string& what = "real") {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw format_error("bad " + what + ": '" + token + "'");
  return v;
}

namespace detail {

inline void write_row(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << format_real(row[i]);
  os << '\n';
}

inline std::string expect_line(std::istream& is, const std::string& context) {
  std::string line;
  if (!std::getline(is, line)) throw format_error("unexpected end of model data in " + context);
  return line;
}

inline std::vector<double> read_row(std::istream& is, std::size_t n, const std::string& context) {
  std::istringstream ls(expect_line(is, context));
  std::vector<double> row;
  std::string tok;
  while (ls >> tok) row.push_back(parse_real(tok, context));
  if (row.size() != n)
    throw format_error(context + ": expected " + std::to_string(n) + " values, got " +
                       std::to_string(row.size()));
  return row;
}

inline std::size_t read_count(std::istream& is, const std::string& key) {
  std::istringstream ls(expect_line(is, key));
  std::string k;
  long long v = -1;
  if (!(ls >> k >> v) || k != key || v < 0) throw format_error("expected '" + key + " <count>'");
  return static_cast<std::size_t>(v);
}

inline void expect_keyword(std::istream& is, const std::string& key) {
  const std::string line = expect_line(is, key);
  if (line != key) throw format_error("expected '" + key + "', got '" + line + "'");
}

}  // namespace detail

inline void write_model(std::ostream& os, const RbfModel& m) {
  os << "antimu-rbf 1\n";
  os << "classes " << m.class_count << '\n';
  os << "dimension " << m.dimension() << '\n';
  os << "neurons " << m.neurons() << '\n';
  os << "threshold " << format_real(m.reject_threshold) << '\n';
  os << "centers\n";
  for (const auto& c : m.centers) detail::write_row(os, c);
  os << "widths\n";
  detail::write_row(os, m.widths);
  os << "weights\n";
  for (const auto& w : m.weights) detail::write_row(os, w);
  os << "biases\n";
  detail::write_row(os, m.biases);
  os << "end\n";
}

inline RbfModel read_model(std::istream& is) {
  detail::expect_keyword(is, "antimu-rbf 1");
  RbfModel m;
  m.class_count = detail::read_count(is, "classes");
  const std::size_t dim = detail::read_count(is, "dimension");
  const std::size_t neurons = detail::read_count(is, "neurons");
  {
    std::istringstream ls(detail::expect_line(is, "threshold"));
    std::string k, v;
    if (!(ls >> k >> v) || k != "threshold") throw format_error("expected 'threshold <real>'");
    m.reject_threshold = parse_real(v, "threshold");
  }
  detail::expect_keyword(is, "centers");
  for (std::size_t j = 0; j < neurons; ++j) m.centers.push_back(detail::read_row(is, dim, "centers"));
  detail::expect_keyword(is, "widths");
  m.widths = detail::read_row(is, neurons, "widths");
  detail::expect_keyword(is, "weights");
  for (std::size_t k = 0; k < m.class_count; ++k)
    m.weights.push_back(detail::read_row(is, neurons, "weights"));
  detail::expect_keyword(is, "biases");
  m.biases = detail::read_row(is, m.class_count, "biases");
  detail::expect_keyword(is, "end");
  for (double w : m.widths)
    if (!(w > 0.0)) throw format_error("model widths must be positive");
  return m;
}

}  // namespace antimu
