#pragma once

// Growing neural gas with utility (GNG-U). Used to place RBF centers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/random.hpp"

namespace antimu::gngu {

using Point = std::vector<double>;

struct Params {
  std::size_t max_nodes = 12;  // NbrNeur
  double eps_b = 0.05;         // winner learning rate
  double eps_n = 0.006;        // neighbor learning rate
  std::size_t lambda = 100;    // insertion interval, in samples
  double alpha = 0.5;          // error decay of the split nodes
  double d = 0.995;            // global error/utility decay per step
  double k_utility = 1000.0;   // removal threshold on max_error / min_utility
  std::size_t max_age = 88;
  std::size_t epochs = 5;
  // Final pass moving each node to the mean of the samples it wins.
  bool refine = true;

  bool operator==(const Params&) const = default;

  void validate() const {
    if (max_nodes < 2) throw config_error("gngu: max_nodes must be >= 2");
    if (!(0.0 < eps_n && eps_n < eps_b && eps_b < 1.0))
      throw config_error("gngu: need 0 < eps_n < eps_b < 1");
    if (lambda == 0 || epochs == 0 || max_age == 0)
      throw config_error("gngu: lambda, epochs and max_age must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0) || !(d > 0.0 && d <= 1.0))
      throw config_error("gngu: alpha and d must be in (0, 1]");
    if (!(k_utility > 0.0)) throw config_error("gngu: k_utility must be > 0");
  }
};

struct Node {
  Point position;
  double error = 0.0;
  double utility = 0.0;
};

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

// Network state. Edges live in a dense age matrix; -1 marks "no edge".
class Network {
 public:
  explicit Network(const Params& params) : params_(params) {}

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool connected(std::size_t a, std::size_t b) const { return age_[a][b] >= 0; }

  void add_node(Node n) {
    nodes_.push_back(std::move(n));
    for (auto& row : age_) row.push_back(-1);
    age_.emplace_back(nodes_.size(), -1);
  }

  void connect(std::size_t a, std::size_t b) { age_[a][b] = age_[b][a] = 0; }
  void disconnect(std::size_t a, std::size_t b) { age_[a][b] = age_[b][a] = -1; }

  void remove_node(std::size_t i) {
    nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(i));
    age_.erase(age_.begin() + static_cast<std::ptrdiff_t>(i));
    for (auto& row : age_) row.erase(row.begin() + static_cast<std::ptrdiff_t>(i));
  }

  // One adaptation step for sample x.
  void learn(const Point& x, std::size_t step) {
    std::size_t s1 = 0, s2 = 1;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double dist = squared_distance(nodes_[i].position, x);
      if (dist < d1) {
        s2 = s1;
        d2 = d1;
        s1 = i;
        d1 = dist;
      } else if (dist < d2) {
        s2 = i;
        d2 = dist;
      }
    }

    for (std::size_t j = 0; j < nodes_.size(); ++j)
      if (j != s1 && connected(s1, j)) {
        ++age_[s1][j];
        age_[j][s1] = age_[s1][j];
      }

    nodes_[s1].error += d1;
    nodes_[s1].utility += d2 - d1;

    move_toward(nodes_[s1].position, x, params_.eps_b);
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      if (j != s1 && connected(s1, j)) move_toward(nodes_[j].position, x, params_.eps_n);

    connect(s1, s2);
    prune();

    if (step % params_.lambda == 0 && nodes_.size() < params_.max_nodes) insert();
    remove_useless();

    for (auto& n : nodes_) {
      n.error *= params_.d;
      n.utility *= params_.d;
    }
  }

 private:
  static void move_toward(Point& w, const Point& x, double rate) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += rate * (x[i] - w[i]);
  }

  void prune() {
    const auto max_age = static_cast<long>(params_.max_age);
    for (std::size_t a = 0; a < nodes_.size(); ++a)
      for (std::size_t b = a + 1; b < nodes_.size(); ++b)
        if (age_[a][b] > max_age) disconnect(a, b);
    for (std::size_t i = nodes_.size(); i-- > 0 && nodes_.size() > 2;) {
      bool has_edge = false;
      for (std::size_t j = 0; j < nodes_.size() && !has_edge; ++j)
        has_edge = j != i && connected(i, j);
      if (!has_edge) remove_node(i);
    }
  }

  // New node halfway between the max-error node and its max-error neighbor.
  void insert() {
    std::size_t q = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (nodes_[i].error > nodes_[q].error) q = i;
    std::size_t f = nodes_.size();
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      if (j != q && connected(q, j) && (f == nodes_.size() || nodes_[j].error > nodes_[f].error))
        f = j;
    if (f == nodes_.size()) return;

    Node r;
    r.position.resize(nodes_[q].position.size());
    for (std::size_t i = 0; i < r.position.size(); ++i)
      r.position[i] = 0.5 * (nodes_[q].position[i] + nodes_[f].position[i]);
    nodes_[q].error *= params_.alpha;
    nodes_[f].error *= params_.alpha;
    r.error = nodes_[q].error;
    r.utility = 0.5 * (nodes_[q].utility + nodes_[f].utility);

    add_node(std::move(r));
    const std::size_t ri = nodes_.size() - 1;
    disconnect(q, f);
    connect(q, ri);
    connect(f, ri);
  }

  // Drops the least useful node once max_error / min_utility exceeds k.
  void remove_useless() {
    if (nodes_.size() <= 2) return;
    std::size_t q = 0, u = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (nodes_[i].error > nodes_[q].error) q = i;
      if (nodes_[i].utility < nodes_[u].utility) u = i;
    }
    const double e_max = nodes_[q].error;
    const double u_min = nodes_[u].utility;
    if (e_max > 0.0 && e_max > params_.k_utility * u_min) {
      remove_node(u);
      prune();
    }
  }

  Params params_;
  std::vector<Node> nodes_;
  std::vector<std::vector<long>> age_;
};

/// Fits GNG-U to the samples and returns node positions (between 2 and
/// max_nodes of them). Samples are presented in a freshly shuffled order
/// each epoch.
inline std::vector<Point> gngu_fit(const std::vector<Point>& samples, const Params& params,
                                   Rng& rng) {
  params.validate();
  if (samples.size() < 2) throw input_error("gngu: at least 2 samples are required");
  const std::size_t dim = samples.front().size();
  for (const auto& s : samples)
    if (s.size() != dim) throw shape_error("gngu: samples differ in dimension");

  Network net(params);
  const auto first = sample_without_replacement(samples.size(), 2, rng);
  net.add_node({samples[first[0]], 0.0, 0.0});
  net.add_node({samples[first[1]], 0.0, 0.0});
  net.connect(0, 1);

  std::vector<std::size_t> order(samples.size());
  std::size_t step = 0;
  for (std::size_t e = 0; e < params.epochs; ++e) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (std::size_t i : order) net.learn(samples[i], ++step);
  }

  std::vector<Point> centers;
  for (const auto& n : net.nodes()) centers.push_back(n.position);

  if (params.refine) {
    std::vector<Point> sums(centers.size(), Point(dim, 0.0));
    std::vector<std::size_t> counts(centers.size(), 0);
    for (const auto& s : samples) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double dist = squared_distance(centers[c], s);
        if (dist < bd) {
          bd = dist;
          best = c;
        }
      }
      for (std::size_t i = 0; i < dim; ++i) sums[best][i] += s[i];
      ++counts[best];
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (counts[c] > 0)
        for (std::size_t i = 0; i < dim; ++i)
          centers[c][i] = sums[c][i] / static_cast<double>(counts[c]);
  }
  return centers;
}

// Mean squared distance from each sample to its nearest center.
inline double quantization_error(const std::vector<Point>& samples,
                                 const std::vector<Point>& centers) {
  if (samples.empty() || centers.empty()) throw input_error("quantization error of empty set");
  double total = 0.0;
  for (const auto& s : samples) {
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) bd = std::min(bd, squared_distance(c, s));
    total += bd;
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace antimu::gngu
