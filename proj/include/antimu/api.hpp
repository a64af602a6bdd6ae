#pragma once

// API: continuous minimization modelled on the foraging of Pachycondyla
// apicalis. Ants keep a few hunting sites around a shared nest, search
// locally around them, forget sites that keep failing, and the nest is
// periodically moved to the best point found so far.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/random.hpp"

namespace antimu::api {

using Point = std::vector<double>;
using Objective = std::function<double(std::span<const double>)>;

struct SearchSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  static SearchSpace cube(std::size_t dimension, double lo, double hi) {
    return {std::vector<double>(dimension, lo), std::vector<double>(dimension, hi)};
  }

  std::size_t dimension() const { return lower.size(); }

  bool contains(std::span<const double> p) const {
    if (p.size() != dimension()) return false;
    for (std::size_t d = 0; d < p.size(); ++d)
      if (!(p[d] >= lower[d] && p[d] <= upper[d])) return false;
    return true;
  }

  void validate() const {
    if (lower.empty() || lower.size() != upper.size())
      throw config_error("search space needs matching, non-empty bound vectors");
    for (std::size_t d = 0; d < lower.size(); ++d)
      if (!(lower[d] < upper[d]))
        throw config_error("search space: lower bound must be < upper bound in dimension " +
                           std::to_string(d));
  }
};

struct HuntingSite {
  Point position;
  double value = 0.0;
  std::size_t failures = 0;  // successive failed explorations
};

struct Ant {
  std::vector<HuntingSite> sites;
  double a_site = 0.1;   // amplitude for creating sites around the nest
  double a_local = 0.01; // amplitude for exploring around a site
  std::optional<std::size_t> last_site;  // last site whose exploration succeeded

  void forget_all() {
    sites.clear();
    last_site.reset();
  }
};

struct Params {
  std::size_t nbr_ant = 24;    // NbrAnt
  std::size_t nbr_sit = 12;    // p, sites memorized per ant
  std::size_t patience = 15;   // P_local
  std::size_t nbr_itr = 35;    // T2, iteration cap
  double a_site = 0.1;         // homogeneous amplitudes
  double a_local = 0.01;
  bool heterogeneous = true;
  double a_site_max = 0.5;     // heterogeneous amplitude range
  double a_site_min = 0.01;
  double local_ratio = 10.0;   // a_local = a_site / local_ratio when heterogeneous
  std::size_t nest_period = 1; // iterations between nest moves
  std::size_t stagnation = 0;  // T1, 0 disables
  std::size_t max_evals = 0;   // T3, 0 means unlimited

  void validate() const {
    if (nbr_ant == 0 || nbr_sit == 0 || patience == 0 || nbr_itr == 0 || nest_period == 0)
      throw config_error("api: ant, site, patience, iteration and nest-period counts must be >= 1");
    auto amp_ok = [](double a) { return a > 0.0 && a <= 1.0; };
    if (heterogeneous) {
      if (!amp_ok(a_site_max) || !amp_ok(a_site_min) || a_site_min > a_site_max)
        throw config_error("api: heterogeneous amplitudes must satisfy 0 < min <= max <= 1");
      if (!(local_ratio >= 1.0)) throw config_error("api: local ratio must be >= 1");
    } else if (!amp_ok(a_site) || !amp_ok(a_local) || a_local > a_site) {
      throw config_error("api: amplitudes must satisfy 0 < a_local <= a_site <= 1");
    }
  }
};

struct Result {
  Point best;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best-so-far value after each iteration
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
};

// Uniform point of the search space.
inline Point o_rand(const SearchSpace& space, Rng& rng) {
  Point p(space.dimension());
  for (std::size_t d = 0; d < p.size(); ++d) p[d] = uniform(rng, space.lower[d], space.upper[d]);
  return p;
}

// Uniform point of the box center +- amplitude*(upper-lower)/2, clamped to the space.
inline Point o_explo(std::span<const double> center, double amplitude, const SearchSpace& space,
                     Rng& rng) {
  Point p(center.size());
  for (std::size_t d = 0; d < p.size(); ++d) {
    const double half = amplitude * (space.upper[d] - space.lower[d]) / 2.0;
    const double lo = std::max(space.lower[d], center[d] - half);
    const double hi = std::min(space.upper[d], center[d] + half);
    p[d] = std::min(hi, uniform(rng, lo, hi));
  }
  return p;
}

/// Ants of the colony. Heterogeneous ants spread a_site geometrically from
/// a_site_max (ant 0) down to a_site_min (last ant); a_local follows as
/// a_site / local_ratio.
inline std::vector<Ant> make_population(const Params& params) {
  if (params.nbr_ant == 0) throw config_error("api: colony needs at least one ant");
  params.validate();
  std::vector<Ant> ants(params.nbr_ant);
  for (std::size_t i = 0; i < ants.size(); ++i) {
    if (!params.heterogeneous) {
      ants[i].a_site = params.a_site;
      ants[i].a_local = params.a_local;
      continue;
    }
    const double t = ants.size() > 1
                         ? static_cast<double>(i) / static_cast<double>(ants.size() - 1)
                         : 0.0;
    ants[i].a_site = params.a_site_max * std::pow(params.a_site_min / params.a_site_max, t);
    ants[i].a_local = ants[i].a_site / params.local_ratio;
  }
  return ants;
}

struct Probe {
  Point point;
  double value = 0.0;
};

inline double evaluate(const Objective& f, std::span<const double> p) {
  const double v = f(p);
  if (!std::isfinite(v)) throw objective_error("objective returned a non-finite value");
  return v;
}

/// One outing of one ant; evaluates the objective exactly once and returns
/// the probed point. With fewer than p sites the ant creates one around the
/// nest. Otherwise it explores around its last successful site, or a random
/// site after a failure, keeping the new point on improvement. A site
/// reaching P_local successive failures is forgotten.
inline Probe api_foraging(Ant& ant, std::span<const double> nest, const Objective& f,
                          const SearchSpace& space, const Params& params, Rng& rng) {
  if (ant.sites.size() < params.nbr_sit) {
    HuntingSite site;
    site.position = o_explo(nest, ant.a_site, space, rng);
    site.value = evaluate(f, site.position);
    ant.sites.push_back(site);
    return {site.position, site.value};
  }

  const std::size_t j =
      ant.last_site ? *ant.last_site : uniform_index(rng, ant.sites.size());
  HuntingSite& site = ant.sites[j];
  Probe probe;
  probe.point = o_explo(site.position, ant.a_local, space, rng);
  probe.value = evaluate(f, probe.point);

  if (probe.value < site.value) {
    site.position = probe.point;
    site.value = probe.value;
    site.failures = 0;
    ant.last_site = j;
  } else {
    ++site.failures;
    ant.last_site.reset();
    if (site.failures >= params.patience)
      ant.sites.erase(ant.sites.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return probe;
}

/// Runs the colony until T1 (no improvement of the best point for
/// `stagnation` iterations), T2 (nbr_itr iterations) or T3 (max_evals
/// evaluations) fires. The nest starts at `initial_nest` when given,
/// otherwise at a uniform random point; it is evaluated and counts as the
/// first best point. Every nest_period iterations the nest moves to the
/// best point and all ants forget their sites.
inline Result run(const Objective& f, const SearchSpace& space, const Params& params, Rng& rng,
                  std::optional<Point> initial_nest = std::nullopt) {
  space.validate();
  params.validate();
  if (initial_nest && !space.contains(*initial_nest))
    throw config_error("api: initial nest lies outside the search space");

  std::vector<Ant> ants = make_population(params);
  Point nest = initial_nest ? *initial_nest : o_rand(space, rng);

  Result result;
  result.best = nest;
  result.best_value = evaluate(f, nest);
  result.evaluations = 1;

  auto budget_left = [&] { return params.max_evals == 0 || result.evaluations < params.max_evals; };

  std::size_t since_improvement = 0;
  for (std::size_t t = 0; t < params.nbr_itr && budget_left(); ++t) {
    const double before = result.best_value;
    for (auto& ant : ants) {
      if (!budget_left()) break;
      Probe probe = api_foraging(ant, nest, f, space, params, rng);
      ++result.evaluations;
      if (probe.value < result.best_value) {
        result.best_value = probe.value;
        result.best = std::move(probe.point);
      }
    }
    result.trace.push_back(result.best_value);
    result.iterations = t + 1;

    since_improvement = result.best_value < before ? 0 : since_improvement + 1;
    if (params.stagnation > 0 && since_improvement >= params.stagnation) break;

    if ((t + 1) % params.nest_period == 0) {
      nest = result.best;
      for (auto& ant : ants) ant.forget_all();
    }
  }
  return result;
}

}  // namespace antimu::api
