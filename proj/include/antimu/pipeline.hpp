#pragma once

// AntImuClass training and classification:
//   sample NbrTra pixels per class -> features
//   -> CLONALG refines the encoded samples into prototypes (learning phase)
//   -> GNG-U places NbrNeur centers over the prototypes
//   -> widths from center spacing, ridge fit of the output layer
//   -> API tunes log-widths, weights and biases against training error
//      (optimization phase).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "antimu/api.hpp"
#include "antimu/clonalg.hpp"
#include "antimu/config.hpp"
#include "antimu/error.hpp"
#include "antimu/evaluation.hpp"
#include "antimu/features.hpp"
#include "antimu/gngu.hpp"
#include "antimu/random.hpp"
#include "antimu/raster.hpp"
#include "antimu/rbf.hpp"

namespace antimu {

struct TrainingSet {
  std::size_t classes = 0;
  std::vector<LabeledSample> samples;  // grouped by class, classes in order
  std::vector<PixelCoord> coords;      // source pixel of each sample, empty if synthetic

  std::vector<FeatureVector> of_class(int label) const {
    std::vector<FeatureVector> out;
    for (const auto& s : samples)
      if (s.label == label) out.push_back(s.features);
    return out;
  }
};

/// Draws NbrTra labeled pixels per class uniformly without replacement and
/// extracts their features. Classes are 1..max label; each needs at least
/// NbrTra labeled pixels.
inline TrainingSet sample_training_set(const Raster& raster, const LabelMap& labels,
                                       const RunConfig& cfg, Rng& rng) {
  if (labels.width != raster.width() || labels.height != raster.height())
    throw input_error("label map and raster differ in size");
  const std::size_t K = max_label(labels);
  if (K == 0) throw input_error("label map contains no labeled pixels");

  std::vector<std::vector<PixelCoord>> by_class(K);
  for (std::size_t y = 0; y < labels.height; ++y)
    for (std::size_t x = 0; x < labels.width; ++x) {
      const int l = labels.at(x, y);
      if (l > 0) by_class[static_cast<std::size_t>(l - 1)].push_back({x, y});
    }

  TrainingSet ts;
  ts.classes = K;
  for (std::size_t k = 0; k < K; ++k) {
    if (by_class[k].size() < cfg.nbr_tra)
      throw input_error("class " + std::to_string(k + 1) + " has " +
                        std::to_string(by_class[k].size()) + " labeled pixels, NbrTra = " +
                        std::to_string(cfg.nbr_tra));
    for (std::size_t i : sample_without_replacement(by_class[k].size(), cfg.nbr_tra, rng)) {
      const PixelCoord p = by_class[k][i];
      ts.samples.push_back({extract_features(raster, p.x, p.y, cfg.window), static_cast<int>(k + 1)});
      ts.coords.push_back(p);
    }
  }
  return ts;
}

struct PrototypeSet {
  std::vector<LabeledSample> prototypes;  // one per training sample, same order
  std::vector<clonalg::Result> per_class;
};

// Learning phase: per class, the encoded samples are the CLONALG antigens
// and the decoded memory cells become the prototypes.
inline PrototypeSet learn_prototypes(const TrainingSet& training, const RunConfig& cfg, Rng& rng) {
  if (training.samples.empty()) throw input_error("empty training set");
  PrototypeSet out;
  for (std::size_t k = 1; k <= training.classes; ++k) {
    const auto features = training.of_class(static_cast<int>(k));
    if (features.empty()) throw input_error("class " + std::to_string(k) + " has no samples");
    const std::size_t components = features.front().size();

    std::vector<BitString> antigens;
    for (const auto& fv : features) antigens.push_back(encode(fv, cfg.quant_bits));
    const auto params = cfg.clonalg_params(antigens.size(), antigens.front().size());

    clonalg::AntibodyPool pool = clonalg::random_pool(params, rng);
    if (cfg.seed_pool)
      for (std::size_t i = 0; i < antigens.size() && i < pool.remainder.size(); ++i)
        pool.remainder[i] = antigens[i];

    auto result = clonalg::train(std::move(pool), antigens, params, rng);
    for (const auto& cell : result.memory)
      out.prototypes.push_back(
          {decode_components(cell, components, cfg.quant_bits), static_cast<int>(k)});
    out.per_class.push_back(std::move(result));
  }
  return out;
}

// Parameter vector seen by API: [log widths | weights row-major | biases].
inline std::vector<double> pack_parameters(const RbfModel& m) {
  std::vector<double> v;
  for (double w : m.widths) v.push_back(std::log(w));
  for (const auto& row : m.weights) v.insert(v.end(), row.begin(), row.end());
  v.insert(v.end(), m.biases.begin(), m.biases.end());
  return v;
}

inline void unpack_parameters(RbfModel& m, std::span<const double> v) {
  std::size_t i = 0;
  for (double& w : m.widths) w = std::exp(v[i++]);
  for (auto& row : m.weights)
    for (double& w : row) w = v[i++];
  for (double& b : m.biases) b = v[i++];
}

struct OptimizeResult {
  RbfModel model;
  double initial_rate = 0.0;  // training rate of the input model, percent
  double final_rate = 0.0;
  api::Result search;
};

/// Optimization phase: API minimizes 1 - training rate over log-widths in
/// [log(s/10), log(10 s)] and weights/biases in [-w_max, w_max] with
/// w_max = 10 * max |initial weight|. The input model is the first nest, so
/// the result is never worse on the training set.
inline OptimizeResult optimize_model(const RbfModel& model, const TrainingSet& training,
                                     const RunConfig& cfg, Rng& rng) {
  if (!model.trained()) throw state_error("optimize_model needs a fitted model");
  const auto start = pack_parameters(model);

  double w_max = 0.0;
  for (const auto& row : model.weights)
    for (double w : row) w_max = std::max(w_max, std::abs(w));
  for (double b : model.biases) w_max = std::max(w_max, std::abs(b));
  w_max = w_max > 0.0 ? 10.0 * w_max : 1.0;

  api::SearchSpace space;
  const std::size_t M = model.neurons();
  for (std::size_t i = 0; i < start.size(); ++i) {
    if (i < M) {
      space.lower.push_back(start[i] - std::log(10.0));
      space.upper.push_back(start[i] + std::log(10.0));
    } else {
      space.lower.push_back(-w_max);
      space.upper.push_back(w_max);
    }
  }

  RbfModel work = model;
  const api::Objective f = [&](std::span<const double> v) {
    unpack_parameters(work, v);
    return 1.0 - training_rate(work, training.samples) / 100.0;
  };

  OptimizeResult out;
  out.search = api::run(f, space, cfg.api_params(), rng, start);
  out.initial_rate = training_rate(model, training.samples);
  out.model = model;
  out.final_rate = out.initial_rate;
  // Packing widths as logarithms is not bit-exact, so the input model is
  // kept unless the unpacked optimum really scores at least as well.
  RbfModel best = model;
  unpack_parameters(best, out.search.best);
  const double best_rate = training_rate(best, training.samples);
  if (best_rate >= out.initial_rate && out.search.best != start) {
    out.model = std::move(best);
    out.final_rate = best_rate;
  }
  return out;
}

struct TrainedModel {
  RbfModel model;
  RunConfig config;
  std::size_t bands = 0;
  std::vector<PixelCoord> training_pixels;
  std::vector<int> training_labels;
  std::size_t prototype_count = 0;
  double ridge_rate = 0.0;     // training rate after the ridge fit
  double training_rate = 0.0;  // training rate after API
  ConfusionMatrix training_confusion;

  bool operator==(const TrainedModel&) const = default;
};

// Builds the initial network from prototypes and fits its output layer.
inline RbfModel build_network(const TrainingSet& training, const std::vector<LabeledSample>& prototypes,
                              const RunConfig& cfg, Rng& rng) {
  std::vector<FeatureVector> points;
  for (const auto& p : prototypes) points.push_back(p.features);
  RbfModel model;
  model.class_count = training.classes;
  model.reject_threshold = cfg.theta;
  if (points.size() >= 2) {
    model.centers = gngu::gngu_fit(points, cfg.gngu_params(), rng);
  } else {
    model.centers = points;
  }
  model.widths = initial_widths(model.centers, cfg.width_neighbors);
  fit_output_weights(model, training.samples, cfg.ridge);
  return model;
}

// Everything before the optimization phase. Amplitude settings do not enter
// here, so one preparation can be finished under several API settings.
struct PreparedTraining {
  TrainingSet training;
  RbfModel initial;
  std::size_t prototype_count = 0;
  std::size_t bands = 0;
};

inline PreparedTraining prepare_training(const Raster& raster, const LabelMap& labels,
                                         const RunConfig& cfg, Rng& rng) {
  cfg.validate();
  PreparedTraining p;
  p.training = sample_training_set(raster, labels, cfg, rng);
  PrototypeSet protos = learn_prototypes(p.training, cfg, rng);
  p.prototype_count = protos.prototypes.size();
  p.initial = build_network(p.training, protos.prototypes, cfg, rng);
  p.bands = raster.bands();
  return p;
}

inline TrainedModel finish_training(const PreparedTraining& p, const RunConfig& cfg, Rng& rng) {
  cfg.validate();
  TrainedModel tm;
  tm.config = cfg;
  tm.bands = p.bands;
  tm.training_pixels = p.training.coords;
  for (const auto& s : p.training.samples) tm.training_labels.push_back(s.label);
  tm.prototype_count = p.prototype_count;
  tm.ridge_rate = training_rate(p.initial, p.training.samples);

  OptimizeResult opt = optimize_model(p.initial, p.training, cfg, rng);
  tm.model = std::move(opt.model);
  tm.training_rate = opt.final_rate;

  std::vector<int> pred;
  for (const auto& s : p.training.samples) pred.push_back(classify(tm.model, s.features));
  tm.training_confusion = confusion(pred, tm.training_labels, p.training.classes);
  return tm;
}

inline TrainedModel train(const Raster& raster, const LabelMap& labels, const RunConfig& cfg,
                          Rng& rng) {
  const PreparedTraining p = prepare_training(raster, labels, cfg, rng);
  return finish_training(p, cfg, rng);
}

struct Classification {
  LabelMap labels;
  std::size_t unknown = 0;
};

/// Labels every pixel. Rows are split across `threads` workers; the result
/// does not depend on the split.
inline Classification classify_raster(const TrainedModel& tm, const Raster& raster,
                                      std::size_t threads = 1) {
  if (raster.bands() != tm.bands)
    throw input_error("raster has " + std::to_string(raster.bands()) + " bands, model expects " +
                      std::to_string(tm.bands));
  Classification out;
  out.labels = LabelMap(raster.width(), raster.height());
  auto work = [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = 0; x < raster.width(); ++x)
        out.labels.at(x, y) = classify(tm.model, extract_features(raster, x, y, tm.config.window));
  };
  threads = std::clamp<std::size_t>(threads, 1, raster.height());
  if (threads == 1) {
    work(0, raster.height());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (raster.height() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t y0 = t * chunk, y1 = std::min(raster.height(), y0 + chunk);
      if (y0 < y1) pool.emplace_back(work, y0, y1);
    }
    for (auto& th : pool) th.join();
  }
  for (int l : out.labels.labels)
    if (l == kUnknown) ++out.unknown;
  return out;
}

// Labeled pixels that were not drawn for training.
inline std::vector<bool> held_out_mask(const TrainedModel& tm, const LabelMap& truth) {
  auto mask = labeled_mask(truth);
  for (const auto& p : tm.training_pixels)
    if (p.x < truth.width && p.y < truth.height) mask[p.y * truth.width + p.x] = false;
  return mask;
}

// ---------------------------------------------------------------------------
// Trained-model file (docs/formats.md):
//
//   antimu-model 1
//   bands B
//   [config]
//   <key> = <value> lines, as written by write_config
//   [training]
//   prototypes P
//   ridge_rate r
//   training_rate r
//   pixels n
//   x y label        (n lines)
//   confusion K
//   K lines of K+1 counts (last column: UNKNOWN)
//   [network]
//   <antimu-rbf block>

inline void write_trained_model(std::ostream& os, const TrainedModel& tm) {
  os << "antimu-model 1\n";
  os << "bands " << tm.bands << '\n';
  os << "[config]\n";
  write_config(os, tm.config);
  os << "[training]\n";
  os << "prototypes " << tm.prototype_count << '\n';
  os << "ridge_rate " << format_real(tm.ridge_rate) << '\n';
  os << "training_rate " << format_real(tm.training_rate) << '\n';
  os << "pixels " << tm.training_pixels.size() << '\n';
  for (std::size_t i = 0; i < tm.training_pixels.size(); ++i)
    os << tm.training_pixels[i].x << ' ' << tm.training_pixels[i].y << ' ' << tm.training_labels[i]
       << '\n';
  const std::size_t K = tm.training_confusion.classes();
  os << "confusion " << K << '\n';
  for (std::size_t t = 1; t <= K; ++t) {
    for (std::size_t p = 0; p <= K; ++p) {
      const int pred = p == K ? kUnknown : static_cast<int>(p + 1);
      os << (p ? " " : "") << tm.training_confusion.at(static_cast<int>(t), pred);
    }
    os << '\n';
  }
  os << "[network]\n";
  write_model(os, tm.model);
}

inline TrainedModel read_trained_model(std::istream& is) {
  detail::expect_keyword(is, "antimu-model 1");
  TrainedModel tm;
  tm.bands = detail::read_count(is, "bands");
  detail::expect_keyword(is, "[config]");
  std::ostringstream cfg_text;
  std::string line;
  while (true) {
    line = detail::expect_line(is, "config");
    if (line == "[training]") break;
    cfg_text << line << '\n';
  }
  std::istringstream cfg_in(cfg_text.str());
  tm.config = parse_config(cfg_in);
  tm.prototype_count = detail::read_count(is, "prototypes");
  auto read_real_field = [&](const std::string& key) {
    std::istringstream ls(detail::expect_line(is, key));
    std::string k, v;
    if (!(ls >> k >> v) || k != key) throw format_error("expected '" + key + " <real>'");
    return parse_real(v, key);
  };
  tm.ridge_rate = read_real_field("ridge_rate");
  tm.training_rate = read_real_field("training_rate");
  const std::size_t n = detail::read_count(is, "pixels");
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream ls(detail::expect_line(is, "pixels"));
    long long x = -1, y = -1, l = 0;
    if (!(ls >> x >> y >> l) || x < 0 || y < 0) throw format_error("bad training pixel line");
    tm.training_pixels.push_back({static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
    tm.training_labels.push_back(static_cast<int>(l));
  }
  const std::size_t K = detail::read_count(is, "confusion");
  tm.training_confusion = ConfusionMatrix(K);
  for (std::size_t t = 1; t <= K; ++t) {
    std::istringstream ls(detail::expect_line(is, "confusion"));
    for (std::size_t p = 0; p <= K; ++p) {
      long long c = -1;
      if (!(ls >> c) || c < 0) throw format_error("bad confusion row " + std::to_string(t));
      const int pred = p == K ? kUnknown : static_cast<int>(p + 1);
      tm.training_confusion.set(static_cast<int>(t), pred, static_cast<std::size_t>(c));
    }
  }
  detail::expect_keyword(is, "[network]");
  tm.model = read_model(is);
  return tm;
}

}  // namespace antimu
