#pragma once

// Synthetic labeled scenes: K rectangular regions on a grid, each with a
// constant spectral signature plus Gaussian noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/io.hpp"
#include "antimu/random.hpp"
#include "antimu/raster.hpp"

namespace antimu {

struct SynthParams {
  std::size_t classes = 12;
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t bands = 7;
  // Ratio of the smallest inter-signature distance to the per-band noise stddev.
  // Infinity gives noise-free regions.
  double separation = 6.0;
  double min_distance = 0.25;  // required spacing between signatures
  double lower = 0.05, upper = 0.95;  // signature box
  std::size_t attempts = 20000;       // rejection-sampling budget per signature
  std::uint64_t seed = 1;
};

struct SynthScene {
  io::RasterBundle bundle;  // labels always present
  std::vector<std::vector<double>> signatures;  // signatures[k-1]
  double min_distance = 0.0;                    // realized smallest pairwise distance
  double noise_sigma = 0.0;
};

inline std::vector<std::vector<double>> draw_signatures(const SynthParams& p, Rng& rng) {
  std::vector<std::vector<double>> sig;
  std::size_t restarts = 0;
  while (sig.size() < p.classes) {
    bool placed = false;
    for (std::size_t a = 0; a < p.attempts && !placed; ++a) {
      std::vector<double> s(p.bands);
      for (auto& v : s) v = uniform(rng, p.lower, p.upper);
      placed = std::all_of(sig.begin(), sig.end(), [&](const std::vector<double>& o) {
        double d2 = 0;
        for (std::size_t b = 0; b < s.size(); ++b) d2 += (s[b] - o[b]) * (s[b] - o[b]);
        return std::sqrt(d2) >= p.min_distance;
      });
      if (placed) sig.push_back(std::move(s));
    }
    if (!placed) {
      // A bad early draw can block the rest; start over a few times.
      if (++restarts > 10)
        throw generation_error("cannot place " + std::to_string(p.classes) + " signatures " +
                               std::to_string(p.min_distance) + " apart in " +
                               std::to_string(p.bands) + " band(s)");
      sig.clear();
    }
  }
  return sig;
}

/// Region layout: a ceil(sqrt(K)) column grid of blocks; blocks are assigned
/// classes in a seeded order, and extra blocks (when the grid has more than K)
/// repeat classes.
inline LabelMap synth_layout(std::size_t classes, std::size_t width, std::size_t height, Rng& rng) {
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(classes))));
  const std::size_t rows = (classes + cols - 1) / cols;
  if (width < cols || height < rows)
    throw generation_error("scene too small for " + std::to_string(classes) + " regions");
  std::vector<int> block_class(rows * cols);
  for (std::size_t i = 0; i < block_class.size(); ++i) block_class[i] = static_cast<int>(i % classes + 1);
  shuffle(block_class, rng);

  LabelMap m(width, height);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t r = y * rows / height, c = x * cols / width;
      m.labels[y * width + x] = block_class[r * cols + c];
    }
  return m;
}

inline SynthScene synth_scene(const SynthParams& p) {
  if (p.classes == 0) throw generation_error("need at least one class");
  if (p.bands == 0 || p.width == 0 || p.height == 0) throw generation_error("empty scene");
  if (!(p.separation > 0.0)) throw generation_error("separation must be > 0");
  if (!(p.lower >= 0.0 && p.lower < p.upper && p.upper <= 1.0))
    throw generation_error("signature box must lie inside [0, 1]");

  Rng sig_rng = make_rng(p.seed, {1});
  Rng layout_rng = make_rng(p.seed, {2});
  Rng noise_rng = make_rng(p.seed, {3});

  SynthScene scene;
  scene.signatures = draw_signatures(p, sig_rng);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.signatures.size(); ++i)
    for (std::size_t j = i + 1; j < scene.signatures.size(); ++j) {
      double d2 = 0;
      for (std::size_t b = 0; b < p.bands; ++b) {
        const double d = scene.signatures[i][b] - scene.signatures[j][b];
        d2 += d * d;
      }
      dmin = std::min(dmin, std::sqrt(d2));
    }
  if (p.classes == 1) dmin = p.min_distance;
  scene.min_distance = dmin;
  scene.noise_sigma = std::isinf(p.separation) ? 0.0 : dmin / p.separation;

  LabelMap labels = synth_layout(p.classes, p.width, p.height, layout_rng);
  std::vector<double> data(p.width * p.height * p.bands);
  for (std::size_t b = 0; b < p.bands; ++b)
    for (std::size_t i = 0; i < p.width * p.height; ++i) {
      const double base = scene.signatures[static_cast<std::size_t>(labels.labels[i] - 1)][b];
      const double v = scene.noise_sigma == 0.0 ? base : base + scene.noise_sigma * standard_normal(noise_rng);
      data[b * p.width * p.height + i] = std::clamp(v, 0.0, 1.0);
    }

  scene.bundle.raster = Raster(p.width, p.height, p.bands, std::move(data));
  scene.bundle.labels = std::move(labels);
  for (std::size_t b = 0; b < p.bands; ++b) scene.bundle.band_names.push_back("b" + std::to_string(b + 1));
  return scene;
}

}  // namespace antimu
