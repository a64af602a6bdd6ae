#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "antimu/error.hpp"

namespace antimu {

// Multiband image with intensities normalized to [0, 1], stored band-sequential.
class Raster {
 public:
  Raster() = default;

  Raster(std::size_t width, std::size_t height, std::size_t bands)
      : width_(width), height_(height), bands_(bands), data_(width * height * bands, 0.0) {
    if (width == 0 || height == 0 || bands == 0)
      throw shape_error("raster dimensions must be positive");
  }

  Raster(std::size_t width, std::size_t height, std::size_t bands, std::vector<double> data)
      : width_(width), height_(height), bands_(bands), data_(std::move(data)) {
    if (width == 0 || height == 0 || bands == 0)
      throw shape_error("raster dimensions must be positive");
    if (data_.size() != width * height * bands)
      throw shape_error("raster data size does not match width*height*bands");
    for (double v : data_)
      if (!(v >= 0.0 && v <= 1.0)) throw shape_error("raster intensity outside [0,1]");
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t bands() const { return bands_; }
  std::size_t pixels() const { return width_ * height_; }

  double at(std::size_t band, std::size_t x, std::size_t y) const {
    return data_[(band * height_ + y) * width_ + x];
  }

  void set(std::size_t band, std::size_t x, std::size_t y, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw shape_error("raster intensity outside [0,1]");
    data_[(band * height_ + y) * width_ + x] = v;
  }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> data_;
};

// Class label for pixels the classifier refuses to assign.
inline constexpr int kUnknown = -1;
// Ground-truth value for pixels that carry no label.
inline constexpr int kUnlabeled = 0;

// Per-pixel integer labels: 0 unlabeled, 1..K classes, kUnknown for rejected pixels.
struct LabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> labels;

  LabelMap() = default;
  LabelMap(std::size_t w, std::size_t h, int fill = kUnlabeled)
      : width(w), height(h), labels(w * h, fill) {}

  int at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }
  int& at(std::size_t x, std::size_t y) { return labels[y * width + x]; }
  std::size_t size() const { return labels.size(); }

  bool operator==(const LabelMap&) const = default;
};

struct PixelCoord {
  std::size_t x = 0;
  std::size_t y = 0;
  bool operator==(const PixelCoord&) const = default;
};

}  // namespace antimu
