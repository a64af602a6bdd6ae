#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/raster.hpp"

namespace antimu {

// Per band: center intensity, neighborhood mean, neighborhood stddev.
using FeatureVector = std::vector<double>;

inline constexpr std::size_t kFeaturesPerBand = 3;
inline constexpr std::size_t kDefaultWindow = 3;
inline constexpr unsigned kDefaultQuantBits = 8;

/// Feature vector of pixel (x, y). The window is a square of odd side
/// centered on the pixel and clipped at the raster border; mean and
/// population stddev are taken over the in-bounds pixels only.
inline FeatureVector extract_features(const Raster& raster, std::size_t x, std::size_t y,
                                      std::size_t window = kDefaultWindow) {
  if (window == 0 || window % 2 == 0)
    throw config_error("window must be odd and >= 1, got " + std::to_string(window));
  if (x >= raster.width() || y >= raster.height())
    throw coordinate_error("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                           ") outside " + std::to_string(raster.width()) + "x" +
                           std::to_string(raster.height()) + " raster");

  const std::size_t half = window / 2;
  const std::size_t x0 = x >= half ? x - half : 0;
  const std::size_t y0 = y >= half ? y - half : 0;
  const std::size_t x1 = std::min(raster.width() - 1, x + half);
  const std::size_t y1 = std::min(raster.height() - 1, y + half);
  const double n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));

  FeatureVector fv;
  fv.reserve(kFeaturesPerBand * raster.bands());
  for (std::size_t b = 0; b < raster.bands(); ++b) {
    double sum = 0.0;
    for (std::size_t yy = y0; yy <= y1; ++yy)
      for (std::size_t xx = x0; xx <= x1; ++xx) sum += raster.at(b, xx, yy);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t yy = y0; yy <= y1; ++yy)
      for (std::size_t xx = x0; xx <= x1; ++xx) {
        const double d = raster.at(b, xx, yy) - mean;
        ss += d * d;
      }
    fv.push_back(raster.at(b, x, y));
    fv.push_back(std::min(1.0, std::max(0.0, mean)));
    fv.push_back(std::sqrt(ss / n));
  }
  return fv;
}

// Fixed-length bit string packed into 64-bit words. Bit i is the i-th
// symbol; unused high bits of the last word are always zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length) : size_(length), words_((length + 63) / 64, 0) {}

  // From a string of '0'/'1' characters.
  static BitString from_string(const std::string& s) {
    BitString bs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        bs.set(i, true);
      else if (s[i] != '0')
        throw encoding_error("bit string may only contain '0' and '1'");
    }
    return bs;
  }

  std::size_t size() const { return size_; }
  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  BitString complement() const {
    BitString out = *this;
    for (auto& w : out.words_) w = ~w;
    out.clear_tail();
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  // Re-establishes the zero-tail invariant after direct word writes.
  void clear_tail() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  bool operator==(const BitString&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

inline std::uint64_t quant_levels(unsigned quant_bits) {
  if (quant_bits == 0 || quant_bits > 32)
    throw config_error("bits per component must be in [1, 32]");
  return (std::uint64_t{1} << quant_bits) - 1;
}

/// Quantizes each component to floor(v * (2^Q - 1)) and writes it
/// most-significant bit first; components are concatenated in order.
inline BitString encode(const FeatureVector& fv, unsigned quant_bits = kDefaultQuantBits) {
  const std::uint64_t levels = quant_levels(quant_bits);
  BitString bs(fv.size() * quant_bits);
  for (std::size_t c = 0; c < fv.size(); ++c) {
    const double v = fv[c];
    if (!(v >= 0.0 && v <= 1.0))
      throw encoding_error("component " + std::to_string(c) + " = " + std::to_string(v) +
                           " outside [0,1]");
    // The tiny offset absorbs representation error so that decode->encode
    // recovers every code exactly.
    auto g = static_cast<std::uint64_t>(std::floor(v * static_cast<double>(levels) + 1e-9));
    if (g > levels) g = levels;
    for (unsigned k = 0; k < quant_bits; ++k)
      bs.set(c * quant_bits + k, (g >> (quant_bits - 1 - k)) & 1U);
  }
  return bs;
}

// Inverse of encode for `components` Q-bit groups: group g maps to g / (2^Q - 1).
inline FeatureVector decode_components(const BitString& bs, std::size_t components,
                                       unsigned quant_bits = kDefaultQuantBits) {
  const std::uint64_t levels = quant_levels(quant_bits);
  if (bs.size() != components * quant_bits)
    throw decoding_error("bit string length " + std::to_string(bs.size()) + " != " +
                         std::to_string(components) + " components x " +
                         std::to_string(quant_bits) + " bits");
  FeatureVector fv(components);
  for (std::size_t c = 0; c < components; ++c) {
    std::uint64_t g = 0;
    for (unsigned k = 0; k < quant_bits; ++k) g = (g << 1) | (bs.get(c * quant_bits + k) ? 1U : 0U);
    fv[c] = static_cast<double>(g) / static_cast<double>(levels);
  }
  return fv;
}

// Feature vector of a B-band raster: the string must hold 3*B*Q bits.
inline FeatureVector decode(const BitString& bs, std::size_t bands,
                            unsigned quant_bits = kDefaultQuantBits) {
  return decode_components(bs, kFeaturesPerBand * bands, quant_bits);
}

}  // namespace antimu
