#pragma once

// File formats: raster bundles (text header + band data), PGM/PPM, label
// maps and classified-image rendering. Byte layouts are in docs/formats.md.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/raster.hpp"
#include "antimu/rbf.hpp"

namespace antimu::io {

namespace fs = std::filesystem;

enum class SampleType { u8, u16, f32 };
enum class BandFormat { bsq, pgm, csv };

inline const char* to_string(SampleType s) {
  switch (s) {
    case SampleType::u8: return "u8";
    case SampleType::u16: return "u16";
    case SampleType::f32: return "f32";
  }
  return "?";
}

inline const char* to_string(BandFormat f) {
  switch (f) {
    case BandFormat::bsq: return "bsq";
    case BandFormat::pgm: return "pgm";
    case BandFormat::csv: return "csv";
  }
  return "?";
}

inline SampleType parse_sample_type(const std::string& s) {
  if (s == "u8") return SampleType::u8;
  if (s == "u16") return SampleType::u16;
  if (s == "f32") return SampleType::f32;
  throw format_error("unknown sample type '" + s + "' (expected u8, u16 or f32)");
}

inline BandFormat parse_band_format(const std::string& s) {
  if (s == "bsq") return BandFormat::bsq;
  if (s == "pgm") return BandFormat::pgm;
  if (s == "csv") return BandFormat::csv;
  throw format_error("unknown band format '" + s + "' (expected bsq, pgm or csv)");
}

inline double sample_max(SampleType s) {
  switch (s) {
    case SampleType::u8: return 255.0;
    case SampleType::u16: return 65535.0;
    case SampleType::f32: return 1.0;
  }
  return 1.0;
}

// Integer code of a normalized value for an integer sample type.
inline std::uint32_t quantize(double v, SampleType s) {
  return static_cast<std::uint32_t>(std::lround(v * sample_max(s)));
}

inline std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw format_error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// PGM (P2 plain and P5 binary; 16-bit P5 samples are big-endian).

struct Graymap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint32_t> values;  // row-major
};

namespace detail {

class HeaderScanner {
 public:
  HeaderScanner(const std::vector<unsigned char>& bytes, std::string file)
      : bytes_(bytes), file_(std::move(file)) {}

  std::string token() {
    skip_space_and_comments();
    std::string t;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) t.push_back(static_cast<char>(bytes_[pos_++]));
    if (t.empty()) fail("unexpected end of header");
    return t;
  }

  std::uint32_t number(const char* what) {
    const std::size_t at = pos_;
    const std::string t = token();
    std::uint64_t v = 0;
    for (char c : t) {
      if (c < '0' || c > '9') fail(std::string("bad ") + what + " '" + t + "'", at);
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
      if (v > 0xffffffffULL) fail(std::string(what) + " too large", at);
    }
    return static_cast<std::uint32_t>(v);
  }

  // Consumes the single whitespace byte that ends a binary header.
  void end_binary_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing whitespace after header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg, std::size_t at = std::string::npos) const {
    throw format_error(file_ + " at byte offset " +
                       std::to_string(at == std::string::npos ? pos_ : at) + ": " + msg);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string file_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Graymap parse_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  detail::HeaderScanner scan(bytes, name);
  const std::string magic = scan.token();
  if (magic != "P2" && magic != "P5") scan.fail("not a PGM file (magic '" + magic + "')", 0);
  Graymap g;
  g.width = scan.number("width");
  g.height = scan.number("height");
  g.maxval = scan.number("maxval");
  if (g.width == 0 || g.height == 0) scan.fail("zero image dimension");
  if (g.maxval == 0 || g.maxval > 65535) scan.fail("maxval must be in [1, 65535]");
  const std::size_t n = g.width * g.height;
  g.values.resize(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = scan.pos();
      g.values[i] = scan.number("sample");
      if (g.values[i] > g.maxval) scan.fail("sample exceeds maxval", at);
    }
    return g;
  }
  scan.end_binary_header();
  const std::size_t bps = g.maxval > 255 ? 2 : 1;
  const std::size_t start = scan.pos();
  if (bytes.size() - start < n * bps)
    scan.fail("pixel data truncated: need " + std::to_string(n * bps) + " bytes, have " +
              std::to_string(bytes.size() - start), start);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = start + i * bps;
    std::uint32_t v = bytes[at];
    if (bps == 2) v = (v << 8) | bytes[at + 1];
    if (v > g.maxval) scan.fail("sample exceeds maxval", at);
    g.values[i] = v;
  }
  return g;
}

inline Graymap read_pgm(const fs::path& path) { return parse_pgm(read_file(path), path.string()); }

inline std::string encode_pgm(const Graymap& g) {
  std::string out = "P5\n" + std::to_string(g.width) + " " + std::to_string(g.height) + "\n" +
                    std::to_string(g.maxval) + "\n";
  const bool wide = g.maxval > 255;
  for (auto v : g.values) {
    if (wide) out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

inline void write_pgm(const fs::path& path, const Graymap& g) { write_file(path, encode_pgm(g)); }

// ---------------------------------------------------------------------------
// Label maps are 8-bit PGMs: 0 unlabeled, 1..254 classes, 255 UNKNOWN.

inline constexpr std::uint32_t kUnknownCode = 255;

inline LabelMap read_label_map(const fs::path& path) {
  const Graymap g = read_pgm(path);
  LabelMap m(g.width, g.height);
  for (std::size_t i = 0; i < g.values.size(); ++i)
    m.labels[i] = g.values[i] == kUnknownCode && g.maxval == 255 ? kUnknown : static_cast<int>(g.values[i]);
  return m;
}

inline std::string encode_label_map(const LabelMap& m) {
  Graymap g;
  g.width = m.width;
  g.height = m.height;
  g.maxval = 255;
  g.values.reserve(m.size());
  for (int l : m.labels) {
    if (l == kUnknown)
      g.values.push_back(kUnknownCode);
    else if (l >= 0 && l < static_cast<int>(kUnknownCode))
      g.values.push_back(static_cast<std::uint32_t>(l));
    else
      throw format_error("label " + std::to_string(l) + " cannot be stored in an 8-bit label map");
  }
  return encode_pgm(g);
}

inline void write_label_map(const fs::path& path, const LabelMap& m) {
  write_file(path, encode_label_map(m));
}

// ---------------------------------------------------------------------------
// Rendering.

using Rgb = std::array<std::uint8_t, 3>;

struct Palette {
  Rgb unlabeled{0, 0, 0};
  std::vector<Rgb> classes;  // color of class k at index k-1
  Rgb unknown{255, 255, 255};
};

/// One color per class plus UNKNOWN. The first twelve follow the land-cover
/// legend (sea, surf, sand, truck farming, cereals, fallows, forest, scrub,
/// urban, burnt land, sabkha 1, sabkha 2); further classes get spread hues.
inline Palette default_palette(std::size_t classes) {
  static const std::array<Rgb, 12> legend = {{
      {0, 0, 139},     {100, 149, 237}, {238, 214, 175}, {154, 205, 50},
      {255, 215, 0},   {205, 133, 63},  {0, 100, 0},     {107, 142, 35},
      {220, 20, 60},   {64, 64, 64},    {176, 196, 222}, {147, 112, 219},
  }};
  Palette p;
  for (std::size_t k = 0; k < classes; ++k) {
    if (k < legend.size()) {
      p.classes.push_back(legend[k]);
      continue;
    }
    // Golden-angle hue walk at mid saturation; avoids the legend's exact colors.
    const double h = std::fmod(static_cast<double>(k) * 137.50776405, 360.0) / 60.0;
    const double c = 0.6, x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0)), m = 0.2;
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = c; g = x; break;
      case 1: r = x; g = c; break;
      case 2: g = c; b = x; break;
      case 3: g = x; b = c; break;
      case 4: r = x; b = c; break;
      default: r = c; b = x; break;
    }
    auto to8 = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); };
    p.classes.push_back({to8(r + m), to8(g + m), to8(b + m)});
  }
  return p;
}

inline std::string render_labels(const LabelMap& m, const Palette& palette) {
  std::string out = "P6\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
  out.reserve(out.size() + 3 * m.size());
  for (int l : m.labels) {
    const Rgb* c;
    if (l == kUnknown)
      c = &palette.unknown;
    else if (l == kUnlabeled)
      c = &palette.unlabeled;
    else if (l >= 1 && static_cast<std::size_t>(l) <= palette.classes.size())
      c = &palette.classes[static_cast<std::size_t>(l - 1)];
    else
      throw render_error("label " + std::to_string(l) + " has no palette entry");
    out.append(reinterpret_cast<const char*>(c->data()), 3);
  }
  return out;
}

inline void write_rendered(const fs::path& path, const LabelMap& m, const Palette& palette) {
  write_file(path, render_labels(m, palette));
}

// ---------------------------------------------------------------------------
// Raster bundles.
//
//   antimu-bundle 1
//   format bsq|pgm|csv
//   width W
//   height H
//   bands B
//   sample u8|u16|f32
//   files <name> [<name> ...]
//   band_names <name> ...      (optional)
//   labels <name>              (optional, label-map PGM)
//
// File names are relative to the header's directory.

struct RasterBundle {
  Raster raster;
  std::optional<LabelMap> labels;
  std::vector<std::string> band_names;
};

struct BundleHeader {
  BandFormat format = BandFormat::bsq;
  std::size_t width = 0, height = 0, bands = 0;
  SampleType sample = SampleType::u8;
  std::vector<std::string> files;
  std::vector<std::string> band_names;
  std::optional<std::string> labels;
};

inline BundleHeader parse_bundle_header(std::istream& in, const std::string& name) {
  BundleHeader h;
  std::string line;
  std::size_t lineno = 0;
  bool have_magic = false, have_format = false, have_sample = false, have_files = false;
  auto fail = [&](const std::string& msg) -> void {
    throw format_error(name + " line " + std::to_string(lineno) + ": " + msg);
  };
  auto count = [&](std::istringstream& ls) {
    long long v = -1;
    if (!(ls >> v) || v <= 0) fail("expected a positive integer");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (!have_magic) {
      std::string version;
      ls >> version;
      if (key != "antimu-bundle" || version != "1") fail("expected 'antimu-bundle 1'");
      have_magic = true;
      continue;
    }
    std::string v;
    if (key == "format") {
      ls >> v;
      h.format = parse_band_format(v);
      have_format = true;
    } else if (key == "width") {
      h.width = count(ls);
    } else if (key == "height") {
      h.height = count(ls);
    } else if (key == "bands") {
      h.bands = count(ls);
    } else if (key == "sample") {
      ls >> v;
      h.sample = parse_sample_type(v);
      have_sample = true;
    } else if (key == "files") {
      while (ls >> v) h.files.push_back(v);
      have_files = true;
    } else if (key == "band_names") {
      while (ls >> v) h.band_names.push_back(v);
    } else if (key == "labels") {
      if (!(ls >> v)) fail("labels needs a file name");
      h.labels = v;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_magic) throw format_error(name + ": empty header");
  if (!have_format || !have_sample || !have_files || h.width == 0 || h.height == 0 || h.bands == 0)
    throw format_error(name + ": header needs format, width, height, bands, sample and files");
  const std::size_t expected = h.format == BandFormat::bsq ? 1 : h.bands;
  if (h.files.size() != expected)
    throw format_error(name + ": " + std::to_string(h.bands) + " bands in " +
                       to_string(h.format) + " format need " + std::to_string(expected) +
                       " data file(s), header lists " + std::to_string(h.files.size()));
  if (!h.band_names.empty() && h.band_names.size() != h.bands)
    throw format_error(name + ": band_names count differs from bands");
  return h;
}

namespace detail {

inline std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline double normalize_checked(double raw, SampleType s, const std::string& file, std::size_t offset) {
  const double v = raw / sample_max(s);
  if (!(v >= 0.0 && v <= 1.0))
    throw format_error(file + " at offset " + std::to_string(offset) + ": value " +
                       std::to_string(raw) + " outside the " + to_string(s) + " range");
  return v;
}

inline void load_bsq(const BundleHeader& h, const fs::path& dir, std::vector<double>& data) {
  const fs::path file = dir / h.files[0];
  const auto bytes = read_file(file);
  const std::size_t bps = h.sample == SampleType::u8 ? 1 : (h.sample == SampleType::u16 ? 2 : 4);
  const std::size_t n = h.width * h.height * h.bands;
  if (bytes.size() != n * bps)
    throw format_error(file.string() + " at offset " + std::to_string(std::min(bytes.size(), n * bps)) +
                       ": expected " + std::to_string(n * bps) + " bytes, file has " +
                       std::to_string(bytes.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = i * bps;
    double raw;
    if (h.sample == SampleType::u8) {
      raw = bytes[at];
    } else if (h.sample == SampleType::u16) {
      raw = static_cast<double>(bytes[at] | (bytes[at + 1] << 8));
    } else {
      std::uint32_t bits = static_cast<std::uint32_t>(bytes[at]) |
                           (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
                           (static_cast<std::uint32_t>(bytes[at + 2]) << 16) |
                           (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
      float f;
      std::memcpy(&f, &bits, sizeof f);
      raw = f;
    }
    data[i] = normalize_checked(raw, h.sample, file.string(), at);
  }
}

inline void load_pgm_bands(const BundleHeader& h, const fs::path& dir, std::vector<double>& data) {
  for (std::size_t b = 0; b < h.bands; ++b) {
    const fs::path file = dir / h.files[b];
    const Graymap g = read_pgm(file);
    if (g.width != h.width || g.height != h.height)
      throw format_error(file.string() + " at offset 0: image is " + std::to_string(g.width) + "x" +
                         std::to_string(g.height) + ", header says " + std::to_string(h.width) +
                         "x" + std::to_string(h.height));
    for (std::size_t i = 0; i < g.values.size(); ++i)
      data[b * h.width * h.height + i] = static_cast<double>(g.values[i]) / g.maxval;
  }
}

inline void load_csv_bands(const BundleHeader& h, const fs::path& dir, std::vector<double>& data) {
  for (std::size_t b = 0; b < h.bands; ++b) {
    const fs::path file = dir / h.files[b];
    std::ifstream in(file);
    if (!in) throw format_error("cannot open " + file.string());
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (row >= h.height)
        throw format_error(file.string() + " at row " + std::to_string(row) + ": more rows than height");
      std::size_t col = 0, start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        const std::string tok = detail::trim_copy(line.substr(start, comma - start));
        if (col >= h.width)
          throw format_error(file.string() + " at row " + std::to_string(row) + ": more columns than width");
        double raw;
        try {
          raw = parse_real(tok, "csv sample");
        } catch (const format_error&) {
          throw format_error(file.string() + " at row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": bad number '" + tok + "'");
        }
        data[(b * h.height + row) * h.width + col] =
            normalize_checked(raw, h.sample, file.string(), row * h.width + col);
        ++col;
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (col != h.width)
        throw format_error(file.string() + " at row " + std::to_string(row) + ": " +
                           std::to_string(col) + " columns, width is " + std::to_string(h.width));
      ++row;
    }
    if (row != h.height)
      throw format_error(file.string() + ": " + std::to_string(row) + " rows, height is " +
                         std::to_string(h.height));
  }
}

}  // namespace detail

inline RasterBundle load_bundle(const fs::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw format_error("cannot open " + header_path.string());
  const BundleHeader h = parse_bundle_header(in, header_path.string());
  const fs::path dir = header_path.parent_path();

  std::vector<double> data(h.width * h.height * h.bands);
  switch (h.format) {
    case BandFormat::bsq: detail::load_bsq(h, dir, data); break;
    case BandFormat::pgm: detail::load_pgm_bands(h, dir, data); break;
    case BandFormat::csv: detail::load_csv_bands(h, dir, data); break;
  }

  RasterBundle bundle{Raster(h.width, h.height, h.bands, std::move(data)), std::nullopt, h.band_names};
  if (h.labels) {
    LabelMap labels = read_label_map(dir / *h.labels);
    if (labels.width != h.width || labels.height != h.height)
      throw format_error((dir / *h.labels).string() + ": label map size differs from the raster");
    bundle.labels = std::move(labels);
  }
  return bundle;
}

struct SaveOptions {
  BandFormat format = BandFormat::bsq;
  SampleType sample = SampleType::u16;
};

/// Writes header, band data and labels next to `header_path`. Data files are
/// named <stem>.bsq, <stem>_b<k>.pgm or <stem>_b<k>.csv; labels <stem>_labels.pgm.
inline void save_bundle(const fs::path& header_path, const RasterBundle& bundle,
                        const SaveOptions& opt = {}) {
  const Raster& r = bundle.raster;
  const fs::path dir = header_path.parent_path();
  const std::string stem = header_path.stem().string();
  if (opt.format == BandFormat::pgm && opt.sample == SampleType::f32)
    throw format_error("pgm bands need an integer sample type");

  std::vector<std::string> files;
  const std::size_t plane = r.width() * r.height();
  if (opt.format == BandFormat::bsq) {
    files.push_back(stem + ".bsq");
    std::string bytes;
    for (double v : r.data()) {
      if (opt.sample == SampleType::u8) {
        bytes.push_back(static_cast<char>(quantize(v, opt.sample)));
      } else if (opt.sample == SampleType::u16) {
        const auto q = quantize(v, opt.sample);
        bytes.push_back(static_cast<char>(q & 0xff));
        bytes.push_back(static_cast<char>((q >> 8) & 0xff));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
      }
    }
    write_file(dir / files[0], bytes);
  } else {
    for (std::size_t b = 0; b < r.bands(); ++b) {
      if (opt.format == BandFormat::pgm) {
        files.push_back(stem + "_b" + std::to_string(b + 1) + ".pgm");
        Graymap g;
        g.width = r.width();
        g.height = r.height();
        g.maxval = static_cast<std::uint32_t>(sample_max(opt.sample));
        for (std::size_t i = 0; i < plane; ++i) g.values.push_back(quantize(r.data()[b * plane + i], opt.sample));
        write_pgm(dir / files.back(), g);
      } else {
        files.push_back(stem + "_b" + std::to_string(b + 1) + ".csv");
        std::string text;
        for (std::size_t y = 0; y < r.height(); ++y) {
          for (std::size_t x = 0; x < r.width(); ++x) {
            if (x) text.push_back(',');
            const double v = r.at(b, x, y);
            text += opt.sample == SampleType::f32 ? format_real(static_cast<float>(v))
                                                  : std::to_string(quantize(v, opt.sample));
          }
          text.push_back('\n');
        }
        write_file(dir / files.back(), text);
      }
    }
  }

  std::ostringstream hdr;
  hdr << "antimu-bundle 1\n";
  hdr << "format " << to_string(opt.format) << '\n';
  hdr << "width " << r.width() << '\n';
  hdr << "height " << r.height() << '\n';
  hdr << "bands " << r.bands() << '\n';
  hdr << "sample " << to_string(opt.sample) << '\n';
  hdr << "files";
  for (const auto& f : files) hdr << ' ' << f;
  hdr << '\n';
  if (!bundle.band_names.empty()) {
    hdr << "band_names";
    for (const auto& n : bundle.band_names) hdr << ' ' << n;
    hdr << '\n';
  }
  if (bundle.labels) {
    const std::string lf = stem + "_labels.pgm";
    write_label_map(dir / lf, *bundle.labels);
    hdr << "labels " << lf << '\n';
  }
  write_file(header_path, hdr.str());
}

}  // namespace antimu::io
