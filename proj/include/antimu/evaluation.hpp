#pragma once

// Error, confusion matrix and classification rate of predicted labels
// against ground truth. UNKNOWN predictions count as errors.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/raster.hpp"

namespace antimu {

// Rows are true classes 1..K, columns predicted classes 1..K plus a final
// UNKNOWN column.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes)
      : classes_(classes), counts_(classes * (classes + 1), 0) {}

  std::size_t classes() const { return classes_; }
  std::size_t unknown_column() const { return classes_; }

  // truth in 1..K; pred in 1..K or kUnknown.
  void add(int truth, int pred) { ++counts_[index(truth, pred)]; }

  std::size_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }
  void set(int truth, int pred, std::size_t count) { counts_[index(truth, pred)] = count; }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  std::size_t correct() const {
    std::size_t c = 0;
    for (std::size_t k = 1; k <= classes_; ++k) c += at(static_cast<int>(k), static_cast<int>(k));
    return c;
  }
  std::size_t row_total(int truth) const {
    std::size_t t = 0;
    for (std::size_t p = 1; p <= classes_; ++p) t += at(truth, static_cast<int>(p));
    return t + at(truth, kUnknown);
  }

  // Percent of evaluated pixels classified correctly.
  double rate() const {
    const auto t = total();
    return t == 0 ? 0.0 : 100.0 * static_cast<double>(correct()) / static_cast<double>(t);
  }
  double error() const { return 1.0 - rate() / 100.0; }

  // Percent of class `truth` assigned to `pred`.
  double pair_rate(int truth, int pred) const {
    const auto r = row_total(truth);
    return r == 0 ? 0.0 : 100.0 * static_cast<double>(at(truth, pred)) / static_cast<double>(r);
  }

  // Percent of evaluated pixels off the diagonal (UNKNOWN included).
  double confusion_rate() const { return 100.0 - rate(); }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int truth, int pred) const {
    if (truth < 1 || static_cast<std::size_t>(truth) > classes_)
      throw input_error("true class " + std::to_string(truth) + " outside [1, " +
                        std::to_string(classes_) + "]");
    std::size_t col;
    if (pred == kUnknown)
      col = classes_;
    else if (pred >= 1 && static_cast<std::size_t>(pred) <= classes_)
      col = static_cast<std::size_t>(pred - 1);
    else
      throw input_error("predicted class " + std::to_string(pred) + " outside [1, " +
                        std::to_string(classes_) + "]");
    return static_cast<std::size_t>(truth - 1) * (classes_ + 1) + col;
  }

  std::size_t classes_ = 0;
  std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth,
                                 std::size_t classes) {
  if (pred.size() != truth.size()) throw input_error("prediction and truth differ in length");
  if (pred.empty()) throw input_error("nothing to evaluate");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < pred.size(); ++i) cm.add(truth[i], pred[i]);
  return cm;
}

namespace detail {
inline void check_maps(const LabelMap& pred, const LabelMap& truth, const std::vector<bool>& mask) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw input_error("prediction and truth maps differ in size");
  if (mask.size() != truth.size()) throw input_error("mask size differs from the label maps");
}
}  // namespace detail

/// Confusion over the masked pixels. Every masked pixel needs a truth label
/// in 1..K.
inline ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& truth,
                                 const std::vector<bool>& mask, std::size_t classes) {
  detail::check_maps(pred, truth, mask);
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (mask[i]) cm.add(truth.labels[i], pred.labels[i]);
  if (cm.total() == 0) throw input_error("evaluation mask is empty");
  return cm;
}

inline std::vector<bool> labeled_mask(const LabelMap& truth) {
  std::vector<bool> mask(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) mask[i] = truth.labels[i] > 0;
  return mask;
}

inline std::size_t max_label(const LabelMap& map) {
  int k = 0;
  for (int v : map.labels) k = std::max(k, v);
  return static_cast<std::size_t>(k);
}

inline double classification_rate(const LabelMap& pred, const LabelMap& truth,
                                  const std::vector<bool>& mask) {
  detail::check_maps(pred, truth, mask);
  std::size_t evaluated = 0, correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mask[i]) continue;
    ++evaluated;
    if (pred.labels[i] == truth.labels[i] && pred.labels[i] != kUnknown) ++correct;
  }
  if (evaluated == 0) throw input_error("evaluation mask is empty");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(evaluated);
}

// Human-readable summary with the full matrix.
inline void write_metrics_table(std::ostream& os, const ConfusionMatrix& cm) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", cm.rate());
  os << "classification rate: " << buf << " %\n";
  std::snprintf(buf, sizeof buf, "%.4f", cm.error());
  os << "error:               " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", cm.confusion_rate());
  os << "confusion rate:      " << buf << " %\n";
  os << "evaluated pixels:    " << cm.total() << "\n\n";
  os << "truth\\pred";
  for (std::size_t p = 1; p <= cm.classes(); ++p) {
    std::snprintf(buf, sizeof buf, "%7zu", p);
    os << buf;
  }
  os << "    unk\n";
  for (std::size_t t = 1; t <= cm.classes(); ++t) {
    std::snprintf(buf, sizeof buf, "%9zu ", t);
    os << buf;
    for (std::size_t p = 1; p <= cm.classes(); ++p) {
      std::snprintf(buf, sizeof buf, "%7zu", cm.at(static_cast<int>(t), static_cast<int>(p)));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%7zu", cm.at(static_cast<int>(t), kUnknown));
    os << buf << '\n';
  }
}

/// Tab-separated metrics: a header block of `metric<TAB>value` lines, then
/// one `pair<TAB>truth<TAB>pred<TAB>count<TAB>percent` line per cell
/// (pred is "unknown" for the rejection column).
inline void write_metrics_tsv(std::ostream& os, const ConfusionMatrix& cm) {
  char buf[64];
  os << "metric\tvalue\n";
  std::snprintf(buf, sizeof buf, "%.4f", cm.rate());
  os << "classification_rate\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", cm.error());
  os << "error\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.4f", cm.confusion_rate());
  os << "confusion_rate\t" << buf << '\n';
  os << "evaluated\t" << cm.total() << '\n';
  os << "classes\t" << cm.classes() << '\n';
  for (std::size_t t = 1; t <= cm.classes(); ++t) {
    for (std::size_t p = 0; p <= cm.classes(); ++p) {
      const int pred = p == cm.classes() ? kUnknown : static_cast<int>(p + 1);
      std::snprintf(buf, sizeof buf, "%.4f", cm.pair_rate(static_cast<int>(t), pred));
      os << "pair\t" << t << '\t' << (pred == kUnknown ? std::string("unknown") : std::to_string(pred))
         << '\t' << cm.at(static_cast<int>(t), pred) << '\t' << buf << '\n';
    }
  }
}

}  // namespace antimu
