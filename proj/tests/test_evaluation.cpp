#include <gtest/gtest.h>

#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "antimu/evaluation.hpp"
#include "antimu/random.hpp"

using namespace antimu;

namespace {

LabelMap map_of(std::size_t w, std::size_t h, std::vector<int> labels) {
  LabelMap m(w, h);
  m.labels = std::move(labels);
  return m;
}

}  // namespace

TEST(Rate, PerfectAndDisjoint) {
  const auto truth = map_of(2, 2, {1, 2, 2, 1});
  EXPECT_DOUBLE_EQ(classification_rate(truth, truth, labeled_mask(truth)), 100.0);
  const auto wrong = map_of(2, 2, {2, 1, 1, 2});
  EXPECT_DOUBLE_EQ(classification_rate(wrong, truth, labeled_mask(truth)), 0.0);
}

TEST(Rate, NineteenOfTwenty) {
  std::vector<int> t(20, 1), p(20, 1);
  p[7] = kUnknown;
  const auto truth = map_of(20, 1, t), pred = map_of(20, 1, p);
  EXPECT_DOUBLE_EQ(classification_rate(pred, truth, labeled_mask(truth)), 95.0);
  EXPECT_DOUBLE_EQ(confusion(pred, truth, labeled_mask(truth), 1).rate(), 95.0);
}

TEST(Rate, Errors) {
  const auto truth = map_of(2, 1, {0, 0});
  EXPECT_THROW(classification_rate(truth, truth, labeled_mask(truth)), input_error);
  EXPECT_THROW(classification_rate(map_of(1, 1, {1}), truth, {true, true}), input_error);
}

TEST(Confusion, PerfectIsDiagonal) {
  const auto truth = map_of(3, 2, {1, 2, 3, 3, 2, 1});
  const auto cm = confusion(truth, truth, labeled_mask(truth), 3);
  for (int t = 1; t <= 3; ++t) {
    for (int p = 1; p <= 3; ++p) EXPECT_EQ(cm.at(t, p), t == p ? 2u : 0u);
    EXPECT_EQ(cm.at(t, kUnknown), 0u);
  }
}

TEST(Confusion, AllUnknown) {
  const auto truth = map_of(2, 2, {1, 2, 1, 2});
  const auto pred = map_of(2, 2, {kUnknown, kUnknown, kUnknown, kUnknown});
  const auto cm = confusion(pred, truth, labeled_mask(truth), 2);
  EXPECT_EQ(cm.at(1, kUnknown), 2u);
  EXPECT_EQ(cm.at(2, kUnknown), 2u);
  EXPECT_EQ(cm.correct(), 0u);
  EXPECT_DOUBLE_EQ(cm.confusion_rate(), 100.0);
}

TEST(Confusion, MatchesBruteForcePairCounter) {
  Rng rng(1);
  const std::size_t n = 500;
  std::vector<int> t(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = 1 + static_cast<int>(uniform_index(rng, 3));
    p[i] = bernoulli(rng, 0.1) ? kUnknown : 1 + static_cast<int>(uniform_index(rng, 3));
  }
  std::map<std::pair<int, int>, std::size_t> pairs;
  for (std::size_t i = 0; i < n; ++i) ++pairs[{t[i], p[i]}];

  const auto cm = confusion(std::span<const int>(p), std::span<const int>(t), 3);
  std::size_t diag = 0;
  for (int a = 1; a <= 3; ++a) {
    for (int b : {1, 2, 3, kUnknown}) EXPECT_EQ(cm.at(a, b), (pairs[{a, b}]));
    diag += pairs[{a, a}];
  }
  EXPECT_EQ(cm.total(), n);
  EXPECT_DOUBLE_EQ(cm.rate(), 100.0 * diag / n);
}

TEST(Confusion, PermutationInvariant) {
  Rng rng(2);
  const std::size_t n = 300;
  std::vector<int> t(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = 1 + static_cast<int>(uniform_index(rng, 4));
    p[i] = 1 + static_cast<int>(uniform_index(rng, 4));
  }
  const auto before = confusion(std::span<const int>(p), std::span<const int>(t), 4);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, rng);
  std::vector<int> t2(n), p2(n);
  for (std::size_t i = 0; i < n; ++i) {
    t2[i] = t[order[i]];
    p2[i] = p[order[i]];
  }
  EXPECT_EQ(confusion(std::span<const int>(p2), std::span<const int>(t2), 4), before);
}

TEST(Confusion, PairRatesAndRowTotals) {
  const auto truth = map_of(4, 1, {1, 1, 1, 2});
  const auto pred = map_of(4, 1, {1, 2, 2, 2});
  const auto cm = confusion(pred, truth, labeled_mask(truth), 2);
  EXPECT_EQ(cm.row_total(1), 3u);
  EXPECT_NEAR(cm.pair_rate(1, 2), 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(cm.error(), 0.5);
  EXPECT_THROW(cm.at(3, 1), input_error);
}

TEST(Metrics, TsvLayout) {
  const auto truth = map_of(2, 1, {1, 2});
  const auto pred = map_of(2, 1, {1, kUnknown});
  const auto cm = confusion(pred, truth, labeled_mask(truth), 2);
  std::ostringstream os;
  write_metrics_tsv(os, cm);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("metric\tvalue\nclassification_rate\t50.0000\n", 0), 0u);
  EXPECT_NE(s.find("pair\t2\tunknown\t1\t100.0000\n"), std::string::npos);
  std::ostringstream table;
  write_metrics_table(table, cm);
  EXPECT_NE(table.str().find("classification rate: 50.00 %"), std::string::npos);
}
