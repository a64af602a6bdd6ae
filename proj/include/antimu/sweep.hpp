#pragma once

// Parameter sweeps: one configuration parameter over a list of values, each
// value trained with and without heterogeneous ant amplitudes over several
// seeds, scored by the held-out classification rate.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "antimu/config.hpp"
#include "antimu/evaluation.hpp"
#include "antimu/pipeline.hpp"
#include "antimu/random.hpp"
#include "antimu/raster.hpp"

namespace antimu {

struct SweepGrid {
  std::string param;                // config key, e.g. "NbrItr"
  std::vector<std::string> values;  // values as config text
  std::vector<std::uint64_t> seeds;  // seed indices; each is mixed with the master seed
};

enum class SweepOrder { forward, reverse };

struct SweepOptions {
  std::size_t threads = 1;
  SweepOrder order = SweepOrder::forward;
  std::size_t classify_threads = 1;
};

struct SweepRun {
  std::size_t row = 0;
  bool heterogeneous = false;
  std::uint64_t seed_index = 0;
  std::optional<double> rate;  // held-out percent; empty when the run failed
  std::string error;

  bool operator==(const SweepRun&) const = default;
};

struct SweepRow {
  std::string value;
  std::optional<double> homogeneous;    // mean over successful seeds
  std::optional<double> heterogeneous;

  bool operator==(const SweepRow&) const = default;
};

struct SweepTable {
  std::string param;
  std::vector<SweepRow> rows;
  std::vector<SweepRun> runs;  // every run, in grid order

  bool operator==(const SweepTable&) const = default;
};

// Ordering of runs inside a table: row, then seed, then homogeneous before
// heterogeneous.
inline std::size_t sweep_run_index(std::size_t row, std::size_t seed_pos, bool het, std::size_t seeds) {
  return (row * seeds + seed_pos) * 2 + (het ? 1 : 0);
}

// Keys read only by the optimization phase. Sweeping one of them reuses a
// single preparation per seed across all rows.
inline bool optimization_only_key(const std::string& key) {
  static const char* const keys[] = {"NbrAnt",     "NbrSit",     "P_local",    "NbrItr",
                                     "A_site",     "A_local",    "A_site_min", "A_site_max",
                                     "LocalRatio", "Heterogeneous", "NestPeriod", "Stagnation",
                                     "MaxEvals"};
  return std::find(std::begin(keys), std::end(keys), key) != std::end(keys);
}

// Training state right after the stages that precede the optimization phase.
struct PreparedSeed {
  PreparedTraining prep;
  Rng rng;
};

inline PreparedSeed prepare_seed(const Raster& raster, const LabelMap& truth, const RunConfig& cfg) {
  Rng rng(cfg.seed);
  PreparedTraining prep = prepare_training(raster, truth, cfg, rng);
  return {std::move(prep), rng};
}

inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) fn(k);
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

/// Trains and scores both amplitude modes for one (row, seed). The seed comes
/// from (master seed, seed index) only, so every row of a seed shares its
/// random stream and results do not depend on scheduling. Both modes finish
/// the same preparation with copies of the same stream. `shared` is a
/// preparation made from the base config, valid when the swept key is read
/// only by the optimization phase.
inline std::array<SweepRun, 2> run_sweep_cell(const Raster& raster, const LabelMap& truth,
                                              const RunConfig& base, const SweepGrid& grid,
                                              std::size_t row, std::uint64_t seed_index,
                                              std::size_t classify_threads = 1,
                                              const PreparedSeed* shared = nullptr) {
  std::array<SweepRun, 2> out;
  for (int het = 0; het < 2; ++het) {
    out[het].row = row;
    out[het].heterogeneous = het == 1;
    out[het].seed_index = seed_index;
  }
  try {
    RunConfig cfg = base;
    set_param(cfg, grid.param, grid.values[row]);
    cfg.seed = derive_seed(base.seed, {seed_index});
    std::optional<PreparedSeed> own;
    if (!shared) own = prepare_seed(raster, truth, cfg);
    const PreparedSeed& ps = shared ? *shared : *own;
    for (int het = 0; het < 2; ++het) {
      try {
        RunConfig mode = cfg;
        mode.heterogeneous = het == 1;
        Rng r = ps.rng;
        const TrainedModel tm = finish_training(ps.prep, mode, r);
        const Classification c = classify_raster(tm, raster, classify_threads);
        out[het].rate = classification_rate(c.labels, truth, held_out_mask(tm, truth));
      } catch (const std::exception& e) {
        out[het].error = e.what();
      }
    }
  } catch (const std::exception& e) {
    out[0].error = out[1].error = e.what();
  }
  return out;
}

inline SweepTable sweep(const SweepGrid& grid, const Raster& raster, const LabelMap& truth,
                        const RunConfig& base, const SweepOptions& opt = {}) {
  if (grid.values.empty()) throw config_error("sweep grid has no values");
  if (grid.seeds.empty()) throw config_error("sweep needs at least one seed");
  {
    RunConfig probe = base;
    get_param(probe, grid.param);  // unknown key -> config_error up front
  }

  const std::size_t S = grid.seeds.size();
  const std::size_t cells = grid.values.size() * S;

  std::vector<std::optional<PreparedSeed>> shared(S);
  std::vector<std::string> shared_error(S);
  const bool share = optimization_only_key(grid.param);
  if (share)
    parallel_for(S, opt.threads, [&](std::size_t s) {
      RunConfig cfg = base;
      cfg.seed = derive_seed(base.seed, {grid.seeds[s]});
      try {
        shared[s] = prepare_seed(raster, truth, cfg);
      } catch (const std::exception& e) {
        shared_error[s] = e.what();
      }
    });

  std::vector<SweepRun> runs(cells * 2);
  std::vector<std::size_t> schedule(cells);
  for (std::size_t i = 0; i < cells; ++i) schedule[i] = i;
  if (opt.order == SweepOrder::reverse) std::reverse(schedule.begin(), schedule.end());

  parallel_for(cells, opt.threads, [&](std::size_t k) {
    const std::size_t cell = schedule[k];
    const std::size_t row = cell / S, seed_pos = cell % S;
    std::array<SweepRun, 2> pair;
    if (share && !shared[seed_pos]) {
      for (int het = 0; het < 2; ++het)
        pair[het] = {row, het == 1, grid.seeds[seed_pos], std::nullopt, shared_error[seed_pos]};
    } else {
      pair = run_sweep_cell(raster, truth, base, grid, row, grid.seeds[seed_pos], opt.classify_threads,
                            share ? &*shared[seed_pos] : nullptr);
    }
    runs[sweep_run_index(row, seed_pos, false, S)] = std::move(pair[0]);
    runs[sweep_run_index(row, seed_pos, true, S)] = std::move(pair[1]);
  });

  SweepTable table;
  table.param = grid.param;
  for (std::size_t row = 0; row < grid.values.size(); ++row) {
    SweepRow out{grid.values[row], std::nullopt, std::nullopt};
    for (int het = 0; het < 2; ++het) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t s = 0; s < S; ++s) {
        const auto& r = runs[sweep_run_index(row, s, het == 1, S)];
        if (r.rate) {
          sum += *r.rate;
          ++n;
        }
      }
      if (n > 0) (het ? out.heterogeneous : out.homogeneous) = sum / static_cast<double>(n);
    }
    table.rows.push_back(std::move(out));
  }
  table.runs = std::move(runs);
  return table;
}

/// Tab-separated table:
///   <param>\tRBFU-API rate\tRBFU-API_h rate
///   <value>\t<percent>\t<percent>      (NA when every seed failed)
/// followed by one "# failed ..." line per failed run.
inline void write_sweep_tsv(std::ostream& os, const SweepTable& t) {
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  os << t.param << "\tRBFU-API rate\tRBFU-API_h rate\n";
  for (const auto& r : t.rows) os << r.value << '\t' << cell(r.homogeneous) << '\t' << cell(r.heterogeneous) << '\n';
  for (const auto& r : t.runs)
    if (!r.rate)
      os << "# failed\t" << t.param << '=' << t.rows[r.row].value << "\tseed " << r.seed_index << '\t'
         << (r.heterogeneous ? "heterogeneous" : "homogeneous") << '\t' << r.error << '\n';
}

// Per-run detail, one line per run in grid order.
inline void write_sweep_runs_tsv(std::ostream& os, const SweepTable& t) {
  os << t.param << "\tseed\tmode\trate\n";
  for (const auto& r : t.runs) {
    os << t.rows[r.row].value << '\t' << r.seed_index << '\t' << (r.heterogeneous ? "API_h" : "API") << '\t';
    if (r.rate) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", *r.rate);
      os << buf;
    } else {
      os << "NA";
    }
    os << '\n';
  }
}

}  // namespace antimu
