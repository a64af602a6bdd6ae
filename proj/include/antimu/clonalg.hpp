#pragma once

// Clonal selection (CLONALG, pattern-recognition mode) over bit-string
// antibodies. Affinity is the Hamming distance, so lower is better.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "antimu/error.hpp"
#include "antimu/features.hpp"
#include "antimu/random.hpp"

namespace antimu::clonalg {

struct Params {
  std::size_t pop_size = 50;       // N, memory + remainder
  std::size_t select_count = 10;   // n (Ncm)
  double clone_factor = 10.0;      // beta (Coe)
  std::size_t generations = 30;    // G (Gen)
  std::size_t replace_count = 0;   // d (NbrLar)
  std::size_t memory_size = 1;     // m, one slot per antigen
  std::size_t string_length = 0;   // L
  double p_min = 0.01;             // flip probability for rank 1
  double p_max = 0.3;              // flip probability for rank n

  std::size_t remainder_size() const { return pop_size - memory_size; }

  void validate() const {
    if (string_length == 0) throw config_error("clonalg: string length must be >= 1");
    if (memory_size == 0) throw config_error("clonalg: memory size must be >= 1");
    if (memory_size > pop_size)
      throw config_error("clonalg: memory size " + std::to_string(memory_size) +
                         " exceeds population " + std::to_string(pop_size));
    if (select_count == 0 || select_count > pop_size)
      throw config_error("clonalg: selection count must be in [1, N]");
    if (!(clone_factor > 0.0)) throw config_error("clonalg: clone factor must be > 0");
    if (generations == 0) throw config_error("clonalg: generations must be >= 1");
    if (replace_count >= pop_size || replace_count > remainder_size())
      throw config_error("clonalg: replacement count must not exceed the remainder size");
    if (!(p_min >= 0.0 && p_min <= p_max && p_max <= 1.0))
      throw config_error("clonalg: need 0 <= p_min <= p_max <= 1");
  }
};

struct AntibodyPool {
  std::vector<BitString> memory;
  std::vector<BitString> remainder;

  std::size_t size() const { return memory.size() + remainder.size(); }
  const BitString& operator[](std::size_t i) const {
    return i < memory.size() ? memory[i] : remainder[i - memory.size()];
  }
  bool operator==(const AntibodyPool&) const = default;
};

using Affinity = std::size_t;

inline Affinity hamming_affinity(const BitString& ab, const BitString& ag) {
  if (ab.size() != ag.size())
    throw affinity_error("affinity between strings of length " + std::to_string(ab.size()) +
                         " and " + std::to_string(ag.size()));
  const auto& a = ab.words();
  const auto& b = ag.words();
  Affinity d = 0;
  for (std::size_t w = 0; w < a.size(); ++w) d += static_cast<Affinity>(std::popcount(a[w] ^ b[w]));
  return d;
}

// round(beta * N / rank), halves rounded up.
inline std::size_t clone_count(double beta, std::size_t pop_size, std::size_t rank) {
  if (rank == 0) throw rank_error("clone rank starts at 1");
  if (!(beta > 0.0)) throw config_error("clone factor must be > 0");
  return static_cast<std::size_t>(
      std::floor(beta * static_cast<double>(pop_size) / static_cast<double>(rank) + 0.5));
}

// N_c: clones produced per antigen exposure for n selected antibodies.
inline std::size_t total_clones(double beta, std::size_t pop_size, std::size_t selected) {
  std::size_t total = 0;
  for (std::size_t i = 1; i <= selected; ++i) total += clone_count(beta, pop_size, i);
  return total;
}

// Linear in rank: rank 1 flips with p_min, rank n with p_max.
inline double mutation_probability(std::size_t rank, std::size_t selected, double p_min,
                                   double p_max) {
  if (rank == 0 || rank > std::max<std::size_t>(selected, 1))
    throw rank_error("mutation rank " + std::to_string(rank) + " outside [1, " +
                     std::to_string(selected) + "]");
  if (selected <= 1) return p_min;
  return p_min + (p_max - p_min) * static_cast<double>(rank - 1) /
                     static_cast<double>(selected - 1);
}

// Flips each bit independently with probability p.
inline void flip_bits(BitString& bs, double p, Rng& rng) {
  const std::size_t n = bs.size();
  if (p <= 0.0 || n == 0) return;
  if (p >= 1.0) {
    for (auto& w : bs.words()) w = ~w;
    bs.clear_tail();
    return;
  }
  const double log1m_p = std::log1p(-p);
  std::size_t i = geometric_gap(rng, log1m_p);
  while (i < n) {
    bs.flip(i);
    const std::size_t gap = geometric_gap(rng, log1m_p);
    if (gap >= n) break;
    i += gap + 1;
  }
}

inline BitString mutate(const BitString& clone, std::size_t rank, std::size_t selected,
                        double p_min, double p_max, Rng& rng) {
  BitString out = clone;
  flip_bits(out, mutation_probability(rank, selected, p_min, p_max), rng);
  return out;
}

inline BitString random_bits(std::size_t length, Rng& rng) {
  BitString bs(length);
  for (auto& w : bs.words()) w = rng();
  bs.clear_tail();
  return bs;
}

inline AntibodyPool random_pool(const Params& params, Rng& rng) {
  params.validate();
  AntibodyPool pool;
  for (std::size_t i = 0; i < params.memory_size; ++i)
    pool.memory.push_back(random_bits(params.string_length, rng));
  for (std::size_t i = 0; i < params.remainder_size(); ++i)
    pool.remainder.push_back(random_bits(params.string_length, rng));
  return pool;
}

inline Affinity best_affinity(const AntibodyPool& pool, const BitString& antigen) {
  Affinity best = std::numeric_limits<Affinity>::max();
  for (std::size_t i = 0; i < pool.size(); ++i) best = std::min(best, hamming_affinity(pool[i], antigen));
  return best;
}

/// One antigen exposure. Selects the n antibodies of the whole pool closest
/// to the antigen (ties by lower pool index, memory first), clones rank i
/// round(beta*N/i) times, mutates the clones with the rank's flip
/// probability, and lets the best clone replace memory[slot] if it is
/// strictly closer. The d remainder antibodies farthest from the antigen are
/// then replaced by fresh random strings.
inline AntibodyPool generation_step(AntibodyPool pool, const BitString& antigen, std::size_t slot,
                                    const Params& params, Rng& rng) {
  params.validate();
  if (antigen.size() != params.string_length)
    throw affinity_error("antigen length " + std::to_string(antigen.size()) +
                         " != string length " + std::to_string(params.string_length));
  if (pool.memory.size() != params.memory_size ||
      pool.remainder.size() != params.remainder_size())
    throw input_error("antibody pool sizes do not match parameters");
  if (slot >= pool.memory.size()) throw input_error("memory slot out of range");

  const std::size_t n_pool = pool.size();
  std::vector<Affinity> affinity(n_pool);
  for (std::size_t i = 0; i < n_pool; ++i) affinity[i] = hamming_affinity(pool[i], antigen);

  std::vector<std::size_t> order(n_pool);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return affinity[a] < affinity[b]; });

  const std::size_t selected = params.select_count;
  BitString scratch;
  BitString best_clone;
  Affinity best_clone_affinity = std::numeric_limits<Affinity>::max();
  for (std::size_t rank = 1; rank <= selected; ++rank) {
    const BitString& parent = pool[order[rank - 1]];
    const double p = mutation_probability(rank, selected, params.p_min, params.p_max);
    const std::size_t clones = clone_count(params.clone_factor, params.pop_size, rank);
    for (std::size_t c = 0; c < clones; ++c) {
      scratch = parent;
      flip_bits(scratch, p, rng);
      const Affinity a = hamming_affinity(scratch, antigen);
      if (a < best_clone_affinity) {
        best_clone_affinity = a;
        best_clone = scratch;
      }
    }
  }

  if (best_clone_affinity < affinity[slot]) pool.memory[slot] = std::move(best_clone);

  if (params.replace_count > 0) {
    const std::size_t m = pool.memory.size();
    std::vector<std::size_t> worst(pool.remainder.size());
    std::iota(worst.begin(), worst.end(), 0);
    std::stable_sort(worst.begin(), worst.end(), [&](std::size_t a, std::size_t b) {
      return affinity[m + a] > affinity[m + b];
    });
    for (std::size_t k = 0; k < params.replace_count; ++k)
      pool.remainder[worst[k]] = random_bits(params.string_length, rng);
  }
  return pool;
}

struct Result {
  std::vector<BitString> memory;       // one cell per antigen, same order
  std::vector<Affinity> initial_best;  // best pool affinity per antigen before training
  std::vector<Affinity> final_affinity;
};

// Runs G generations from the given pool. Every generation exposes each
// antigen exactly once, in a fresh random order.
inline Result train(AntibodyPool pool, const std::vector<BitString>& antigens,
                    const Params& params, Rng& rng) {
  if (antigens.empty()) throw input_error("clonalg: at least one antigen is required");
  params.validate();
  if (params.memory_size != antigens.size())
    throw input_error("clonalg: memory size " + std::to_string(params.memory_size) +
                      " must equal the antigen count " + std::to_string(antigens.size()));
  for (const auto& ag : antigens)
    if (ag.size() != params.string_length)
      throw input_error("clonalg: antigen length does not match string length");

  Result result;
  result.initial_best.reserve(antigens.size());
  for (const auto& ag : antigens) result.initial_best.push_back(best_affinity(pool, ag));

  std::vector<std::size_t> order(antigens.size());
  for (std::size_t g = 0; g < params.generations; ++g) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (std::size_t a : order) pool = generation_step(std::move(pool), antigens[a], a, params, rng);
  }

  result.memory = std::move(pool.memory);
  for (std::size_t a = 0; a < antigens.size(); ++a)
    result.final_affinity.push_back(hamming_affinity(result.memory[a], antigens[a]));
  return result;
}

inline Result train(const std::vector<BitString>& antigens, const Params& params, Rng& rng) {
  if (antigens.empty()) throw input_error("clonalg: at least one antigen is required");
  AntibodyPool pool = random_pool(params, rng);
  return train(std::move(pool), antigens, params, rng);
}

}  // namespace antimu::clonalg
