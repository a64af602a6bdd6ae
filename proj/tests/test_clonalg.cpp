#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "antimu/clonalg.hpp"

using namespace antimu;
using namespace antimu::clonalg;

namespace {

BitString random_string(std::size_t L, Rng& rng) {
  BitString bs(L);
  for (std::size_t i = 0; i < L; ++i) bs.set(i, bernoulli(rng, 0.5));
  return bs;
}

std::size_t positional_distance(const BitString& a, const BitString& b) {
  const std::string sa = a.to_string(), sb = b.to_string();
  std::size_t d = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) d += sa[i] != sb[i];
  return d;
}

// round-half-up of (num/den) * N / i in integers: floor((2*num*N + den*i) / (2*den*i)).
std::uint64_t rational_clone_count(std::uint64_t num, std::uint64_t den, std::uint64_t N,
                                   std::uint64_t i) {
  return (2 * num * N + den * i) / (2 * den * i);
}

Params small_params(std::size_t L) {
  Params p;
  p.string_length = L;
  return p;
}

}  // namespace

TEST(Hamming, Examples) {
  const auto a = BitString::from_string("10110");
  EXPECT_EQ(hamming_affinity(a, a), 0u);
  EXPECT_EQ(hamming_affinity(a, a.complement()), 5u);
  EXPECT_EQ(hamming_affinity(a, BitString::from_string("10011")), 2u);
}

TEST(Hamming, LengthMismatch) {
  EXPECT_THROW(hamming_affinity(BitString(4), BitString(5)), affinity_error);
}

TEST(Hamming, MatchesPositionalCounter) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t L = 1 + uniform_index(rng, 200);
    const auto a = random_string(L, rng), b = random_string(L, rng);
    const auto d = hamming_affinity(a, b);
    EXPECT_EQ(d, positional_distance(a, b));
    EXPECT_EQ(d, hamming_affinity(b, a));
    EXPECT_LE(d, L);
    EXPECT_EQ(d == 0, a == b);
  }
}

TEST(CloneCount, Examples) {
  EXPECT_EQ(clone_count(1.0, 100, 1), 100u);
  EXPECT_EQ(clone_count(1.0, 100, 2), 50u);
  EXPECT_EQ(total_clones(1.0, 10, 3), 18u);
  EXPECT_EQ(clone_count(1.0, 10, 4), 3u);  // 2.5 rounds up
  EXPECT_THROW(clone_count(1.0, 10, 0), rank_error);
}

TEST(CloneCount, MatchesRationalOracle) {
  // beta = num/den with den a power of two, so beta is exact in binary.
  for (std::uint64_t num : {1, 3, 5, 10, 17})
    for (std::uint64_t den : {1, 2, 4})
      for (std::uint64_t N = 1; N <= 60; N += 7)
        for (std::uint64_t i = 1; i <= 12; ++i) {
          const double beta = static_cast<double>(num) / static_cast<double>(den);
          EXPECT_EQ(clone_count(beta, N, i), rational_clone_count(num, den, N, i))
              << beta << ' ' << N << ' ' << i;
        }
}

TEST(MutationProbability, LinearInRank) {
  EXPECT_DOUBLE_EQ(mutation_probability(1, 10, 0.01, 0.3), 0.01);
  EXPECT_DOUBLE_EQ(mutation_probability(10, 10, 0.01, 0.3), 0.3);
  EXPECT_NEAR(mutation_probability(4, 7, 0.0, 0.6), 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(mutation_probability(1, 1, 0.01, 0.3), 0.01);
  EXPECT_THROW(mutation_probability(0, 10, 0.01, 0.3), rank_error);
}

TEST(Mutate, ZeroAndOneProbability) {
  Rng rng(4);
  const auto a = random_string(77, rng);
  EXPECT_EQ(mutate(a, 3, 10, 0.0, 0.0, rng), a);
  EXPECT_EQ(mutate(a, 3, 10, 1.0, 1.0, rng), a.complement());
}

TEST(Mutate, MeanFlipsMatchesBinomial) {
  Rng rng(5);
  const BitString zero(100);
  double total = 0;
  for (int i = 0; i < 10000; ++i) {
    BitString m = zero;
    flip_bits(m, 0.05, rng);
    total += static_cast<double>(m.count());
  }
  const double mean = total / 10000.0;
  EXPECT_GE(mean, 4.5);
  EXPECT_LE(mean, 5.5);
}

TEST(GenerationStep, AntigenInPoolIsKept) {
  Rng rng(6);
  Params p = small_params(40);
  p.memory_size = 1;
  p.p_min = 0.0;
  auto pool = random_pool(p, rng);
  const auto antigen = random_string(40, rng);
  pool.remainder[7] = antigen;
  pool = generation_step(std::move(pool), antigen, 0, p, rng);
  EXPECT_EQ(hamming_affinity(pool.memory[0], antigen), 0u);
}

TEST(GenerationStep, FullReplacementResamplesRemainder) {
  Rng rng(8);
  Params p = small_params(64);
  p.memory_size = 2;
  p.replace_count = p.pop_size - p.memory_size;
  const auto before = random_pool(p, rng);
  const auto after = generation_step(before, random_string(64, rng), 1, p, rng);
  ASSERT_EQ(after.memory.size(), 2u);
  ASSERT_EQ(after.remainder.size(), before.remainder.size());
  for (std::size_t i = 0; i < before.remainder.size(); ++i)
    for (const auto& old : before.remainder) EXPECT_NE(after.remainder[i], old);
}

TEST(GenerationStep, PoolSizeConstant) {
  Rng rng(9);
  Params p = small_params(30);
  p.memory_size = 3;
  p.replace_count = 4;
  auto pool = random_pool(p, rng);
  for (int g = 0; g < 10; ++g) {
    pool = generation_step(std::move(pool), random_string(30, rng), static_cast<std::size_t>(g % 3), p, rng);
    EXPECT_EQ(pool.size(), p.pop_size);
    EXPECT_EQ(pool.memory.size(), 3u);
  }
}

TEST(GenerationStep, MemoryAffinityNeverWorsens) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Params p = small_params(72);
    auto pool = random_pool(p, rng);
    const auto antigen = random_string(72, rng);
    auto prev = hamming_affinity(pool.memory[0], antigen);
    for (int g = 0; g < 30; ++g) {
      pool = generation_step(std::move(pool), antigen, 0, p, rng);
      const auto cur = hamming_affinity(pool.memory[0], antigen);
      EXPECT_LE(cur, prev);
      prev = cur;
    }
  }
}

TEST(Train, RejectsBadInput) {
  Rng rng(1);
  Params p = small_params(8);
  EXPECT_THROW(train({}, p, rng), input_error);
  p.generations = 0;
  EXPECT_THROW(train({BitString(8)}, p, rng), config_error);
}

TEST(Train, SingleAntigenImproves) {
  Rng rng(12);
  Params p = small_params(48);
  p.generations = 60;
  const auto antigen = random_string(48, rng);
  const auto r = train({antigen}, p, rng);
  ASSERT_EQ(r.memory.size(), 1u);
  EXPECT_LT(r.final_affinity[0], r.initial_best[0]);
  EXPECT_LE(r.final_affinity[0], 48u / 4);
}

TEST(Train, IdenticalAntigens) {
  Rng rng(13);
  Params p = small_params(48);
  p.memory_size = 2;
  const auto antigen = random_string(48, rng);
  const auto r = train({antigen, antigen}, p, rng);
  ASSERT_EQ(r.memory.size(), 2u);
  EXPECT_LE(r.final_affinity[0], r.initial_best[0]);
  EXPECT_LE(r.final_affinity[1], r.initial_best[1]);
}

TEST(Train, Reproducible) {
  Params p = small_params(24);
  p.memory_size = 3;
  p.replace_count = 2;
  Rng g(77);
  const std::vector<BitString> ags = {random_string(24, g), random_string(24, g), random_string(24, g)};
  Rng a(5), b(5);
  const auto ra = train(ags, p, a);
  const auto rb = train(ags, p, b);
  EXPECT_EQ(ra.memory, rb.memory);
}
