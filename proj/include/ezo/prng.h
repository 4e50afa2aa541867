// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Replayable pseudorandom streams.
//
// The raw stream is SplitMix64: a 64-bit Weyl counter
// (state += 0x9E3779B97F4A7C15) followed by a xor-shift/multiply finalizer.
// Every sampler below consumes a fixed number of raw words per element, so a
// generator re-created from the same seed replays the exact same values when
// the samplers are called in the same order. Word costs:
//
//   gaussian_vector(n)      2 * ceil(n / 2)   (Box-Muller, both outputs used)
//   uniform_int8_vector(n)  n
//   bernoulli_mask(n)       n
//   uniform_real(n)         n

#ifndef EZO_PRNG_H_
#define EZO_PRNG_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ezo {

class SeededGenerator {
 public:
  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SeededGenerator(uint32_t seed) : seed_(seed), state_(seed) {}

  uint32_t seed() const { return seed_; }
  uint64_t state() const { return state_; }

  uint64_t next_u64() {
    state_ += kGamma;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Advances the stream by `words` raw draws in O(1).
  void discard(uint64_t words) { state_ += words * kGamma; }

  // Number of raw words drawn since construction (mod 2^64).
  uint64_t words_consumed() const { return (state_ - seed_) * kGammaInverse; }

 private:
  // Multiplicative inverse of kGamma modulo 2^64.
  static constexpr uint64_t kGammaInverse = 0xF1DE83E19937733DULL;

  uint32_t seed_;
  uint64_t state_;
};

// Probability that a mask entry is zero, held as a fixed-point numerator over
// 2^32 so that mask sampling is integer-only. Covers [0, 1] inclusive.
class ZeroProbability {
 public:
  static constexpr uint64_t kOne = uint64_t{1} << 32;

  ZeroProbability() = default;
  static ZeroProbability from_numerator(uint64_t numerator);
  // Rounds to the nearest representable value; rejects p outside [0, 1].
  static ZeroProbability from_double(double p_zero);

  uint64_t numerator() const { return numerator_; }
  double as_double() const;

  friend bool operator==(ZeroProbability, ZeroProbability) = default;

 private:
  explicit ZeroProbability(uint64_t n) : numerator_(n) {}
  uint64_t numerator_ = 0;
};

// Maps one raw word to a standard-normal pair (Box-Muller).
void gaussian_pair(uint64_t w0, uint64_t w1, float& z0, float& z1);

inline int8_t uniform_int8_from_word(uint64_t word, int r_max) {
  const uint64_t buckets = 2 * static_cast<uint64_t>(r_max) + 1;
  return static_cast<int8_t>(static_cast<int>(word % buckets) - r_max);
}

inline uint8_t mask_bit_from_word(uint64_t word, ZeroProbability p_zero) {
  return (word >> 32) < p_zero.numerator() ? 0 : 1;
}

void fill_gaussian(SeededGenerator& gen, std::span<float> out);
std::vector<float> gaussian_vector(SeededGenerator& gen, size_t n);

// r_max must lie in [0, 127].
void fill_uniform_int8(SeededGenerator& gen, std::span<int8_t> out, int r_max);
std::vector<int8_t> uniform_int8_vector(SeededGenerator& gen, size_t n,
                                        int r_max);

void fill_bernoulli_mask(SeededGenerator& gen, std::span<uint8_t> out,
                         ZeroProbability p_zero);
std::vector<uint8_t> bernoulli_mask(SeededGenerator& gen, size_t n,
                                    double p_zero);

// Uniform reals on [lo, hi), one word each (24-bit resolution).
void fill_uniform_real(SeededGenerator& gen, std::span<float> out, float lo,
                       float hi);

// Cross-implementation vectors: the first 16 outputs of each sampler (raw
// u64, gaussian, uniform_int8 with r_max 15, mask with p_zero 0.33, uniform
// real on [0, 1)) for seeds 0, 1 and 0xDEADBEEF, each from a fresh generator.
// tests/data/prng_vectors.txt holds a copy; `ezo prngvectors` regenerates it.
std::string prng_test_vectors();

// Calls fn(i, z_i) for the same values gaussian_vector(gen, n) would return,
// without materializing them.
template <typename Fn>
void for_each_gaussian(SeededGenerator& gen, size_t n, Fn&& fn) {
  size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const uint64_t w0 = gen.next_u64();
    const uint64_t w1 = gen.next_u64();
    float z0, z1;
    gaussian_pair(w0, w1, z0, z1);
    fn(i, z0);
    fn(i + 1, z1);
  }
  if (i < n) {
    const uint64_t w0 = gen.next_u64();
    const uint64_t w1 = gen.next_u64();
    float z0, z1;
    gaussian_pair(w0, w1, z0, z1);
    fn(i, z0);
  }
}

// Calls fn(i, z_i) with z = mask ⊙ u for one layer of n entries, where the
// mask is drawn first (n words) and u second (n words); leaves `gen` 2n words
// further on, exactly as bernoulli_mask followed by uniform_int8_vector would.
template <typename Fn>
void for_each_sparse_int8(SeededGenerator& gen, size_t n, int r_max,
                          ZeroProbability p_zero, Fn&& fn) {
  SeededGenerator mask_stream = gen;
  SeededGenerator value_stream = gen;
  value_stream.discard(n);
  for (size_t i = 0; i < n; ++i) {
    const uint8_t keep = mask_bit_from_word(mask_stream.next_u64(), p_zero);
    const int8_t u = uniform_int8_from_word(value_stream.next_u64(), r_max);
    fn(i, static_cast<int8_t>(keep ? u : 0));
  }
  gen.discard(2 * static_cast<uint64_t>(n));
}

}  // namespace ezo

#endif  // EZO_PRNG_H_
