// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/prng.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <gtest/gtest.h>

namespace ezo {
namespace {

TEST(SeededGenerator, MatchesReferenceSplitMix64) {
  SeededGenerator gen(1234567);
  const uint64_t expected[] = {6457827717110365317ULL, 3203168211198807973ULL,
                               9817491932198370423ULL, 4593380528125082431ULL,
                               16408922859458223821ULL};
  for (uint64_t e : expected) EXPECT_EQ(gen.next_u64(), e);
}

TEST(SeededGenerator, DiscardEqualsDrawing) {
  SeededGenerator a(42), b(42);
  for (int i = 0; i < 1000; ++i) a.next_u64();
  b.discard(1000);
  EXPECT_EQ(a.state(), b.state());
  EXPECT_EQ(a.words_consumed(), 1000u);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(SeededGenerator, SameSeedReplaysGaussian) {
  SeededGenerator a(7), b(7);
  const auto x = gaussian_vector(a, 1001);
  const auto y = gaussian_vector(b, 1001);
  EXPECT_EQ(x, y);
  EXPECT_EQ(a.words_consumed(), 1002u);  // odd n rounds up to a pair
}

TEST(SeededGenerator, ForEachGaussianMatchesVector) {
  SeededGenerator a(99), b(99);
  const auto x = gaussian_vector(a, 37);
  std::vector<float> y(37);
  for_each_gaussian(b, 37, [&](size_t i, float z) { y[i] = z; });
  EXPECT_EQ(x, y);
  EXPECT_EQ(a.state(), b.state());
}

TEST(SeededGenerator, GaussianMoments) {
  SeededGenerator gen(5);
  const auto x = gaussian_vector(gen, 200000);
  double mean = 0, sq = 0;
  for (float v : x) {
    mean += v;
    sq += double(v) * v;
  }
  mean /= x.size();
  sq /= x.size();
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq, 1.0, 0.02);
}

TEST(SeededGenerator, UniformInt8RangeAndCoverage) {
  SeededGenerator gen(11);
  const auto u = uniform_int8_vector(gen, 20000, 3);
  std::array<int, 7> hist{};
  for (int8_t v : u) {
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    ++hist[v + 3];
  }
  for (int h : hist) EXPECT_GT(h, 2500);
  EXPECT_THROW(uniform_int8_vector(gen, 1, 128), std::invalid_argument);
  EXPECT_THROW(uniform_int8_vector(gen, 1, -1), std::invalid_argument);
}

TEST(SeededGenerator, MaskExtremesAndRate) {
  SeededGenerator gen(3);
  for (uint8_t m : bernoulli_mask(gen, 1000, 0.0)) EXPECT_EQ(m, 1);
  for (uint8_t m : bernoulli_mask(gen, 1000, 1.0)) EXPECT_EQ(m, 0);
  const auto m = bernoulli_mask(gen, 100000, 0.3);
  size_t zeros = 0;
  for (uint8_t v : m) zeros += v == 0;
  EXPECT_NEAR(zeros / 100000.0, 0.3, 0.01);
  EXPECT_THROW(bernoulli_mask(gen, 1, 1.5), std::invalid_argument);
}

TEST(SeededGenerator, SparseInt8StreamMatchesMaskThenUniform) {
  const auto p = ZeroProbability::from_double(0.5);
  SeededGenerator a(2024), b(2024);
  std::vector<uint8_t> mask(513);
  fill_bernoulli_mask(a, mask, p);
  const auto u = uniform_int8_vector(a, 513, 5);
  std::vector<int8_t> z(513);
  for_each_sparse_int8(b, 513, 5, p,
                       [&](size_t i, int8_t v) { z[i] = v; });
  for (size_t i = 0; i < 513; ++i) EXPECT_EQ(z[i], mask[i] ? u[i] : 0);
  EXPECT_EQ(a.state(), b.state());
}

TEST(SeededGenerator, UniformRealRange) {
  SeededGenerator gen(8);
  std::vector<float> v(10000);
  fill_uniform_real(gen, v, -0.5f, 0.25f);
  for (float x : v) {
    EXPECT_GE(x, -0.5f);
    EXPECT_LT(x, 0.25f);
  }
}

TEST(SeededGenerator, MatchesCheckedInVectors) {
  std::ifstream f(EZO_TEST_DATA_DIR "/prng_vectors.txt");
  ASSERT_TRUE(f) << "missing tests/data/prng_vectors.txt";
  std::ostringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), prng_test_vectors());
}

}  // namespace
}  // namespace ezo
