// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/prng.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace ezo {

ZeroProbability ZeroProbability::from_numerator(uint64_t numerator) {
  if (numerator > kOne) {
    throw std::invalid_argument("p_zero numerator exceeds 2^32");
  }
  return ZeroProbability(numerator);
}

ZeroProbability ZeroProbability::from_double(double p_zero) {
  if (!(p_zero >= 0.0 && p_zero <= 1.0)) {
    throw std::invalid_argument("p_zero must lie in [0, 1]");
  }
  return ZeroProbability(
      static_cast<uint64_t>(std::llround(p_zero * static_cast<double>(kOne))));
}

double ZeroProbability::as_double() const {
  return static_cast<double>(numerator_) / static_cast<double>(kOne);
}

void gaussian_pair(uint64_t w0, uint64_t w1, float& z0, float& z1) {
  // u1 in (0, 1] keeps the logarithm finite; u2 in [0, 1).
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = static_cast<double>((w0 >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(w1 >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  z0 = static_cast<float>(radius * std::cos(angle));
  z1 = static_cast<float>(radius * std::sin(angle));
}

void fill_gaussian(SeededGenerator& gen, std::span<float> out) {
  for_each_gaussian(gen, out.size(), [&](size_t i, float z) { out[i] = z; });
}

std::vector<float> gaussian_vector(SeededGenerator& gen, size_t n) {
  std::vector<float> out(n);
  fill_gaussian(gen, out);
  return out;
}

void fill_uniform_int8(SeededGenerator& gen, std::span<int8_t> out,
                       int r_max) {
  if (r_max < 0 || r_max > 127) {
    throw std::invalid_argument("r_max must lie in [0, 127]");
  }
  for (auto& v : out) v = uniform_int8_from_word(gen.next_u64(), r_max);
}

std::vector<int8_t> uniform_int8_vector(SeededGenerator& gen, size_t n,
                                        int r_max) {
  std::vector<int8_t> out(n);
  fill_uniform_int8(gen, out, r_max);
  return out;
}

void fill_bernoulli_mask(SeededGenerator& gen, std::span<uint8_t> out,
                         ZeroProbability p_zero) {
  for (auto& m : out) m = mask_bit_from_word(gen.next_u64(), p_zero);
}

std::vector<uint8_t> bernoulli_mask(SeededGenerator& gen, size_t n,
                                    double p_zero) {
  std::vector<uint8_t> out(n);
  fill_bernoulli_mask(gen, out, ZeroProbability::from_double(p_zero));
  return out;
}

void fill_uniform_real(SeededGenerator& gen, std::span<float> out, float lo,
                       float hi) {
  constexpr float kScale = 1.0f / 16777216.0f;  // 2^-24
  const float width = hi - lo;
  for (auto& v : out) {
    v = lo + width * (static_cast<float>(gen.next_u64() >> 40) * kScale);
  }
}

std::string prng_test_vectors() {
  constexpr size_t kCount = 16;
  std::string out = "# ezo prng vectors v1\n";
  char buf[64];
  auto line = [&](const char* name, uint32_t seed, auto&& each) {
    std::snprintf(buf, sizeof buf, "%s %u", name, seed);
    out += buf;
    each();
    out += '\n';
  };
  for (uint32_t seed : {0u, 1u, 0xDEADBEEFu}) {
    line("u64", seed, [&] {
      SeededGenerator g(seed);
      for (size_t i = 0; i < kCount; ++i) {
        std::snprintf(buf, sizeof buf, " %016llx",
                      static_cast<unsigned long long>(g.next_u64()));
        out += buf;
      }
    });
    line("gaussian", seed, [&] {
      SeededGenerator g(seed);
      for (float v : gaussian_vector(g, kCount)) {
        std::snprintf(buf, sizeof buf, " %.9g", v);
        out += buf;
      }
    });
    line("uniform_int8_r15", seed, [&] {
      SeededGenerator g(seed);
      for (int8_t v : uniform_int8_vector(g, kCount, 15)) {
        out += ' ' + std::to_string(v);
      }
    });
    line("mask_p0.33", seed, [&] {
      SeededGenerator g(seed);
      for (uint8_t v : bernoulli_mask(g, kCount, 0.33)) {
        out += ' ' + std::to_string(v);
      }
    });
    line("uniform_real", seed, [&] {
      SeededGenerator g(seed);
      std::vector<float> v(kCount);
      fill_uniform_real(g, v, 0.0f, 1.0f);
      for (float x : v) {
        std::snprintf(buf, sizeof buf, " %.9g", x);
        out += buf;
      }
    });
  }
  return out;
}

}  // namespace ezo
