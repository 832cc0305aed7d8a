#include <gtest/gtest.h>

#include <random>

#include "topovox/noise.hpp"

namespace topovox {
namespace {

// Independent evaluation: explicit product weights over all 2^n corners,
// gradient tables written out by hand.
struct ReferencePerlin {
  std::array<int, 256> perm{};

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  explicit ReferencePerlin(std::uint64_t seed) {
    for (int i = 0; i < 256; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = 255; i > 0; --i) {
      const auto j = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(i))) % static_cast<std::uint64_t>(i + 1);
      std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
  }

  static std::vector<double> gradient(int n, int h) {
    if (n == 2) {
      const double g[8][2] = {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      return {g[h & 7][0], g[h & 7][1]};
    }
    if (n == 3) {
      const double g[12][3] = {{1, 1, 0}, {-1, 1, 0}, {1, -1, 0}, {-1, -1, 0}, {1, 0, 1}, {-1, 0, 1},
                               {1, 0, -1}, {-1, 0, -1}, {0, 1, 1}, {0, -1, 1}, {0, 1, -1}, {0, -1, -1}};
      return {g[h % 12][0], g[h % 12][1], g[h % 12][2]};
    }
    const int idx = h & 31, zero = idx / 8, signs = idx % 8;
    std::vector<double> v(4);
    int bit = 0;
    for (int a = 0; a < 4; ++a) v[static_cast<std::size_t>(a)] = a == zero ? 0.0 : ((signs >> bit++) & 1 ? -1.0 : 1.0);
    return v;
  }

  double operator()(const std::vector<double>& p) const {
    const int n = static_cast<int>(p.size());
    double total = 0;
    for (int k = 0; k < (1 << n); ++k) {
      double w = 1;
      double dot = 0;
      int h = 0;
      std::vector<double> d(p.size());
      for (int a = 0; a < n; ++a) {
        const int bit = (k >> (n - 1 - a)) & 1;
        const double fl = std::floor(p[static_cast<std::size_t>(a)]);
        const double f = p[static_cast<std::size_t>(a)] - fl;
        const double s = f * f * f * (f * (f * 6 - 15) + 10);
        w *= bit ? s : 1 - s;
        h = perm[static_cast<std::size_t>((h + ((static_cast<int>(fl) + bit) & 255)) & 255)];
        d[static_cast<std::size_t>(a)] = f - bit;
      }
      const auto g = gradient(n, h);
      for (int a = 0; a < n; ++a) dot += g[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(a)];
      total += w * dot;
    }
    return total;
  }
};

TEST(Noise, VanishesAtLatticePoints) {
  const std::array<double, 2> p2{3, 7};
  const std::array<double, 4> p4{0, 0, 0, 0};
  const std::array<double, 3> p3{-5, 12, 40};
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    EXPECT_EQ(perlin_value(p2, seed), 0.0);
    EXPECT_EQ(perlin_value(p3, seed), 0.0);
    EXPECT_EQ(perlin_value(p4, seed), 0.0);
  }
}

TEST(Noise, RejectsUnsupportedDimension) {
  const std::array<double, 1> p1{0.5};
  EXPECT_THROW(perlin_value(p1, 0), dimension_error);
  EXPECT_THROW(noise_field({4, 4}, 0.0, 1), std::invalid_argument);
}

TEST(Noise, MatchesReferenceEvaluation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int n = 2; n <= 4; ++n) {
    const std::uint64_t seed = 1234 + static_cast<std::uint64_t>(n);
    const PerlinNoise noise(seed);
    const ReferencePerlin ref(seed);
    for (int t = 0; t < 10; ++t) {
      std::vector<double> p(static_cast<std::size_t>(n));
      for (auto& v : p) v = std::floor(u(rng)) + 0.5;  // cell midpoints
      if (t % 2) p[0] += 0.173;
      EXPECT_NEAR(noise.raw(p), ref(p), 1e-12) << "n=" << n << " t=" << t;
    }
  }
}

TEST(Noise, RangeContainment) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1000, 1000);
  for (int n = 2; n <= 4; ++n) {
    const PerlinNoise noise(static_cast<std::uint64_t>(n));
    std::array<double, 4> p{};
    double lo = 0, hi = 0;
    for (int t = 0; t < 1'000'000; ++t) {
      for (int a = 0; a < n; ++a) p[static_cast<std::size_t>(a)] = u(rng);
      const double v = noise(std::span<const double>(p.data(), static_cast<std::size_t>(n)));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_GE(lo, -1.0);
    EXPECT_LE(hi, 1.0);
    EXPECT_LT(lo, -0.5) << "n=" << n;
    EXPECT_GT(hi, 0.5) << "n=" << n;
  }
}

TEST(Noise, FieldOnIntegerLatticeIsZero) {
  const auto f = noise_field({4, 4}, 1.0, 3);
  for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(Noise, FieldIsDeterministic) {
  EXPECT_EQ(noise_field({16, 16, 8}, 4.0, 77).values, noise_field({16, 16, 8}, 4.0, 77).values);
  EXPECT_EQ(noise_field({6, 6, 6, 6}, 3.0, 77, 3).values, noise_field({6, 6, 6, 6}, 3.0, 77, 3).values);
}

TEST(Noise, FieldScanIsBoundedAndNonconstant) {
  const auto f = noise_field({64, 64}, 8.0, 21);
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  EXPECT_GE(*lo, -1.0);
  EXPECT_LE(*hi, 1.0);
  EXPECT_LT(*lo, *hi);
  const auto multi = noise_field({64, 64}, 8.0, 21, 4);
  for (double v : multi.values) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Noise, DifferentSeedsGiveDifferentFields) {
  for (int n = 2; n <= 4; ++n) {
    const std::vector<int> dims(static_cast<std::size_t>(n), n == 4 ? 10 : 24);
    const auto a = noise_field(dims, 3.3, 1);
    const auto b = noise_field(dims, 3.3, 2);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) differ += a.values[i] != b.values[i];
    // Voxels whose coordinates are all multiples of the scale are zero in both.
    EXPECT_GE(static_cast<double>(differ), 0.99 * static_cast<double>(a.values.size())) << "n=" << n;
  }
}

}  // namespace
}  // namespace topovox
