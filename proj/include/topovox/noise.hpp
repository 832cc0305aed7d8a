// Seeded Improved Perlin gradient noise in 2, 3 and 4 dimensions.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "topovox/grid.hpp"

namespace topovox {

/// splitmix64 finaliser; used as a counter-based hash throughout.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Child seed `index` of `seed`.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + 0x5851F42D4C957F2Dull));
}

namespace detail {

inline constexpr std::array<std::array<double, 2>, 8> kGrad2{{
    {1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1},
}};

inline constexpr std::array<std::array<double, 3>, 12> kGrad3{{
    {1, 1, 0}, {-1, 1, 0}, {1, -1, 0}, {-1, -1, 0},
    {1, 0, 1}, {-1, 0, 1}, {1, 0, -1}, {-1, 0, -1},
    {0, 1, 1}, {0, -1, 1}, {0, 1, -1}, {0, -1, -1},
}};

// Edge midpoints of the 4-cube: one zero component, three of +-1.
inline constexpr std::array<std::array<double, 4>, 32> make_grad4() {
  std::array<std::array<double, 4>, 32> g{};
  int k = 0;
  for (int zero = 0; zero < 4; ++zero)
    for (int signs = 0; signs < 8; ++signs) {
      int bit = 0;
      for (int a = 0; a < 4; ++a) {
        if (a == zero) {
          g[k][a] = 0;
          continue;
        }
        g[k][a] = (signs >> bit++) & 1 ? -1.0 : 1.0;
      }
      ++k;
    }
  return g;
}
inline constexpr auto kGrad4 = make_grad4();

// Sampled raw extremes are about 1.0 in 2D and 3D and 1.17 in 4D; results
// are clamped regardless.
inline constexpr std::array<double, 5> kNoiseNormalisation{0, 0, 1.0, 1.0, 1.0 / 1.2};

inline double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

}  // namespace detail

class PerlinNoise {
 public:
  explicit PerlinNoise(std::uint64_t seed) : seed_(seed) {
    std::iota(perm_.begin(), perm_.end(), 0);
    for (int i = 255; i > 0; --i) {
      const auto j = static_cast<int>(mix64(seed ^ mix64(static_cast<std::uint64_t>(i))) % static_cast<std::uint64_t>(i + 1));
      std::swap(perm_[static_cast<std::size_t>(i)], perm_[static_cast<std::size_t>(j)]);
    }
  }

  std::uint64_t seed() const { return seed_; }

  /// Noise at `p` (2..4 components), in [-1, 1] and zero at lattice points.
  double operator()(std::span<const double> p) const {
    const double v = raw(p) * detail::kNoiseNormalisation[p.size()];
    return std::clamp(v, -1.0, 1.0);
  }

  /// Unnormalised, unclamped value.
  double raw(std::span<const double> p) const {
    const int n = static_cast<int>(p.size());
    if (n < 2 || n > kMaxDim) throw dimension_error("perlin noise: unsupported dimension " + std::to_string(n));
    std::array<int, kMaxDim> cell{};
    std::array<double, kMaxDim> frac{};
    std::array<double, kMaxDim> weight{};
    for (int a = 0; a < n; ++a) {
      const double fl = std::floor(p[static_cast<std::size_t>(a)]);
      cell[a] = static_cast<int>(fl);
      frac[a] = p[static_cast<std::size_t>(a)] - fl;
      weight[a] = detail::fade(frac[a]);
    }
    // Corner k has axis a's offset in bit (n-1-a), so the last axis varies
    // fastest and is blended first.
    std::array<double, 16> corner{};
    const int corners = 1 << n;
    for (int k = 0; k < corners; ++k) {
      int h = 0;
      std::array<double, kMaxDim> d{};
      for (int a = 0; a < n; ++a) {
        const int bit = (k >> (n - 1 - a)) & 1;
        h = perm_[static_cast<std::size_t>((h + ((cell[a] + bit) & 255)) & 255)];
        d[a] = frac[a] - bit;
      }
      corner[static_cast<std::size_t>(k)] = gradient_dot(n, h, d);
    }
    for (int a = n - 1; a >= 0; --a) {
      const int half = 1 << a;
      for (int m = 0; m < half; ++m) {
        const double lo = corner[static_cast<std::size_t>(2 * m)];
        const double hi = corner[static_cast<std::size_t>(2 * m + 1)];
        corner[static_cast<std::size_t>(m)] = lo + weight[a] * (hi - lo);
      }
    }
    return corner[0];
  }

 private:
  static double gradient_dot(int n, int h, const std::array<double, kMaxDim>& d) {
    switch (n) {
      case 2: {
        const auto& g = detail::kGrad2[static_cast<std::size_t>(h & 7)];
        return g[0] * d[0] + g[1] * d[1];
      }
      case 3: {
        const auto& g = detail::kGrad3[static_cast<std::size_t>(h % 12)];
        return g[0] * d[0] + g[1] * d[1] + g[2] * d[2];
      }
      default: {
        const auto& g = detail::kGrad4[static_cast<std::size_t>(h & 31)];
        return g[0] * d[0] + g[1] * d[1] + g[2] * d[2] + g[3] * d[3];
      }
    }
  }

  std::uint64_t seed_;
  std::array<int, 256> perm_{};
};

inline double perlin_value(std::span<const double> p, std::uint64_t seed) { return PerlinNoise(seed)(p); }

struct NoiseField {
  std::vector<int> dims;
  double scale = 1;
  std::uint64_t seed = 0;
  std::vector<double> values;  // storage order of a grid with `dims`

  double at(std::size_t flat) const { return values[flat]; }
};

/// values[c] = noise(c / scale). Extra octaves halve the amplitude and double
/// the frequency; the sum is renormalised to stay within [-1, 1].
inline NoiseField noise_field(const std::vector<int>& dims, double scale, std::uint64_t seed, int octaves = 1) {
  if (!(scale > 0)) throw std::invalid_argument("noise_field: scale must be positive");
  if (octaves < 1) throw std::invalid_argument("noise_field: octaves must be >= 1");
  if (dims.size() < 2 || dims.size() > kMaxDim) throw dimension_error("noise_field: unsupported dimension");
  NoiseField f{dims, scale, seed, {}};
  std::vector<PerlinNoise> layers;
  for (int o = 0; o < octaves; ++o) layers.emplace_back(o == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(o)));
  double norm = 0;
  for (int o = 0; o < octaves; ++o) norm += std::ldexp(1.0, -o);

  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  f.values.resize(total);
  std::array<double, kMaxDim> p{};
  for_each_voxel(dims, [&](const Coord& c, std::size_t flat) {
    double sum = 0;
    for (int o = 0; o < octaves; ++o) {
      const double freq = std::ldexp(1.0, o) / scale;
      for (std::size_t a = 0; a < dims.size(); ++a) p[a] = c[a] * freq;
      sum += std::ldexp(1.0, -o) * layers[static_cast<std::size_t>(o)](std::span<const double>(p.data(), dims.size()));
    }
    f.values[flat] = std::clamp(sum / norm, -1.0, 1.0);
  });
  return f;
}

}  // namespace topovox
