// Seed objects: implicit shapes, thickened curves, bridged composites and
// spaced placement of several objects in one sample.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topovox/grid.hpp"
#include "topovox/homology.hpp"
#include "topovox/labels.hpp"
#include "topovox/morphology.hpp"
#include "topovox/noise.hpp"

namespace topovox {

class placement_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class placement_exhausted : public placement_error {
 public:
  using placement_error::placement_error;
};

class invalid_curve_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class invalid_shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- implicit shapes -------------------------------------------------------

enum class ShapeKind {
  ball,
  sphere_shell,
  solid_torus,
  torus_shell,
  S1xB3,
  S2xB2,
  T2xB2,
  tube_IxS2,
  tube_I2xS1,
  tube_IxT2,
};

inline constexpr std::array<ShapeKind, 10> kAllShapeKinds{
    ShapeKind::ball,  ShapeKind::sphere_shell, ShapeKind::solid_torus, ShapeKind::torus_shell, ShapeKind::S1xB3,
    ShapeKind::S2xB2, ShapeKind::T2xB2,        ShapeKind::tube_IxS2,   ShapeKind::tube_I2xS1,  ShapeKind::tube_IxT2,
};

inline std::string_view shape_kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::ball: return "ball";
    case ShapeKind::sphere_shell: return "sphere_shell";
    case ShapeKind::solid_torus: return "solid_torus";
    case ShapeKind::torus_shell: return "torus_shell";
    case ShapeKind::S1xB3: return "S1xB3";
    case ShapeKind::S2xB2: return "S2xB2";
    case ShapeKind::T2xB2: return "T2xB2";
    case ShapeKind::tube_IxS2: return "tube_IxS2";
    case ShapeKind::tube_I2xS1: return "tube_I2xS1";
    case ShapeKind::tube_IxT2: return "tube_IxT2";
  }
  return "unknown";
}

inline ShapeKind shape_kind_from_name(std::string_view s) {
  for (ShapeKind k : kAllShapeKinds)
    if (shape_kind_name(k) == s) return k;
  throw invalid_shape_error("unknown shape kind '" + std::string(s) + "'");
}

/// Dimensions a kind can be rasterized in.
inline std::pair<int, int> shape_dim_range(ShapeKind k) {
  switch (k) {
    case ShapeKind::ball:
    case ShapeKind::sphere_shell:
    case ShapeKind::solid_torus: return {2, 4};
    case ShapeKind::torus_shell:
    case ShapeKind::tube_IxS2:
    case ShapeKind::tube_I2xS1:
    case ShapeKind::tube_IxT2: return {3, 4};
    case ShapeKind::S1xB3:
    case ShapeKind::S2xB2:
    case ShapeKind::T2xB2: return {4, 4};
  }
  return {0, -1};
}

/// Shape in local coordinates x = p - center, read through `orientation`:
/// local axis k is grid axis orientation[k].
///
///   ball          |x| <= r
///   sphere_shell  | |x| - R1 | <= r
///   solid_torus   (rho01 - R1)^2 + x2^2 + x3^2 <= r^2            (S1xB3 in 4D)
///   torus_shell   | sqrt((rho01 - R1)^2 + x2^2 + x3^2) - R2 | <= r
///   S1xB3         as solid_torus, 4D only
///   S2xB2         (rho012 - R1)^2 + x3^2 <= r^2
///   T2xB2         (sqrt((rho01 - R1)^2 + x2^2) - R2)^2 + x3^2 <= r^2
///   tube_IxS2     |rho012 - R1| <= r, |x_k| <= L beyond axis 2
///   tube_I2xS1    |rho01 - R1| <= r, |x_k| <= L beyond axis 1
///   tube_IxT2     |sqrt((rho01 - R1)^2 + x2^2) - R2| <= r, |x3| <= L
///
/// where rho01 = sqrt(x0^2 + x1^2) and rho012 = sqrt(x0^2 + x1^2 + x2^2).
struct ImplicitShape {
  ShapeKind kind = ShapeKind::ball;
  std::vector<double> center;
  double R1 = 0;  // major radius
  double R2 = 0;  // secondary radius
  double r = 0;   // minor radius / thickness
  double L = 0;   // tube half-length
  std::vector<int> orientation;  // empty means identity

  int ndim() const { return static_cast<int>(center.size()); }

  int grid_axis(int local) const {
    return orientation.empty() ? local : orientation[static_cast<std::size_t>(local)];
  }
};

namespace detail {

inline bool uses_R2(ShapeKind k) {
  return k == ShapeKind::torus_shell || k == ShapeKind::T2xB2 || k == ShapeKind::tube_IxT2;
}
inline bool uses_L(ShapeKind k) {
  return k == ShapeKind::tube_IxS2 || k == ShapeKind::tube_I2xS1 || k == ShapeKind::tube_IxT2;
}

}  // namespace detail

inline void validate_shape(const ImplicitShape& s) {
  const int n = s.ndim();
  const auto [lo, hi] = shape_dim_range(s.kind);
  if (n < lo || n > hi)
    throw dimension_error(std::string(shape_kind_name(s.kind)) + " cannot be placed in " + std::to_string(n) + "D");
  if (!s.orientation.empty()) {
    std::vector<int> p = s.orientation;
    std::sort(p.begin(), p.end());
    std::vector<int> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), 0);
    if (p != identity) throw invalid_shape_error("orientation must be a permutation of the grid axes");
  }
  const std::string name(shape_kind_name(s.kind));
  if (s.kind == ShapeKind::ball) {
    if (s.r < 0) throw invalid_shape_error("ball: negative radius");
    return;
  }
  if (!(s.r > 0)) throw invalid_shape_error(name + ": r must be positive");
  if (detail::uses_R2(s.kind)) {
    if (!(s.r < s.R2 && s.R2 < s.R1)) throw invalid_shape_error(name + ": need r < R2 < R1");
  } else if (!(s.r < s.R1)) {
    throw invalid_shape_error(name + ": need r < R1");
  }
  if (detail::uses_L(s.kind) && !(s.L > 0)) throw invalid_shape_error(name + ": L must be positive");
}

/// Half-extent of the shape along each local axis.
inline std::vector<double> shape_half_extent(const ImplicitShape& s) {
  const int n = s.ndim();
  std::vector<double> e(static_cast<std::size_t>(n), 0);
  auto fill = [&](int from, double v) {
    for (int a = from; a < n; ++a) e[static_cast<std::size_t>(a)] = v;
  };
  switch (s.kind) {
    case ShapeKind::ball: fill(0, s.r); break;
    case ShapeKind::sphere_shell: fill(0, s.R1 + s.r); break;
    case ShapeKind::solid_torus:
    case ShapeKind::S1xB3:
      fill(0, s.r);
      e[0] = e[1] = s.R1 + s.r;
      break;
    case ShapeKind::torus_shell:
      fill(0, s.R2 + s.r);
      e[0] = e[1] = s.R1 + s.R2 + s.r;
      break;
    case ShapeKind::S2xB2:
      fill(0, s.R1 + s.r);
      e[3] = s.r;
      break;
    case ShapeKind::T2xB2:
      e = {s.R1 + s.R2 + s.r, s.R1 + s.R2 + s.r, s.R2 + s.r, s.r};
      break;
    case ShapeKind::tube_IxS2:
      fill(0, s.L);
      e[0] = e[1] = e[2] = s.R1 + s.r;
      break;
    case ShapeKind::tube_I2xS1:
      fill(0, s.L);
      e[0] = e[1] = s.R1 + s.r;
      break;
    case ShapeKind::tube_IxT2:
      fill(0, s.L);
      e[0] = e[1] = s.R1 + s.R2 + s.r;
      e[2] = s.R2 + s.r;
      break;
  }
  return e;
}

/// Membership test for a point given in local coordinates.
inline bool shape_contains_local(const ImplicitShape& s, const std::array<double, kMaxDim>& x) {
  constexpr double eps = 1e-9;
  const int n = s.ndim();
  auto sq = [](double v) { return v * v; };
  auto tail = [&](int from) {
    double t = 0;
    for (int a = from; a < n; ++a) t += sq(x[static_cast<std::size_t>(a)]);
    return t;
  };
  auto slab = [&](int from) {
    for (int a = from; a < n; ++a)
      if (std::abs(x[static_cast<std::size_t>(a)]) > s.L + eps) return false;
    return true;
  };
  const double rho01 = std::sqrt(sq(x[0]) + sq(x[1]));
  switch (s.kind) {
    case ShapeKind::ball: return tail(0) <= sq(s.r) + eps;
    case ShapeKind::sphere_shell: return std::abs(std::sqrt(tail(0)) - s.R1) <= s.r + eps;
    case ShapeKind::solid_torus:
    case ShapeKind::S1xB3: return sq(rho01 - s.R1) + tail(2) <= sq(s.r) + eps;
    case ShapeKind::torus_shell: return std::abs(std::sqrt(sq(rho01 - s.R1) + tail(2)) - s.R2) <= s.r + eps;
    case ShapeKind::S2xB2: {
      const double rho012 = std::sqrt(sq(rho01) + sq(x[2]));
      return sq(rho012 - s.R1) + sq(x[3]) <= sq(s.r) + eps;
    }
    case ShapeKind::T2xB2: {
      const double d = std::sqrt(sq(rho01 - s.R1) + sq(x[2]));
      return sq(d - s.R2) + sq(x[3]) <= sq(s.r) + eps;
    }
    case ShapeKind::tube_IxS2: {
      const double rho012 = std::sqrt(sq(rho01) + sq(x[2]));
      return std::abs(rho012 - s.R1) <= s.r + eps && slab(3);
    }
    case ShapeKind::tube_I2xS1: return std::abs(rho01 - s.R1) <= s.r + eps && slab(2);
    case ShapeKind::tube_IxT2: {
      const double d = std::sqrt(sq(rho01 - s.R1) + sq(x[2]));
      return std::abs(d - s.R2) <= s.r + eps && slab(3);
    }
  }
  return false;
}

/// Grid-space bounding box [lo, hi] (inclusive voxel indices, unclipped).
inline std::pair<Coord, Coord> shape_bounds(const ImplicitShape& s) {
  const auto e = shape_half_extent(s);
  const int n = s.ndim();
  Coord lo = Coord::zeros(n), hi = Coord::zeros(n);
  for (int k = 0; k < n; ++k) {
    const int a = s.grid_axis(k);
    const double c = s.center[static_cast<std::size_t>(a)];
    lo[a] = static_cast<int>(std::ceil(c - e[static_cast<std::size_t>(k)] - 1e-9));
    hi[a] = static_cast<int>(std::floor(c + e[static_cast<std::size_t>(k)] + 1e-9));
  }
  return {lo, hi};
}

namespace detail {

inline void check_box_inside(const BinaryGrid& g, const Coord& lo, const Coord& hi, int padding,
                             const std::string& what) {
  for (int a = 0; a < g.ndim(); ++a)
    if (lo[a] < padding || hi[a] > g.dim(a) - 1 - padding)
      throw placement_error(what + ": bounding box " + lo.to_string() + "-" + hi.to_string() +
                            " leaves the grid interior (padding " + std::to_string(padding) + ")");
}

template <class Fn>
void for_each_in_box(const Coord& lo, const Coord& hi, Fn&& fn) {
  const int n = static_cast<int>(lo.size());
  std::vector<int> extent(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    extent[static_cast<std::size_t>(a)] = hi[a] - lo[a] + 1;
    if (extent[static_cast<std::size_t>(a)] <= 0) return;
  }
  for_each_voxel(extent, [&](const Coord& c, std::size_t) { fn(c + lo); });
}

}  // namespace detail

/// Sets every voxel inside the shape to `value`. The shape's bounding box
/// must keep `padding` voxels clear of the grid border.
inline BinaryGrid& rasterize_implicit(BinaryGrid& g, const ImplicitShape& s, bool value = true, int padding = 1) {
  if (s.ndim() != g.ndim()) throw dimension_error("rasterize_implicit: shape and grid dimensions differ");
  validate_shape(s);
  const auto [lo, hi] = shape_bounds(s);
  detail::check_box_inside(g, lo, hi, padding, std::string(shape_kind_name(s.kind)));
  detail::for_each_in_box(lo, hi, [&](const Coord& c) {
    std::array<double, kMaxDim> x{};
    for (int k = 0; k < s.ndim(); ++k) {
      const int a = s.grid_axis(k);
      x[static_cast<std::size_t>(k)] = c[a] - s.center[static_cast<std::size_t>(a)];
    }
    if (shape_contains_local(s, x)) g.set(c, value);
  });
  return g;
}

/// Homology of the shape as a solid in n-space.
inline BettiVector shape_label(ShapeKind kind, int ndim) {
  switch (kind) {
    case ShapeKind::ball: return make_betti(1);
    case ShapeKind::sphere_shell:
      if (ndim == 2) return make_betti(1, 1);
      if (ndim == 3) return make_betti(1, 0, 1);
      return make_betti(1, 0, 0, 1);
    case ShapeKind::solid_torus:
    case ShapeKind::S1xB3:
    case ShapeKind::tube_I2xS1: return make_betti(1, 1);
    case ShapeKind::torus_shell:  // S1 x S^{n-2}
      if (ndim == 3) return make_betti(1, 2, 1);
      return make_betti(1, 1, 1, 1);
    case ShapeKind::S2xB2:
    case ShapeKind::tube_IxS2: return make_betti(1, 0, 1);
    case ShapeKind::T2xB2:
    case ShapeKind::tube_IxT2: return make_betti(1, 2, 1);
  }
  throw invalid_shape_error("shape_label: unknown kind");
}

/// Handle counts of the 4D kinds that appear as boundary-sum summands.
inline std::optional<HandleCounts> shape_handle_counts(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::S1xB3: return HandleCounts{1, 0, 0, 0};
    case ShapeKind::S2xB2: return HandleCounts{0, 1, 0, 0};
    case ShapeKind::T2xB2: return HandleCounts{0, 0, 1, 1};
    default: return std::nullopt;
  }
}

// ---- curves ----------------------------------------------------------------

enum class CurveKind { segment_chain, circle, trefoil, hopf_component, custom };

inline std::string_view curve_kind_name(CurveKind k) {
  switch (k) {
    case CurveKind::segment_chain: return "segment_chain";
    case CurveKind::circle: return "circle";
    case CurveKind::trefoil: return "trefoil";
    case CurveKind::hopf_component: return "hopf_component";
    case CurveKind::custom: return "custom";
  }
  return "unknown";
}

inline constexpr double kMaxSampleSpacing = 0.5;

using Point = std::vector<double>;

struct ParametricCurve {
  CurveKind kind = CurveKind::custom;
  std::vector<Point> samples;
  bool closed = false;

  int ndim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().size()); }
  std::size_t segment_count() const {
    if (samples.size() < 2) return 0;
    return closed ? samples.size() : samples.size() - 1;
  }
  std::pair<const Point&, const Point&> segment(std::size_t i) const {
    return {samples[i], samples[(i + 1) % samples.size()]};
  }
};

namespace detail {

inline double point_dist(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace detail

inline void validate_curve(const ParametricCurve& c) {
  if (c.samples.empty()) throw invalid_curve_error("curve has no samples");
  const std::size_t n = c.samples.front().size();
  if (n < 2 || n > kMaxDim) throw dimension_error("curve: samples must have 2 to 4 coordinates");
  for (const auto& p : c.samples)
    if (p.size() != n) throw invalid_curve_error("curve: samples differ in dimension");
  if (c.closed && c.samples.size() < 3) throw invalid_curve_error("closed curve needs at least 3 samples");
  for (std::size_t i = 0; i < c.segment_count(); ++i) {
    const auto [a, b] = c.segment(i);
    const double d = detail::point_dist(a, b);
    if (d > kMaxSampleSpacing + 1e-12)
      throw invalid_curve_error("curve: samples " + std::to_string(i) + " and " +
                                std::to_string((i + 1) % c.samples.size()) + " are " + std::to_string(d) +
                                " voxels apart");
  }
}

/// Samples f(t) for t in [t0, t1) (closed) or [t0, t1] (open), refining until
/// consecutive samples are within `spacing`.
template <class F>
std::vector<Point> sample_parametric(F&& f, double t0, double t1, bool closed, double spacing = 0.4) {
  std::size_t count = 16;
  for (;;) {
    std::vector<Point> pts;
    const std::size_t m = closed ? count : count + 1;
    for (std::size_t i = 0; i < m; ++i) pts.push_back(f(t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(count)));
    double worst = 0;
    const std::size_t segs = closed ? pts.size() : pts.size() - 1;
    for (std::size_t i = 0; i < segs; ++i) worst = std::max(worst, detail::point_dist(pts[i], pts[(i + 1) % pts.size()]));
    if (worst <= spacing) return pts;
    count = static_cast<std::size_t>(static_cast<double>(count) * std::max(1.5, worst / spacing * 1.05)) + 1;
  }
}

/// Polyline through `vertices`, subdivided so that every original vertex is kept.
inline ParametricCurve make_segment_chain(const std::vector<Point>& vertices, bool closed = false,
                                          double spacing = 0.4) {
  if (vertices.size() < 2) throw invalid_curve_error("segment chain needs at least 2 vertices");
  if (!(spacing > 0) || spacing > kMaxSampleSpacing) throw invalid_curve_error("segment chain: bad spacing");
  ParametricCurve c{CurveKind::segment_chain, {}, closed};
  const std::size_t segs = closed ? vertices.size() : vertices.size() - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % vertices.size()];
    if (a.size() != b.size()) throw invalid_curve_error("segment chain: vertices differ in dimension");
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(detail::point_dist(a, b) / spacing)));
    for (std::size_t s = 0; s < steps; ++s) {
      Point p(a.size());
      const double t = static_cast<double>(s) / static_cast<double>(steps);
      for (std::size_t k = 0; k < a.size(); ++k) p[k] = a[k] + t * (b[k] - a[k]);
      c.samples.push_back(std::move(p));
    }
  }
  if (!closed) c.samples.push_back(vertices.back());
  validate_curve(c);
  return c;
}

/// Circle of `radius` around `center` in the plane of grid axes (ax0, ax1).
inline ParametricCurve make_circle(const Point& center, double radius, int ax0 = 0, int ax1 = 1,
                                   double phase = 0) {
  if (!(radius > 0)) throw invalid_curve_error("circle: radius must be positive");
  const int n = static_cast<int>(center.size());
  if (ax0 == ax1 || ax0 < 0 || ax1 < 0 || ax0 >= n || ax1 >= n) throw invalid_curve_error("circle: bad plane axes");
  ParametricCurve c{CurveKind::circle, {}, true};
  c.samples = sample_parametric(
      [&](double t) {
        Point p = center;
        p[static_cast<std::size_t>(ax0)] += radius * std::cos(t + phase);
        p[static_cast<std::size_t>(ax1)] += radius * std::sin(t + phase);
        return p;
      },
      0.0, 2 * std::numbers::pi, true);
  validate_curve(c);
  return c;
}

/// Trefoil (sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t), scaled and centred.
/// The unscaled curve fits in radius 3 in the first two axes and 1 in the third.
inline ParametricCurve make_trefoil(const Point& center, double scale) {
  if (center.size() < 3) throw dimension_error("trefoil: needs at least 3 dimensions");
  if (!(scale > 0)) throw invalid_curve_error("trefoil: scale must be positive");
  ParametricCurve c{CurveKind::trefoil, {}, true};
  c.samples = sample_parametric(
      [&](double t) {
        Point p = center;
        p[0] += scale * (std::sin(t) + 2 * std::sin(2 * t));
        p[1] += scale * (std::cos(t) - 2 * std::cos(2 * t));
        p[2] += scale * -std::sin(3 * t);
        return p;
      },
      0.0, 2 * std::numbers::pi, true);
  validate_curve(c);
  return c;
}

/// Two circles of radius `scale` in orthogonal planes, each passing through
/// the other's centre: one in the (0,1) plane, one in the (0,2) plane.
inline std::pair<ParametricCurve, ParametricCurve> make_hopf_link(const Point& center, double scale) {
  if (center.size() < 3) throw dimension_error("hopf link: needs at least 3 dimensions");
  Point c1 = center, c2 = center;
  c1[0] -= scale / 2;
  c2[0] += scale / 2;
  auto a = make_circle(c1, scale, 0, 1);
  auto b = make_circle(c2, scale, 0, 2);
  a.kind = b.kind = CurveKind::hopf_component;
  return {a, b};
}

inline ParametricCurve translate_curve(ParametricCurve c, const Point& by) {
  for (auto& p : c.samples)
    for (std::size_t k = 0; k < p.size() && k < by.size(); ++k) p[k] += by[k];
  return c;
}

inline ParametricCurve make_custom_curve(std::vector<Point> samples, bool closed) {
  ParametricCurve c{CurveKind::custom, std::move(samples), closed};
  validate_curve(c);
  return c;
}

namespace detail {

inline double segment_dist2(const std::array<double, kMaxDim>& p, const std::array<double, kMaxDim>& a,
                            const std::array<double, kMaxDim>& b, int n) {
  double ab2 = 0, t = 0;
  for (int k = 0; k < n; ++k) {
    const double d = b[static_cast<std::size_t>(k)] - a[static_cast<std::size_t>(k)];
    ab2 += d * d;
    t += (p[static_cast<std::size_t>(k)] - a[static_cast<std::size_t>(k)]) * d;
  }
  t = ab2 > 0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
  double s = 0;
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double q = a[i] + t * (b[i] - a[i]) - p[i];
    s += q * q;
  }
  return s;
}

/// Lifts a curve point into grid space; missing axes sit at the grid centre.
inline std::array<double, kMaxDim> lift(const Point& p, const std::vector<int>& dims) {
  std::array<double, kMaxDim> out{};
  for (std::size_t a = 0; a < dims.size(); ++a) out[a] = a < p.size() ? p[a] : (dims[a] - 1) / 2.0;
  return out;
}

}  // namespace detail

/// Sets every voxel within `tube_radius` of the sampled polyline. Curves of
/// lower dimension than the grid sit in the hyperplane through the grid
/// centre. The thickened curve must stay inside the grid.
inline BinaryGrid& rasterize_tube(BinaryGrid& g, const ParametricCurve& c, double tube_radius, bool value = true,
                                  int padding = 0) {
  validate_curve(c);
  if (!(tube_radius > 0)) throw invalid_curve_error("tube radius must be positive");
  const int n = g.ndim();
  if (c.ndim() > n) throw dimension_error("rasterize_tube: curve has more dimensions than the grid");
  const double r2 = tube_radius * tube_radius + 1e-9;

  std::vector<std::array<double, kMaxDim>> pts;
  for (const auto& p : c.samples) pts.push_back(detail::lift(p, g.dims()));
  Coord lo = Coord::zeros(n), hi = Coord::zeros(n);
  for (int a = 0; a < n; ++a) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const auto& p : pts) {
      mn = std::min(mn, p[static_cast<std::size_t>(a)]);
      mx = std::max(mx, p[static_cast<std::size_t>(a)]);
    }
    lo[a] = static_cast<int>(std::ceil(mn - tube_radius - 1e-9));
    hi[a] = static_cast<int>(std::floor(mx + tube_radius + 1e-9));
  }
  detail::check_box_inside(g, lo, hi, padding, "tube");

  // Per segment: scan its own bounding box.
  const std::size_t segs = c.segment_count();
  auto visit = [&](const std::array<double, kMaxDim>& a, const std::array<double, kMaxDim>& b) {
    Coord slo = Coord::zeros(n), shi = Coord::zeros(n);
    for (int k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      slo[k] = static_cast<int>(std::ceil(std::min(a[i], b[i]) - tube_radius - 1e-9));
      shi[k] = static_cast<int>(std::floor(std::max(a[i], b[i]) + tube_radius + 1e-9));
    }
    detail::for_each_in_box(slo, shi, [&](const Coord& v) {
      std::array<double, kMaxDim> p{};
      for (int k = 0; k < n; ++k) p[static_cast<std::size_t>(k)] = v[k];
      if (detail::segment_dist2(p, a, b, n) <= r2) g.set(v, value);
    });
  };
  if (segs == 0) {
    visit(pts[0], pts[0]);
  } else {
    for (std::size_t i = 0; i < segs; ++i) visit(pts[i], pts[(i + 1) % pts.size()]);
  }
  return g;
}

/// Closed curves thicken to solid tori, open ones to balls.
inline BettiVector curve_label(const ParametricCurve& c) { return c.closed ? make_betti(1, 1) : make_betti(1); }

// ---- bridged composites ------------------------------------------------------

struct Bridge {
  Point from;
  Point to;
  double radius = 1;
};

/// Union of implicit parts and straight solid bridges between them.
struct CompositeShape {
  std::vector<ImplicitShape> parts;
  std::vector<Bridge> bridges;
};

inline BinaryGrid& rasterize_composite(BinaryGrid& g, const CompositeShape& s, bool value = true, int padding = 1) {
  for (const auto& p : s.parts) rasterize_implicit(g, p, value, padding);
  for (const auto& b : s.bridges) rasterize_tube(g, make_segment_chain({b.from, b.to}), b.radius, value, padding);
  return g;
}

namespace detail {

inline BinaryGrid rasterize_alone(const std::vector<int>& dims, const ImplicitShape& s) {
  BinaryGrid g(dims);
  rasterize_implicit(g, s, true, 0);
  return g;
}

}  // namespace detail

/// Joins `a` and `b` with a straight solid bridge between their closest
/// voxels. The bridge may not touch `obstacles`.
inline CompositeShape boundary_sum_carve(const ImplicitShape& a, const ImplicitShape& b, double bridge_radius,
                                         const std::vector<int>& dims, const BinaryGrid* obstacles = nullptr) {
  if (a.ndim() != b.ndim() || a.ndim() != static_cast<int>(dims.size()))
    throw dimension_error("boundary_sum_carve: dimension mismatch");
  if (!(bridge_radius > 0)) throw invalid_shape_error("boundary_sum_carve: bridge radius must be positive");
  const BinaryGrid ga = detail::rasterize_alone(dims, a);
  const BinaryGrid gb = detail::rasterize_alone(dims, b);
  {
    BinaryGrid both = ga;
    both &= gb;
    if (both.count_ones() != 0) throw placement_error("boundary_sum_carve: shapes overlap");
  }
  const auto sa = boundary_voxels(ga, Adjacency::face);
  const auto sb = boundary_voxels(gb, Adjacency::face);
  if (sa.empty() || sb.empty()) throw placement_error("boundary_sum_carve: empty shape");
  long long best = std::numeric_limits<long long>::max();
  Coord pa, pb;
  for (const auto& u : sa)
    for (const auto& v : sb) {
      long long d2 = 0;
      for (int k = 0; k < a.ndim(); ++k) d2 += static_cast<long long>(u[k] - v[k]) * (u[k] - v[k]);
      if (d2 < best) {
        best = d2;
        pa = u;
        pb = v;
      }
    }
  Bridge br{Point(pa.begin(), pa.end()), Point(pb.begin(), pb.end()), bridge_radius};
  if (obstacles) {
    BinaryGrid tube(dims);
    rasterize_tube(tube, make_segment_chain({br.from, br.to}), br.radius);
    tube &= *obstacles;
    if (tube.count_ones() != 0) throw placement_error("boundary_sum_carve: bridge runs into another object");
  }
  return CompositeShape{{a, b}, {br}};
}

/// Wedge-sum label: reduced homology adds up.
inline BettiVector wedge_label(const std::vector<BettiVector>& parts) {
  if (parts.empty()) throw invalid_descriptor_error("wedge of nothing");
  BettiVector out = make_betti(1);
  for (const auto& p : parts)
    for (std::size_t k = 1; k < 4; ++k) out.betti[k] += p.betti[k];
  out.euler = out.alternating_sum();
  return out;
}

// ---- spaced placement ------------------------------------------------------------

struct PlacementOptions {
  int max_trials = 1000;
  int margin = 0;  // voxels kept clear of the sample border
  std::uint64_t seed = 0;
};

struct Placement {
  Coord offset;
  int trials = 0;
};

/// Finds an offset such that `obj` shifted by it lies inside `sample` and
/// misses dilate(sample, ball(spacing)). Offsets are drawn at random.
inline Placement place_with_spacing(const BinaryGrid& sample, const BinaryGrid& obj, int spacing,
                                    const PlacementOptions& opt = {}) {
  if (sample.ndim() != obj.ndim()) throw dimension_error("place_with_spacing: dimension mismatch");
  if (spacing < 0) throw std::invalid_argument("place_with_spacing: negative spacing");
  const int n = sample.ndim();
  std::vector<Coord> ones;
  Coord lo = Coord::zeros(n), hi = Coord::zeros(n);
  for (int a = 0; a < n; ++a) {
    lo[a] = std::numeric_limits<int>::max();
    hi[a] = std::numeric_limits<int>::min();
  }
  for_each_voxel(obj.dims(), [&](const Coord& c, std::size_t f) {
    if (!obj.get(f)) return;
    ones.push_back(c);
    for (int a = 0; a < n; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  });
  if (ones.empty()) throw placement_error("place_with_spacing: object is empty");
  // Offset range keeping the object's bounding box inside the margin.
  Coord omin = Coord::zeros(n), omax = Coord::zeros(n);
  for (int a = 0; a < n; ++a) {
    omin[a] = opt.margin - lo[a];
    omax[a] = sample.dim(a) - 1 - opt.margin - hi[a];
    if (omax[a] < omin[a]) throw placement_exhausted("place_with_spacing: object does not fit in the sample");
  }
  const BinaryGrid blocked = detail::dilate_offsets(sample, ball_offsets(n, spacing));
  for (int t = 0; t < opt.max_trials; ++t) {
    Coord off = Coord::zeros(n);
    for (int a = 0; a < n; ++a) {
      const auto span = static_cast<std::uint64_t>(omax[a] - omin[a] + 1);
      off[a] = omin[a] + static_cast<int>(mix64(derive_seed(opt.seed, static_cast<std::uint64_t>(t)) +
                                                static_cast<std::uint64_t>(a)) %
                                          span);
    }
    bool ok = true;
    for (const auto& c : ones)
      if (blocked.get(blocked.flat_index(c + off))) {
        ok = false;
        break;
      }
    if (ok) return Placement{off, t + 1};
  }
  throw placement_exhausted("place_with_spacing: no free offset after " + std::to_string(opt.max_trials) + " trials");
}

/// ORs `obj` shifted by `offset` into `sample`.
inline void stamp(BinaryGrid& sample, const BinaryGrid& obj, const Coord& offset) {
  for_each_voxel(obj.dims(), [&](const Coord& c, std::size_t f) {
    if (obj.get(f)) sample.set(c + offset, true);
  });
}

}  // namespace topovox
