// Dataset generation: draw a construction, rasterize it, optionally thicken
// and deform it, label it symbolically, check the label with the homology
// engine and write TVOX + JSON manifest pairs.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "topovox/deform.hpp"
#include "topovox/grid.hpp"
#include "topovox/homology.hpp"
#include "topovox/io.hpp"
#include "topovox/labels.hpp"
#include "topovox/morphology.hpp"
#include "topovox/noise.hpp"
#include "topovox/seeds.hpp"

namespace topovox {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kMaxRetries = 10;
inline constexpr const char* kOutputDirEnv = "TOPOVOX_OUTPUT_DIR";

class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class generation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- JSON conversions --------------------------------------------------------

inline Json to_json(const BettiVector& b) {
  return Json{{"betti", b.betti}, {"euler", b.euler}, {"reduced", b.reduced}};
}

inline BettiVector betti_from_json(const Json& j) {
  BettiVector b;
  const auto& arr = j.at("betti");
  if (!arr.is_array() || arr.size() > 4) throw config_error("betti: expected an array of at most 4 integers");
  for (std::size_t k = 0; k < arr.size(); ++k) b.betti[k] = arr[k].get<std::int64_t>();
  b.reduced = j.value("reduced", false);
  b.euler = j.contains("euler") ? j.at("euler").get<std::int64_t>() : b.alternating_sum();
  return b;
}

inline Json to_json(const HandleCounts& c) { return Json{{"g", c.g}, {"h", c.h}, {"i", c.i}, {"j", c.j}}; }

inline HandleCounts counts_from_json(const Json& j) {
  return HandleCounts{j.value("g", 0), j.value("h", 0), j.value("i", 0), j.value("j", 0)};
}

inline Json to_json(const ConstructionDescriptor& d) {
  Json j;
  j["family"] = std::string(family_name(d.family));
  if (d.family == Family::closed_sum || d.family == Family::boundary_sum ||
      (d.family == Family::cube_complement && d.children.empty()))
    j["counts"] = to_json(d.counts);
  if (d.family == Family::embedded_object) {
    j["object_kind"] = d.object_kind;
    j["object_label"] = to_json(d.object_label);
  }
  if (!d.children.empty()) {
    j["children"] = Json::array();
    for (const auto& c : d.children) j["children"].push_back(to_json(c));
  }
  j["placement"] = d.placement;
  j["deformation_log"] = d.deformation_log;
  return j;
}

inline ConstructionDescriptor descriptor_from_json(const Json& j) {
  ConstructionDescriptor d;
  d.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("counts")) d.counts = counts_from_json(j.at("counts"));
  if (j.contains("object_kind")) d.object_kind = j.at("object_kind").get<std::string>();
  if (j.contains("object_label")) d.object_label = betti_from_json(j.at("object_label"));
  if (j.contains("children"))
    for (const auto& c : j.at("children")) d.children.push_back(descriptor_from_json(c));
  if (j.contains("placement")) d.placement = j.at("placement");
  if (j.contains("deformation_log")) d.deformation_log = j.at("deformation_log");
  return d;
}

/// Wall time is left out so that manifests are reproducible.
inline Json to_json(const DeformReport& r) {
  return Json{{"accepted_flips", r.accepted_flips},
              {"rejected_removals", r.rejected_removals},
              {"rejected_placements", r.rejected_placements},
              {"global_checks", r.global_checks},
              {"volume_before", r.volume_before},
              {"volume_after", r.volume_after},
              {"betti_before", to_json(r.betti_before)},
              {"betti_after", to_json(r.betti_after)},
              {"stagnated", r.stagnated}};
}

// ---- random numbers ------------------------------------------------------------

/// mt19937_64 with our own conversions, so draws do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }
  bool chance(double p) { return uniform() < p; }
  std::size_t weighted(const std::vector<double>& w) {
    double total = 0;
    for (double v : w) total += v;
    double x = uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (x < w[i]) return i;
      x -= w[i];
    }
    return w.size() - 1;
  }
  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(uniform_int(0, i))]);
    return p;
  }

 private:
  std::mt19937_64 eng_;
};

// ---- catalogue -------------------------------------------------------------------

inline const std::vector<std::string>& catalog_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (ShapeKind s : kAllShapeKinds) k.emplace_back(shape_kind_name(s));
    for (const char* c : {"circle_tube", "segment_tube", "circle_wedge", "trefoil_tube", "hopf_link"}) k.emplace_back(c);
    return k;
  }();
  return kinds;
}

/// One rasterized seed object in a tight local grid.
struct SeedObject {
  std::string kind;
  BinaryGrid voxels;
  BettiVector label;
  std::optional<HandleCounts> counts;
  Json params;
};

namespace detail {

constexpr double kMinThickness = 1.5;  // minor radius floor, in voxels

struct ShapeParams {
  double R1 = 0, R2 = 0, r = 0, L = 0;
  bool ok = false;
};

inline ShapeParams implicit_params(ShapeKind k, double H) {
  ShapeParams p;
  switch (k) {
    case ShapeKind::ball:
      p.r = H;
      p.ok = H >= kMinThickness;
      break;
    case ShapeKind::sphere_shell:
      p.r = std::max(kMinThickness, 0.2 * H);
      p.R1 = H - p.r;
      p.ok = p.R1 - p.r >= kMinThickness;
      break;
    case ShapeKind::solid_torus:
    case ShapeKind::S1xB3:
    case ShapeKind::S2xB2:
    case ShapeKind::tube_IxS2:
    case ShapeKind::tube_I2xS1:
      p.r = std::max(kMinThickness, 0.3 * H);
      p.R1 = H - p.r;
      p.L = p.r;
      p.ok = p.R1 - p.r >= kMinThickness;
      break;
    case ShapeKind::torus_shell:
    case ShapeKind::T2xB2:
    case ShapeKind::tube_IxT2:
      p.r = std::max(kMinThickness, 0.12 * H);
      p.R2 = p.r + std::max(kMinThickness, 0.15 * H);
      p.R1 = H - p.R2 - p.r;
      p.L = p.r;
      p.ok = p.R1 - p.R2 - p.r >= kMinThickness;
      break;
  }
  return p;
}

inline bool curve_kind(const std::string& k) {
  return k == "circle_tube" || k == "segment_tube" || k == "circle_wedge" || k == "trefoil_tube" || k == "hopf_link";
}

inline bool kind_fits_dim(const std::string& kind, int n) {
  if (curve_kind(kind)) return (kind == "trefoil_tube" || kind == "hopf_link") ? n >= 3 : true;
  const auto [lo, hi] = shape_dim_range(shape_kind_from_name(kind));
  return n >= lo && n <= hi;
}

inline bool kind_fits_size(const std::string& kind, double H) {
  constexpr double t = kMinThickness;
  if (kind == "circle_tube") return H - std::max(t, 0.25 * H) - std::max(t, 0.25 * H) >= t;
  if (kind == "segment_tube") return H >= t;
  if (kind == "circle_wedge") return (H - t) / 2 - t >= 2;
  if (kind == "trefoil_tube") return (H - t) / 3 >= 4.5;
  if (kind == "hopf_link") return (H - t) / 1.5 >= 5;
  return implicit_params(shape_kind_from_name(kind), H).ok;
}

inline double min_half_size(const std::string& kind) {
  for (double H = 1.5; H <= 64; H += 0.25)
    if (kind_fits_size(kind, H)) return H;
  return 1e9;
}

inline Point permuted(const Point& p, const std::vector<int>& perm, const Point& centre) {
  Point out = centre;
  for (std::size_t k = 0; k < perm.size(); ++k) out[static_cast<std::size_t>(perm[k])] = p[k];
  return out;
}

inline Point unit_vector(int n, Rng& rng) {
  Point v(static_cast<std::size_t>(n));
  double len = 0;
  while (len < 1e-6) {
    len = 0;
    for (auto& x : v) {
      x = rng.uniform(-1, 1);
      len += x * x;
    }
    if (len > 1) len = 0;
  }
  len = std::sqrt(len);
  for (auto& x : v) x /= len;
  return v;
}

}  // namespace detail

/// Builds `kind` with overall half-size `H` in an n-dimensional local grid.
inline SeedObject make_seed_object(const std::string& kind, int n, double H, Rng& rng) {
  if (!detail::kind_fits_dim(kind, n)) throw config_error("catalogue kind " + kind + " not available in " + std::to_string(n) + "D");
  if (!detail::kind_fits_size(kind, H)) throw placement_error("catalogue kind " + kind + " does not fit half-size " + std::to_string(H));
  const int half = static_cast<int>(std::ceil(H));
  const std::vector<int> dims(static_cast<std::size_t>(n), 2 * half + 1);
  const Point centre(static_cast<std::size_t>(n), static_cast<double>(half));
  SeedObject obj{kind, BinaryGrid(dims), {}, std::nullopt, Json::object()};
  obj.params["half_size"] = H;
  const auto perm = rng.permutation(n);
  constexpr double t = detail::kMinThickness;

  if (!detail::curve_kind(kind)) {
    const ShapeKind sk = shape_kind_from_name(kind);
    const auto p = detail::implicit_params(sk, H);
    ImplicitShape s{sk, centre, p.R1, p.R2, p.r, p.L, perm};
    rasterize_implicit(obj.voxels, s, true, 0);
    obj.label = shape_label(sk, n);
    obj.counts = shape_handle_counts(sk);
    obj.params["R1"] = p.R1;
    obj.params["R2"] = p.R2;
    obj.params["r"] = p.r;
    obj.params["L"] = p.L;
    obj.params["orientation"] = perm;
    return obj;
  }
  auto local = [&](std::initializer_list<double> xs) {
    Point q(static_cast<std::size_t>(n), 0.0);
    std::size_t k = 0;
    for (double x : xs) q[k++] = x;
    return q;
  };
  if (kind == "circle_tube") {
    const double tr = std::max(t, 0.25 * H);
    rasterize_tube(obj.voxels, make_circle(centre, H - tr, perm[0], perm[1], rng.uniform(0, 6.283)), tr);
    obj.label = make_betti(1, 1);
    obj.params["radius"] = H - tr;
    obj.params["tube_radius"] = tr;
  } else if (kind == "segment_tube") {
    const double tr = std::max(t, 0.3 * H);
    const auto u = detail::unit_vector(n, rng);
    Point a = centre, b = centre;
    for (std::size_t k = 0; k < u.size(); ++k) {
      a[k] -= (H - tr) * u[k];
      b[k] += (H - tr) * u[k];
    }
    rasterize_tube(obj.voxels, make_segment_chain({a, b}), tr);
    obj.label = make_betti(1);
    obj.params["half_length"] = H - tr;
    obj.params["tube_radius"] = tr;
  } else if (kind == "circle_wedge") {
    const double rc = (H - t) / 2;
    Point c1 = centre, c2 = centre;
    c1[static_cast<std::size_t>(perm[0])] -= rc;
    c2[static_cast<std::size_t>(perm[0])] += rc;
    rasterize_tube(obj.voxels, make_circle(c1, rc, perm[0], perm[1]), t);
    rasterize_tube(obj.voxels, make_circle(c2, rc, perm[0], perm[1], std::numbers::pi), t);
    obj.label = make_betti(1, 2);
    obj.params["radius"] = rc;
    obj.params["tube_radius"] = t;
  } else if (kind == "trefoil_tube") {
    const double scale = (H - t) / 3;
    auto c = make_trefoil(local({0, 0, 0}), scale);
    for (auto& q : c.samples) q = detail::permuted(q, perm, Point(static_cast<std::size_t>(n), 0.0));
    for (auto& q : c.samples)
      for (std::size_t k = 0; k < q.size(); ++k) q[k] += centre[k];
    rasterize_tube(obj.voxels, c, t);
    obj.label = make_betti(1, 1);
    obj.params["scale"] = scale;
    obj.params["tube_radius"] = t;
  } else if (kind == "hopf_link") {
    const double scale = (H - t) / 1.5;
    auto [c1, c2] = make_hopf_link(local({0, 0, 0}), scale);
    for (auto* c : {&c1, &c2}) {
      for (auto& q : c->samples) {
        q = detail::permuted(q, perm, Point(static_cast<std::size_t>(n), 0.0));
        for (std::size_t k = 0; k < q.size(); ++k) q[k] += centre[k];
      }
      rasterize_tube(obj.voxels, *c, t);
    }
    obj.label = make_betti(2, 2);
    obj.params["scale"] = scale;
    obj.params["tube_radius"] = t;
  }
  obj.params["orientation"] = perm;
  return obj;
}

// ---- configuration ---------------------------------------------------------------

enum class SampleMode { cutout, embed, mixed };

inline std::string mode_name(SampleMode m) {
  switch (m) {
    case SampleMode::cutout: return "cutout";
    case SampleMode::embed: return "embed";
    case SampleMode::mixed: return "mixed";
  }
  return "unknown";
}

inline SampleMode mode_from_name(const std::string& s) {
  for (auto m : {SampleMode::cutout, SampleMode::embed, SampleMode::mixed})
    if (mode_name(m) == s) return m;
  throw config_error("unknown mode '" + s + "' (expected cutout, embed or mixed)");
}

struct DeformSettings {
  int iterations = 0;
  double noise_scale = 8;
  int noise_octaves = 1;
  int safety_radius = 1;
  int max_move_distance = 1;
  int global_check_every = 100;
};

struct MorphologySettings {
  int thicken_iterations = 0;  // background thinning, 2D only
  int dilate_iterations = 0;   // homology-gated dilation
  double dilate_noise_scale = 0;  // > 0 biases dilation with noise
};

struct DatasetConfig {
  int count = 4;
  std::vector<int> dims = {32, 32};
  SampleMode mode = SampleMode::cutout;
  std::map<std::string, double> catalog;  // empty: every kind with weight 1
  int max_objects = 3;
  int spacing = 2;
  double bridge_probability = 0.3;
  double bridge_radius = 1.5;
  DeformSettings deform;
  MorphologySettings morphology;
  double verification_rate = 1.0;
  std::string output_dir = "dataset";
  std::uint64_t master_seed = 0;
  int workers = 0;  // 0: one per hardware thread

  int ndim() const { return static_cast<int>(dims.size()); }

  double weight(const std::string& kind) const {
    if (catalog.empty()) return 1.0;
    const auto it = catalog.find(kind);
    return it == catalog.end() ? 0.0 : it->second;
  }

  void validate() const {
    if (count < 0) throw config_error("count must be nonnegative");
    if (dims.size() < 2 || dims.size() > kMaxDim) throw config_error("dims must have 2 to 4 entries");
    for (int d : dims)
      if (d < 8) throw config_error("every axis needs at least 8 voxels");
    if (max_objects < 1) throw config_error("max_objects must be positive");
    if (spacing < 1) throw config_error("spacing must be positive");
    if (bridge_probability < 0 || bridge_probability > 1) throw config_error("bridge_probability must lie in [0, 1]");
    if (!(bridge_radius >= 1)) throw config_error("bridge_radius must be at least 1");
    if (verification_rate < 0 || verification_rate > 1) throw config_error("verification_rate must lie in [0, 1]");
    if (morphology.thicken_iterations < 0 || morphology.dilate_iterations < 0 || deform.iterations < 0)
      throw config_error("iteration counts must be nonnegative");
    if (morphology.thicken_iterations > 0 && ndim() != 2)
      throw config_error("thicken_iterations needs 2D samples; use dilate_iterations in 3D and 4D");
    double total = 0;
    for (const auto& [k, w] : catalog) {
      if (std::find(catalog_kinds().begin(), catalog_kinds().end(), k) == catalog_kinds().end())
        throw config_error("unknown catalogue kind '" + k + "'");
      if (w < 0) throw config_error("catalogue weights must be nonnegative");
    }
    for (const auto& k : catalog_kinds())
      if (detail::kind_fits_dim(k, ndim())) total += weight(k);
    if (!(total > 0)) throw config_error("catalogue weights must have a positive sum for this dimension");
    DeformConfig dc;
    dc.noise_scale = deform.noise_scale;
    dc.noise_octaves = deform.noise_octaves;
    dc.safety_radius = deform.safety_radius;
    dc.max_move_distance = deform.max_move_distance;
    dc.global_check_every = deform.global_check_every;
    dc.validate();
  }
};

inline Json to_json(const DatasetConfig& c, bool with_output_dir = true) {
  Json cat = Json::object();
  for (const auto& [k, w] : c.catalog) cat[k] = w;
  Json j{{"count", c.count},
         {"dims", c.dims},
         {"ndim", c.ndim()},
         {"mode", mode_name(c.mode)},
         {"catalog", cat},
         {"max_objects", c.max_objects},
         {"spacing", c.spacing},
         {"bridge_probability", c.bridge_probability},
         {"bridge_radius", c.bridge_radius},
         {"deform",
          {{"iterations", c.deform.iterations},
           {"noise_scale", c.deform.noise_scale},
           {"noise_octaves", c.deform.noise_octaves},
           {"safety_radius", c.deform.safety_radius},
           {"max_move_distance", c.deform.max_move_distance},
           {"global_check_every", c.deform.global_check_every}}},
         {"morphology",
          {{"thicken_iterations", c.morphology.thicken_iterations},
           {"dilate_iterations", c.morphology.dilate_iterations},
           {"dilate_noise_scale", c.morphology.dilate_noise_scale}}},
         {"verification_rate", c.verification_rate},
         {"master_seed", c.master_seed}};
  if (with_output_dir) {
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
  }
  return j;
}

inline DatasetConfig config_from_json(const Json& j) {
  DatasetConfig c;
  try {
    c.count = j.value("count", c.count);
    if (j.contains("dims")) c.dims = j.at("dims").get<std::vector<int>>();
    if (j.contains("ndim") && j.at("ndim").get<int>() != c.ndim()) throw config_error("ndim does not match dims");
    if (j.contains("mode")) c.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("catalog"))
      for (const auto& [k, w] : j.at("catalog").items()) c.catalog[k] = w.get<double>();
    c.max_objects = j.value("max_objects", c.max_objects);
    c.spacing = j.value("spacing", c.spacing);
    c.bridge_probability = j.value("bridge_probability", c.bridge_probability);
    c.bridge_radius = j.value("bridge_radius", c.bridge_radius);
    if (j.contains("deform")) {
      const auto& d = j.at("deform");
      c.deform.iterations = d.value("iterations", c.deform.iterations);
      c.deform.noise_scale = d.value("noise_scale", c.deform.noise_scale);
      c.deform.noise_octaves = d.value("noise_octaves", c.deform.noise_octaves);
      c.deform.safety_radius = d.value("safety_radius", c.deform.safety_radius);
      c.deform.max_move_distance = d.value("max_move_distance", c.deform.max_move_distance);
      c.deform.global_check_every = d.value("global_check_every", c.deform.global_check_every);
    }
    if (j.contains("morphology")) {
      const auto& m = j.at("morphology");
      c.morphology.thicken_iterations = m.value("thicken_iterations", c.morphology.thicken_iterations);
      c.morphology.dilate_iterations = m.value("dilate_iterations", c.morphology.dilate_iterations);
      c.morphology.dilate_noise_scale = m.value("dilate_noise_scale", c.morphology.dilate_noise_scale);
    }
    c.verification_rate = j.value("verification_rate", c.verification_rate);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline DatasetConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// The configured output directory unless TOPOVOX_OUTPUT_DIR is set.
inline std::string effective_output_dir(const DatasetConfig& c) {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? std::string(env) : c.output_dir;
}

// ---- one sample ---------------------------------------------------------------------

struct GeneratedSample {
  BinaryGrid grid;
  ConstructionDescriptor descriptor;
  BettiVector label;
  std::optional<BettiVector> engine;
  std::optional<DeformReport> deform_report;
  SampleMode mode = SampleMode::cutout;
  std::uint64_t seed = 0;
  int attempts = 1;
};

namespace detail {

struct PlacedObject {
  SeedObject obj;
  Coord offset;
  BinaryGrid in_sample;  // the object's voxels in sample coordinates
};

inline std::pair<Coord, Coord> closest_boundary_pair(const BinaryGrid& a, const BinaryGrid& b) {
  const auto sa = boundary_voxels(a, Adjacency::face);
  const auto sb = boundary_voxels(b, Adjacency::face);
  long long best = std::numeric_limits<long long>::max();
  std::pair<Coord, Coord> out;
  for (const auto& u : sa)
    for (const auto& v : sb) {
      long long d2 = 0;
      for (int k = 0; k < a.ndim(); ++k) d2 += static_cast<long long>(u[k] - v[k]) * (u[k] - v[k]);
      if (d2 < best) {
        best = d2;
        out = {u, v};
      }
    }
  return out;
}

inline std::string pick_kind(const DatasetConfig& cfg, double room, Rng& rng) {
  std::vector<std::string> kinds;
  std::vector<double> weights;
  for (const auto& k : catalog_kinds()) {
    const double w = cfg.weight(k);
    if (w > 0 && kind_fits_dim(k, cfg.ndim()) && min_half_size(k) <= room) {
      kinds.push_back(k);
      weights.push_back(w);
    }
  }
  if (kinds.empty()) throw config_error("no catalogue kind fits a grid of this size");
  return kinds[rng.weighted(weights)];
}

inline Json offset_json(const Coord& c) { return Json(std::vector<int>(c.begin(), c.end())); }

}  // namespace detail

/// One attempt at a sample with the given seed. Throws placement_error or
/// topology_drift_error when the attempt has to be abandoned.
inline GeneratedSample generate_sample_attempt(const DatasetConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const int n = cfg.ndim();
  GeneratedSample out;
  out.seed = seed;
  out.mode = cfg.mode == SampleMode::mixed ? (rng.chance(0.5) ? SampleMode::cutout : SampleMode::embed) : cfg.mode;

  const int min_dim = *std::min_element(cfg.dims.begin(), cfg.dims.end());
  const double room = std::floor((min_dim - 3) / 2.0);
  const int k = rng.uniform_int(1, cfg.max_objects);

  // Draw, rasterize and place the objects.
  BinaryGrid occupied(cfg.dims);
  std::vector<detail::PlacedObject> placed;
  for (int i = 0; i < k; ++i) {
    const std::string kind = detail::pick_kind(cfg, room, rng);
    const double hmin = detail::min_half_size(kind);
    const double hmax = std::max(hmin, room * (k == 1 ? 0.9 : 0.6));
    const double H = std::round(rng.uniform(hmin, hmax) * 4) / 4;
    SeedObject obj = make_seed_object(kind, n, std::max(H, hmin), rng);
    PlacementOptions opt;
    opt.margin = 1;
    opt.seed = rng.next();
    const Placement p = place_with_spacing(occupied, obj.voxels, cfg.spacing, opt);
    BinaryGrid mine(cfg.dims);
    stamp(mine, obj.voxels, p.offset);
    occupied |= mine;
    placed.push_back({std::move(obj), p.offset, std::move(mine)});
  }

  // Bridge consecutive objects into groups.
  std::vector<int> group(placed.size());
  std::vector<Json> bridges;
  BinaryGrid scene = occupied;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    group[i] = static_cast<int>(i);
    if (i == 0 || !rng.chance(cfg.bridge_probability)) continue;
    const auto [pa, pb] = detail::closest_boundary_pair(placed[i - 1].in_sample, placed[i].in_sample);
    BinaryGrid others(cfg.dims);
    for (std::size_t o = 0; o < placed.size(); ++o)
      if (o != i && o != i - 1) others |= placed[o].in_sample;
    others = dilate(others, unit_ball(n));
    BinaryGrid tube(cfg.dims);
    rasterize_tube(tube, make_segment_chain({Point(pa.begin(), pa.end()), Point(pb.begin(), pb.end())}),
                   cfg.bridge_radius, true, 1);
    BinaryGrid hit = tube;
    hit &= others;
    if (hit.count_ones()) throw placement_error("bridge would touch a third object");
    scene |= tube;
    group[i] = group[i - 1];
    bridges.push_back(Json{{"between", {i - 1, i}}, {"from", detail::offset_json(pa)}, {"to", detail::offset_json(pb)},
                           {"radius", cfg.bridge_radius}});
  }

  // Descriptor: one child per group.
  std::vector<ConstructionDescriptor> children;
  for (std::size_t i = 0; i < placed.size();) {
    std::size_t e = i;
    while (e + 1 < placed.size() && group[e + 1] == group[i]) ++e;
    ConstructionDescriptor child;
    Json parts = Json::array();
    std::vector<BettiVector> labels;
    bool all_counts = n == 4;
    HandleCounts sum;
    for (std::size_t m = i; m <= e; ++m) {
      const auto& po = placed[m];
      parts.push_back(Json{{"kind", po.obj.kind}, {"offset", detail::offset_json(po.offset)}, {"params", po.obj.params}});
      labels.push_back(po.obj.label);
      if (po.obj.counts) {
        sum.g += po.obj.counts->g;
        sum.h += po.obj.counts->h;
        sum.i += po.obj.counts->i;
        sum.j = std::max(sum.j, po.obj.counts->j);
      } else {
        all_counts = false;
      }
    }
    if (all_counts) {
      child.family = Family::boundary_sum;
      child.counts = sum;
    } else {
      child.family = Family::embedded_object;
      child.object_kind = e == i ? placed[i].obj.kind : "bridged";
      child.object_label = e == i ? labels.front() : wedge_label(labels);
    }
    child.placement = Json{{"parts", parts}};
    children.push_back(std::move(child));
    i = e + 1;
  }
  ConstructionDescriptor d;
  d.family = out.mode == SampleMode::cutout ? Family::cube_complement : Family::disjoint_union;
  d.children = std::move(children);
  d.placement = Json{{"mode", mode_name(out.mode)}, {"bridges", bridges}};

  BinaryGrid g = out.mode == SampleMode::cutout ? scene.complement() : scene;

  // Optional morphology and deformation.
  const BettiVector before = (n == 4 && (cfg.morphology.dilate_iterations > 0)) ? betti_numbers(g) : BettiVector{};
  if (cfg.morphology.thicken_iterations > 0) {
    g = thicken_background(g, cfg.morphology.thicken_iterations);
    d.deformation_log.push_back(Json{{"op", "thicken_background"}, {"iterations", cfg.morphology.thicken_iterations}});
  }
  if (cfg.morphology.dilate_iterations > 0) {
    const std::uint64_t s = rng.next();
    std::optional<NoiseField> bias;
    if (cfg.morphology.dilate_noise_scale > 0) bias = noise_field(cfg.dims, cfg.morphology.dilate_noise_scale, s);
    SafeDilateReport rep;
    g = homology_safe_dilate(g, unit_ball(n), cfg.morphology.dilate_iterations, bias ? &*bias : nullptr, s, &rep);
    d.deformation_log.push_back(Json{{"op", "homology_safe_dilate"},
                                     {"iterations", cfg.morphology.dilate_iterations},
                                     {"noise_scale", cfg.morphology.dilate_noise_scale},
                                     {"seed", s},
                                     {"accepted", rep.accepted}});
    // The local check is not a proof in 4D; confirm globally.
    if (n == 4 && betti_numbers(g) != before)
      throw topology_drift_error("homology_safe_dilate changed the Betti numbers", g, 0);
  }
  if (cfg.deform.iterations > 0) {
    DeformConfig dc;
    dc.iterations = cfg.deform.iterations;
    dc.noise_scale = cfg.deform.noise_scale;
    dc.noise_octaves = cfg.deform.noise_octaves;
    dc.safety_radius = cfg.deform.safety_radius;
    dc.max_move_distance = cfg.deform.max_move_distance;
    dc.global_check_every = cfg.deform.global_check_every;
    dc.seed = rng.next();
    auto [moved, rep] = deform_volume_preserving(g, dc);
    g = std::move(moved);
    d.deformation_log.push_back(Json{{"op", "deform_volume_preserving"},
                                     {"iterations", dc.iterations},
                                     {"noise_scale", dc.noise_scale},
                                     {"noise_octaves", dc.noise_octaves},
                                     {"seed", dc.seed},
                                     {"accepted_flips", rep.accepted_flips}});
    out.deform_report = rep;
  }

  out.label = label_for(d, n);
  out.descriptor = std::move(d);
  if (unit_uniform(seed, 0x7665726966ull) < cfg.verification_rate) {
    out.engine = betti_numbers(g);
    if (*out.engine != out.label)
      throw topology_drift_error("engine measured " + out.engine->to_string() + " but the label is " +
                                     out.label.to_string(),
                                 g, 0);
  }
  out.grid = std::move(g);
  return out;
}

/// Sample `index` of the dataset, retried with fresh derived seeds.
inline GeneratedSample generate_sample(const DatasetConfig& cfg, std::size_t index) {
  const std::uint64_t base = derive_seed(cfg.master_seed, index);
  std::string last_error;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    const std::uint64_t seed = attempt == 0 ? base : derive_seed(base, 1000 + static_cast<std::uint64_t>(attempt));
    try {
      auto s = generate_sample_attempt(cfg, seed);
      s.attempts = attempt + 1;
      return s;
    } catch (const placement_error& e) {
      last_error = e.what();
    } catch (const topology_drift_error& e) {
      last_error = e.what();
    }
  }
  throw generation_error("sample " + std::to_string(index) + " failed after " + std::to_string(kMaxRetries) +
                         " retries: " + last_error);
}

inline std::string sample_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%05zu", index);
  return buf;
}

inline Json make_manifest(const GeneratedSample& s, std::size_t index, const std::string& voxel_file,
                          const std::string& checksum) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["sample_index"] = index;
  j["dims"] = s.grid.dims();
  j["ndim"] = s.grid.ndim();
  j["mode"] = mode_name(s.mode);
  j["construction"] = to_json(s.descriptor);
  j["label"] = to_json(s.label);
  j["engine_verified"] = s.engine.has_value();
  j["engine_betti"] = s.engine ? to_json(*s.engine) : Json(nullptr);
  j["deform_report"] = s.deform_report ? to_json(*s.deform_report) : Json(nullptr);
  j["generator_seed"] = s.seed;
  j["attempts"] = s.attempts;
  j["volume"] = s.grid.count_ones();
  j["voxel_file"] = voxel_file;
  j["checksum"] = checksum;
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline Json read_json_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw format_error("JSON '" + path + "': " + e.what(), 0);
  }
}

struct SampleFiles {
  std::string voxel_path;
  std::string manifest_path;
  BettiVector label;
  bool engine_verified = false;
};

/// Generates every sample (in parallel) and writes the files plus an
/// index.json. Output depends only on the config, never on thread count.
inline std::vector<SampleFiles> generate_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path dir = effective_output_dir(cfg);
  fs::create_directories(dir);

  const auto count = static_cast<std::size_t>(cfg.count);
  std::vector<SampleFiles> files(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const auto s = generate_sample(cfg, i);
        const std::string stem = sample_stem(i);
        const auto bytes = encode_voxels(s.grid);
        write_file_bytes((dir / (stem + ".tvox")).string(), bytes);
        write_json_file((dir / (stem + ".json")).string(), make_manifest(s, i, stem + ".tvox", checksum_string(bytes)));
        files[i] = {(dir / (stem + ".tvox")).string(), (dir / (stem + ".json")).string(), s.label, s.engine.has_value()};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Json index{{"schema_version", kSchemaVersion}, {"config", to_json(cfg, false)}, {"samples", Json::array()}};
  for (std::size_t i = 0; i < count; ++i)
    index["samples"].push_back(Json{{"voxel_file", sample_stem(i) + ".tvox"},
                                    {"manifest_file", sample_stem(i) + ".json"},
                                    {"label", to_json(files[i].label)},
                                    {"engine_verified", files[i].engine_verified}});
  write_json_file((dir / "index.json").string(), index);
  return files;
}

// ---- verification, statistics, slices ----------------------------------------------------

struct VerifyResult {
  bool pass = false;
  bool checksum_ok = false;
  bool symbolic_ok = false;
  bool engine_ok = false;
  BettiVector label;
  BettiVector engine;
  std::string message;
};

inline Json to_json(const VerifyResult& r) {
  return Json{{"pass", r.pass},           {"checksum_ok", r.checksum_ok}, {"symbolic_ok", r.symbolic_ok},
              {"engine_ok", r.engine_ok}, {"label", to_json(r.label)},    {"engine", to_json(r.engine)},
              {"message", r.message}};
}

/// Recomputes the Betti numbers of the voxel file and compares them with the
/// manifest label; also re-derives the label from the stored construction
/// and checks the file checksum.
inline VerifyResult verify_sample(const std::string& voxel_path, const std::string& manifest_path) {
  VerifyResult r;
  const Json m = read_json_file(manifest_path);
  const auto bytes = read_file_bytes(voxel_path);
  r.checksum_ok = checksum_string(bytes) == m.at("checksum").get<std::string>();
  const BinaryGrid g = decode_voxels(bytes);
  r.label = betti_from_json(m.at("label"));
  try {
    r.symbolic_ok = label_for(descriptor_from_json(m.at("construction")), g.ndim()) == r.label;
  } catch (const std::exception&) {
    r.symbolic_ok = false;
  }
  r.engine = betti_numbers(g);
  r.engine_ok = r.engine == r.label;
  r.pass = r.checksum_ok && r.symbolic_ok && r.engine_ok;
  if (!r.checksum_ok) r.message += "checksum mismatch; ";
  if (!r.symbolic_ok) r.message += "label does not follow from the construction; ";
  if (!r.engine_ok) r.message += "engine " + r.engine.to_string() + " vs label " + r.label.to_string() + "; ";
  if (r.pass) r.message = "ok";
  return r;
}

/// Verifies manifest `path`, resolving its voxel file next to it.
inline VerifyResult verify_manifest(const std::string& manifest_path) {
  const Json m = read_json_file(manifest_path);
  const auto voxel = std::filesystem::path(manifest_path).parent_path() / m.at("voxel_file").get<std::string>();
  return verify_sample(voxel.string(), manifest_path);
}

/// Aggregate counts over a generated dataset directory.
inline Json dataset_stats(const std::string& dir) {
  namespace fs = std::filesystem;
  const Json index = read_json_file((fs::path(dir) / "index.json").string());
  std::map<std::string, std::size_t> families, labels, modes;
  std::size_t verified = 0, samples = 0, volume = 0, retried = 0;
  for (const auto& e : index.at("samples")) {
    const Json m = read_json_file((fs::path(dir) / e.at("manifest_file").get<std::string>()).string());
    ++samples;
    verified += m.at("engine_verified").get<bool>();
    volume += m.at("volume").get<std::size_t>();
    retried += m.at("attempts").get<int>() > 1;
    ++families[m.at("construction").at("family").get<std::string>()];
    ++modes[m.at("mode").get<std::string>()];
    ++labels[betti_from_json(m.at("label")).to_string()];
  }
  Json out{{"samples", samples},
           {"engine_verified", verified},
           {"retried", retried},
           {"mean_volume", samples ? static_cast<double>(volume) / static_cast<double>(samples) : 0.0}};
  out["modes"] = modes;
  out["families"] = families;
  out["labels"] = labels;
  return out;
}

/// Writes the 2D section of a voxel file as a P5 graymap.
inline BinaryGrid export_slice(const std::string& voxel_path, const std::vector<int>& fixed, const std::string& out_path) {
  const BinaryGrid s = slice_2d(read_voxels(voxel_path), fixed);
  write_file_bytes(out_path, encode_pgm(s));
  return s;
}

}  // namespace topovox
