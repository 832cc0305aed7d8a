// Volume-preserving deformation: boundary voxels move from low-noise to
// high-noise positions, one locally safe pair of flips at a time, with a
// full Betti recomputation every few moves.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "topovox/grid.hpp"
#include "topovox/homology.hpp"
#include "topovox/noise.hpp"

namespace topovox {

class topology_drift_error : public std::runtime_error {
 public:
  topology_drift_error(const std::string& what, BinaryGrid last_verified, std::size_t verified_at)
      : std::runtime_error(what), last_verified_(std::move(last_verified)), verified_at_(verified_at) {}

  const BinaryGrid& last_verified() const { return last_verified_; }
  std::size_t verified_at() const { return verified_at_; }

 private:
  BinaryGrid last_verified_;
  std::size_t verified_at_;
};

struct Move {
  Coord from;
  Coord to;
  friend bool operator==(const Move&, const Move&) = default;
};

struct DeformConfig {
  int iterations = 600;
  double noise_scale = 8;
  int noise_octaves = 1;
  std::uint64_t seed = 0;  // noise seed
  int safety_radius = 1;
  int max_move_distance = 1;
  int global_check_every = 100;
  // Try every higher-noise target of a source, best first, instead of only
  // the best one.
  bool exhaustive_targets = false;
  // Optional extra veto on a move, evaluated before the safety checks.
  std::function<bool(const BinaryGrid&, const Move&)> accept;

  void validate() const {
    if (iterations < 0) throw std::invalid_argument("deform: iterations must be nonnegative");
    if (!(noise_scale > 0)) throw std::invalid_argument("deform: noise scale must be positive");
    if (noise_octaves < 1) throw std::invalid_argument("deform: octaves must be positive");
    if (safety_radius < 1) throw std::invalid_argument("deform: safety radius must be positive");
    if (max_move_distance < 1) throw std::invalid_argument("deform: move distance must be positive");
    if (global_check_every < 1) throw std::invalid_argument("deform: check interval must be positive");
  }
};

struct DeformReport {
  std::size_t accepted_flips = 0;
  std::size_t rejected_removals = 0;
  std::size_t rejected_placements = 0;
  std::size_t global_checks = 0;
  std::size_t volume_before = 0;
  std::size_t volume_after = 0;
  BettiVector betti_before;
  BettiVector betti_after;
  double wall_time = 0;
  bool stagnated = false;

  // Everything except timing.
  bool same_outcome(const DeformReport& o) const {
    return accepted_flips == o.accepted_flips && rejected_removals == o.rejected_removals &&
           rejected_placements == o.rejected_placements && global_checks == o.global_checks &&
           volume_before == o.volume_before && volume_after == o.volume_after && betti_before == o.betti_before &&
           betti_after == o.betti_after && stagnated == o.stagnated;
  }
};

namespace detail {

inline bool is_face_boundary(const BinaryGrid& g, std::size_t flat, const std::vector<Coord>& face) {
  if (!g.get(flat)) return false;
  const Coord c = g.coord_of(flat);
  for (const auto& o : face)
    if (!g.at(c + o)) return true;
  return false;
}

/// Empty voxels within Chebyshev distance `d` of `c` whose noise beats
/// `floor`, highest noise first (then storage order).
inline std::vector<std::size_t> move_targets(const BinaryGrid& g, const NoiseField& noise, const Coord& c, int d,
                                             double floor) {
  std::vector<std::size_t> out;
  const int n = g.ndim();
  std::vector<int> box(static_cast<std::size_t>(n), 2 * d + 1);
  for_each_voxel(box, [&](const Coord& o, std::size_t) {
    Coord t = c;
    for (int a = 0; a < n; ++a) t[a] += o[a] - d;
    if (!g.in_range(t)) return;
    const std::size_t f = g.flat_index(t);
    if (!g.get(f) && noise.values[f] > floor) out.push_back(f);
  });
  std::stable_sort(out.begin(), out.end(),
                   [&](std::size_t x, std::size_t y) { return noise.values[x] > noise.values[y]; });
  return out;
}

struct SourceOutcome {
  std::optional<Move> move;
  std::size_t rejected_removals = 0;
  std::size_t rejected_placements = 0;
};

inline SourceOutcome try_source(const BinaryGrid& g, const NoiseField& noise, const DeformConfig& cfg,
                                std::size_t src) {
  SourceOutcome out;
  const Coord from = g.coord_of(src);
  auto targets = move_targets(g, noise, from, cfg.max_move_distance, noise.values[src]);
  if (targets.empty()) return out;
  if (!cfg.exhaustive_targets) targets.resize(1);
  bool removal_checked = false;
  BinaryGrid without;
  for (std::size_t t : targets) {
    const Move m{from, g.coord_of(t)};
    if (cfg.accept && !cfg.accept(g, m)) continue;
    if (!removal_checked) {
      if (!is_local_flip_safe(g, from, false, cfg.safety_radius)) {
        ++out.rejected_removals;
        return out;
      }
      removal_checked = true;
      without = g;
      without.set(src, false);
    }
    if (is_local_flip_safe(without, m.to, true, cfg.safety_radius)) {
      out.move = m;
      return out;
    }
    ++out.rejected_placements;
  }
  return out;
}

inline std::vector<std::size_t> sources_by_noise(const BinaryGrid& g, const NoiseField& noise) {
  const auto face = neighbor_offsets(g.ndim(), Adjacency::face);
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < g.size(); ++f)
    if (is_face_boundary(g, f, face)) out.push_back(f);
  std::stable_sort(out.begin(), out.end(),
                   [&](std::size_t x, std::size_t y) { return noise.values[x] < noise.values[y]; });
  return out;
}

}  // namespace detail

/// The next move under the selection rule: lowest-noise boundary voxel first
/// (ties in storage order, which is lexicographic), moved to its highest-noise
/// empty voxel within reach, provided both flips pass the local check.
inline std::optional<Move> select_move(const BinaryGrid& g, const NoiseField& noise, const DeformConfig& cfg) {
  if (noise.values.size() != g.size()) throw dimension_error("select_move: noise field has wrong size");
  for (std::size_t src : detail::sources_by_noise(g, noise)) {
    auto r = detail::try_source(g, noise, cfg, src);
    if (r.move) return r.move;
  }
  return std::nullopt;
}

/// Applies `cfg.iterations` accepted moves (fewer if no move is left).
/// Throws topology_drift_error if a periodic full check disagrees with the
/// starting Betti numbers; the error carries the last verified grid.
inline std::pair<BinaryGrid, DeformReport> deform_volume_preserving(const BinaryGrid& input, const DeformConfig& cfg,
                                                                    const NoiseField* noise_override = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseField owned = noise_override ? NoiseField{} : noise_field(input.dims(), cfg.noise_scale, cfg.seed,
                                                                        cfg.noise_octaves);
  const NoiseField& noise = noise_override ? *noise_override : owned;
  if (noise.values.size() != input.size()) throw dimension_error("deform: noise field has wrong size");

  BinaryGrid g = input;
  DeformReport rep;
  rep.volume_before = g.count_ones();
  rep.betti_before = betti_numbers(g);
  BinaryGrid verified = g;
  std::size_t verified_at = 0;

  const int n = g.ndim();
  const auto face = neighbor_offsets(n, Adjacency::face);
  using Key = std::pair<double, std::size_t>;
  std::set<Key> boundary;
  for (std::size_t f = 0; f < g.size(); ++f)
    if (detail::is_face_boundary(g, f, face)) boundary.insert({noise.values[f], f});
  // stuck[f]: source f found no legal move and nothing near it changed since.
  std::vector<std::uint8_t> stuck(g.size(), 0);
  const int reach = cfg.max_move_distance + cfg.safety_radius;
  std::vector<Coord> near;
  {
    std::vector<int> box(static_cast<std::size_t>(n), 2 * reach + 1);
    for_each_voxel(box, [&](const Coord& o, std::size_t) {
      Coord d = o;
      for (int a = 0; a < n; ++a) d[a] -= reach;
      near.push_back(d);
    });
  }

  auto refresh = [&](const Coord& c) {
    for (const auto& d : near) {
      const Coord q = c + d;
      if (g.in_range(q)) stuck[g.flat_index(q)] = 0;
    }
    auto update = [&](const Coord& q) {
      if (!g.in_range(q)) return;
      const std::size_t f = g.flat_index(q);
      const Key k{noise.values[f], f};
      if (detail::is_face_boundary(g, f, face))
        boundary.insert(k);
      else
        boundary.erase(k);
    };
    update(c);
    for (const auto& o : face) update(c + o);
  };

  auto full_check = [&]() {
    ++rep.global_checks;
    const BettiVector now = betti_numbers(g);
    if (now != rep.betti_before)
      throw topology_drift_error("deform: Betti numbers drifted from " + rep.betti_before.to_string() + " to " +
                                     now.to_string() + " after " + std::to_string(rep.accepted_flips) + " moves",
                                 verified, verified_at);
    verified = g;
    verified_at = rep.accepted_flips;
  };

  while (rep.accepted_flips < static_cast<std::size_t>(cfg.iterations)) {
    std::optional<Move> chosen;
    for (const auto& [val, src] : boundary) {
      if (stuck[src]) continue;
      auto r = detail::try_source(g, noise, cfg, src);
      rep.rejected_removals += r.rejected_removals;
      rep.rejected_placements += r.rejected_placements;
      if (r.move) {
        chosen = r.move;
        break;
      }
      if (!cfg.accept) stuck[src] = 1;  // a custom veto may depend on distant voxels
    }
    if (!chosen) {
      rep.stagnated = true;
      break;
    }
    g.set(chosen->from, false);
    g.set(chosen->to, true);
    refresh(chosen->from);
    refresh(chosen->to);
    ++rep.accepted_flips;
    if (rep.accepted_flips % static_cast<std::size_t>(cfg.global_check_every) == 0) full_check();
  }
  if (verified_at != rep.accepted_flips || rep.global_checks == 0) full_check();

  rep.volume_after = g.count_ones();
  rep.betti_after = betti_numbers(g);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(g), rep};
}

/// Share of the voxels set in `before` that are clear in `after`, counted
/// over `before`'s face-boundary voxels.
inline double displaced_boundary_fraction(const BinaryGrid& before, const BinaryGrid& after) {
  const auto face = neighbor_offsets(before.ndim(), Adjacency::face);
  std::size_t total = 0, moved = 0;
  for (std::size_t f = 0; f < before.size(); ++f) {
    if (!detail::is_face_boundary(before, f, face)) continue;
    ++total;
    moved += !after.get(f);
  }
  return total ? static_cast<double>(moved) / static_cast<double>(total) : 0.0;
}

}  // namespace topovox
