// Closed-form Betti labels for constructed samples.
//
// The three handle families are parametrised by counts (g, h, i, j):
//   g copies of S^1 x S^2 (closed) or S^1 x B^3 (with boundary),
//   h copies of S^2 x S^1 or S^2 x B^2,
//   i copies of S^1 x (genus-j surface or handlebody).
// Labels are derived symbolically from a ConstructionDescriptor and never
// measured from voxels.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topovox/homology.hpp"

namespace topovox {

class invalid_descriptor_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Family {
  closed_sum,       // #_g(S1xS2) #_h(S2xS1) #_i(S1 x #_j T2)
  boundary_sum,     // boundary connected sum of the matching manifolds-with-boundary
  cube_complement,  // solid cube with the boundary sum (or the children) cut out
  embedded_object,  // one catalogue shape in empty space, labelled by the catalogue
  disjoint_union,   // children placed apart from one another
};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::closed_sum: return "closed_sum";
    case Family::boundary_sum: return "boundary_sum";
    case Family::cube_complement: return "cube_complement";
    case Family::embedded_object: return "embedded_object";
    case Family::disjoint_union: return "disjoint_union";
  }
  return "unknown";
}

inline Family family_from_name(std::string_view s) {
  for (Family f : {Family::closed_sum, Family::boundary_sum, Family::cube_complement, Family::embedded_object,
                   Family::disjoint_union})
    if (family_name(f) == s) return f;
  throw invalid_descriptor_error("unknown construction family '" + std::string(s) + "'");
}

struct HandleCounts {
  int g = 0;
  int h = 0;
  int i = 0;
  int j = 0;
  friend bool operator==(const HandleCounts&, const HandleCounts&) = default;
};

inline constexpr int kMaxHandleCount = 8;

inline void validate_counts(const HandleCounts& c) {
  if (c.g < 0 || c.h < 0 || c.i < 0 || c.j < 0) throw invalid_descriptor_error("handle counts must be nonnegative");
  if (c.g + c.h + c.i <= 0) throw invalid_descriptor_error("g + h + i must be positive");
  if (c.i > 0 && c.j <= 0) throw invalid_descriptor_error("j must be positive when i is positive");
}

struct ConstructionDescriptor {
  Family family = Family::embedded_object;
  HandleCounts counts;
  // disjoint_union: the parts. cube_complement: optional list of cut-outs,
  // used instead of `counts` when nonempty.
  std::vector<ConstructionDescriptor> children;
  // embedded_object: catalogue kind and its label.
  std::string object_kind;
  BettiVector object_label;
  // Provenance only; never consulted when labelling.
  nlohmann::ordered_json placement = nlohmann::ordered_json::object();
  nlohmann::ordered_json deformation_log = nlohmann::ordered_json::array();
};

inline BettiVector betti_closed_sum(const HandleCounts& c) {
  validate_counts(c);
  const std::int64_t mid = c.g + c.h + static_cast<std::int64_t>(c.i) * (2 * c.j + 1);
  BettiVector v = make_betti(1, mid, mid, 1);
  v.euler = 0;
  return v;
}

inline BettiVector betti_boundary_sum(const HandleCounts& c) {
  validate_counts(c);
  BettiVector v = make_betti(1, c.g + static_cast<std::int64_t>(c.i) * (c.j + 1),
                             c.h + static_cast<std::int64_t>(c.i) * c.j, 0);
  v.euler = 1 - c.g + c.h - c.i;
  return v;
}

inline BettiVector betti_cube_complement(const HandleCounts& c) {
  validate_counts(c);
  BettiVector v = make_betti(1, c.h + static_cast<std::int64_t>(c.i) * c.j,
                             c.g + static_cast<std::int64_t>(c.i) * (c.j + 1), 1);
  v.euler = c.g - c.h + c.i;
  return v;
}

inline BettiVector betti_disjoint_union(const std::vector<BettiVector>& children) {
  if (children.empty()) throw invalid_descriptor_error("disjoint union needs at least one child");
  BettiVector out;
  out.reduced = children.front().reduced;
  for (const auto& c : children) {
    if (c.reduced != out.reduced) throw invalid_descriptor_error("disjoint union mixes reduced and unreduced labels");
    for (std::size_t k = 0; k < 4; ++k) out.betti[k] += c.betti[k];
    out.euler += c.euler;
  }
  return out;
}

/// Solid 4-cube with several pairwise disjoint boundary-sum cut-outs.
inline BettiVector betti_cube_multi_complement(const std::vector<HandleCounts>& cutouts) {
  if (cutouts.empty()) return make_betti(1);
  std::int64_t b1 = 0, b2 = 0;
  for (const auto& c : cutouts) {
    validate_counts(c);
    b1 += c.h + static_cast<std::int64_t>(c.i) * c.j;
    b2 += c.g + static_cast<std::int64_t>(c.i) * (c.j + 1);
  }
  return make_betti(1, b1, b2, static_cast<std::int64_t>(cutouts.size()));
}

/// Label of a solid n-cube with disjoint objects cut from its interior, by
/// duality: b_k(complement) = b_{n-1-k}(objects) for k >= 1 and
/// b_0(complement) = 1 + b_{n-1}(objects). Objects must be torsion-free.
inline BettiVector betti_complement(int ndim, const std::vector<BettiVector>& objects) {
  if (ndim < 2 || ndim > kMaxDim) throw dimension_error("betti_complement: unsupported dimension");
  if (objects.empty()) return make_betti(1);
  const BettiVector x = betti_disjoint_union(objects);
  std::array<std::int64_t, 5> xb{x.betti[0], x.betti[1], x.betti[2], x.betti[3], 0};
  std::array<std::int64_t, 4> out{};
  out[0] = 1 + xb[static_cast<std::size_t>(ndim - 1)];
  for (int k = 1; k <= ndim - 1 && k < 4; ++k) out[static_cast<std::size_t>(k)] = xb[static_cast<std::size_t>(ndim - 1 - k)];
  return make_betti(out[0], out[1], out[2], out[3]);
}

inline void validate_descriptor(const ConstructionDescriptor& d, int max_count = kMaxHandleCount) {
  auto capped = [&](const HandleCounts& c) {
    validate_counts(c);
    if (c.g > max_count || c.h > max_count || c.i > max_count || c.j > max_count)
      throw invalid_descriptor_error("handle counts exceed the cap of " + std::to_string(max_count));
  };
  switch (d.family) {
    case Family::closed_sum:
    case Family::boundary_sum:
      capped(d.counts);
      if (!d.children.empty()) throw invalid_descriptor_error(std::string(family_name(d.family)) + " takes no children");
      break;
    case Family::cube_complement:
      if (d.children.empty()) capped(d.counts);
      for (const auto& c : d.children) {
        if (c.family != Family::boundary_sum && c.family != Family::embedded_object)
          throw invalid_descriptor_error("cube_complement cut-outs must be boundary sums or embedded objects");
        validate_descriptor(c, max_count);
      }
      break;
    case Family::embedded_object:
      if (d.object_kind.empty()) throw invalid_descriptor_error("embedded_object needs an object kind");
      if (!d.children.empty()) throw invalid_descriptor_error("embedded_object takes no children");
      break;
    case Family::disjoint_union:
      if (d.children.empty()) throw invalid_descriptor_error("disjoint_union needs at least one child");
      for (const auto& c : d.children) validate_descriptor(c, max_count);
      break;
  }
}

/// Symbolic label of a descriptor for an `ndim`-dimensional sample.
inline BettiVector label_for(const ConstructionDescriptor& d, int ndim) {
  validate_descriptor(d);
  switch (d.family) {
    case Family::closed_sum: return betti_closed_sum(d.counts);
    case Family::boundary_sum: return betti_boundary_sum(d.counts);
    case Family::embedded_object: return d.object_label;
    case Family::cube_complement: {
      if (d.children.empty()) return betti_cube_complement(d.counts);
      bool all_sums = ndim == 4;
      std::vector<HandleCounts> counts;
      std::vector<BettiVector> objects;
      for (const auto& c : d.children) {
        all_sums = all_sums && c.family == Family::boundary_sum;
        counts.push_back(c.counts);
        objects.push_back(label_for(c, ndim));
      }
      return all_sums ? betti_cube_multi_complement(counts) : betti_complement(ndim, objects);
    }
    case Family::disjoint_union: {
      std::vector<BettiVector> labels;
      for (const auto& c : d.children) labels.push_back(label_for(c, ndim));
      return betti_disjoint_union(labels);
    }
  }
  throw invalid_descriptor_error("unhandled family");
}

}  // namespace topovox
