// topovox: generate, transform and check topologically labelled voxel data.
//
//   topovox gen --config cfg.json [overrides]
//   topovox deform in.tvox out.tvox --iterations 600
//   topovox thicken in.tvox out.tvox --iterations 14
//   topovox verify DIR | manifest.json...
//   topovox stats DIR
//   topovox render-slice in.tvox out.pgm --fix 2=8 --fix 3=8
//
// Exit status: 0 when everything passed, 1 when a sample failed a check,
// 2 on usage, configuration or I/O errors.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topovox/topovox.hpp"

namespace fs = std::filesystem;
using namespace topovox;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct GenArgs {
  std::string config;
  std::optional<int> count, max_objects, spacing, workers, deform_iterations, thicken_iterations, dilate_iterations;
  std::optional<std::vector<int>> dims;
  std::optional<std::string> mode, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> verify_rate, bridge_probability, noise_scale;
  std::vector<std::string> weights;
};

int run_gen(const GenArgs& a) {
  DatasetConfig c = a.config.empty() ? DatasetConfig{} : load_config(a.config);
  if (a.count) c.count = *a.count;
  if (a.dims) c.dims = *a.dims;
  if (a.mode) c.mode = mode_from_name(*a.mode);
  if (a.out) c.output_dir = *a.out;
  if (a.seed) c.master_seed = *a.seed;
  if (a.workers) c.workers = *a.workers;
  if (a.max_objects) c.max_objects = *a.max_objects;
  if (a.spacing) c.spacing = *a.spacing;
  if (a.verify_rate) c.verification_rate = *a.verify_rate;
  if (a.bridge_probability) c.bridge_probability = *a.bridge_probability;
  if (a.deform_iterations) c.deform.iterations = *a.deform_iterations;
  if (a.noise_scale) c.deform.noise_scale = *a.noise_scale;
  if (a.thicken_iterations) c.morphology.thicken_iterations = *a.thicken_iterations;
  if (a.dilate_iterations) c.morphology.dilate_iterations = *a.dilate_iterations;
  for (const auto& w : a.weights) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw config_error("--weight expects kind=value, got '" + w + "'");
    c.catalog[w.substr(0, eq)] = std::stod(w.substr(eq + 1));
  }
  c.validate();
  const auto files = generate_dataset(c);
  for (const auto& f : files)
    std::cout << fs::path(f.voxel_path).filename().string() << "  " << f.label.to_string()
              << (f.engine_verified ? "  verified" : "  unverified") << "\n";
  std::cout << files.size() << " samples written to " << effective_output_dir(c) << "\n";
  return 0;
}

std::vector<std::string> manifests_in(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (!fs::is_directory(p)) {
      out.push_back(p);
      continue;
    }
    const Json index = read_json_file((fs::path(p) / "index.json").string());
    for (const auto& e : index.at("samples")) out.push_back((fs::path(p) / e.at("manifest_file").get<std::string>()).string());
  }
  return out;
}

int run_verify(const std::vector<std::string>& paths, bool as_json) {
  std::size_t failed = 0;
  Json report = Json::array();
  for (const auto& m : manifests_in(paths)) {
    const VerifyResult r = verify_manifest(m);
    failed += !r.pass;
    if (as_json) {
      Json j = to_json(r);
      j["manifest"] = m;
      report.push_back(j);
    } else {
      std::cout << (r.pass ? "PASS " : "FAIL ") << m << "  label " << r.label.to_string() << "  engine "
                << r.engine.to_string();
      if (!r.pass) std::cout << "  (" << r.message << ")";
      std::cout << "\n";
    }
  }
  if (as_json) std::cout << report.dump(2) << "\n";
  return failed ? kExitFail : 0;
}

int run_deform(const std::string& in, const std::string& out, DeformConfig cfg) {
  const BinaryGrid g = read_voxels(in);
  auto [moved, rep] = deform_volume_preserving(g, cfg);
  write_voxels(out, moved);
  Json j = to_json(rep);
  j["wall_time_s"] = rep.wall_time;
  j["displaced_boundary_fraction"] = displaced_boundary_fraction(g, moved);
  std::cout << j.dump(2) << "\n";
  return rep.betti_after == rep.betti_before && rep.volume_after == rep.volume_before ? 0 : kExitFail;
}

int run_thicken(const std::string& in, const std::string& out, int iterations, double bias_scale,
                std::uint64_t seed) {
  const BinaryGrid g = read_voxels(in);
  const BettiVector before = betti_numbers(g);
  BinaryGrid t;
  if (g.ndim() == 2 && bias_scale <= 0) {
    t = thicken_background(g, iterations);
  } else {
    std::optional<NoiseField> bias;
    if (bias_scale > 0) bias = noise_field(g.dims(), bias_scale, seed);
    t = homology_safe_dilate(g, unit_ball(g.ndim()), iterations, bias ? &*bias : nullptr, seed);
  }
  const BettiVector after = betti_numbers(t);
  write_voxels(out, t);
  std::cout << "volume " << g.count_ones() << " -> " << t.count_ones() << "\n"
            << "betti  " << before.to_string() << " -> " << after.to_string() << "\n";
  return before == after ? 0 : kExitFail;
}

std::vector<int> parse_fixed(int ndim, const std::vector<std::string>& fixes) {
  std::vector<int> fixed(static_cast<std::size_t>(ndim), -1);
  for (const auto& f : fixes) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--fix expects axis=coordinate, got '" + f + "'");
    const int axis = std::stoi(f.substr(0, eq));
    if (axis < 0 || axis >= ndim) throw index_error("--fix: axis " + std::to_string(axis) + " out of range");
    fixed[static_cast<std::size_t>(axis)] = std::stoi(f.substr(eq + 1));
    if (fixed[static_cast<std::size_t>(axis)] < 0) throw index_error("--fix: negative coordinate");
  }
  return fixed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topologically labelled synthetic voxel data"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a labelled dataset");
  g->add_option("-c,--config", gen.config, "Dataset config (JSON)")->check(CLI::ExistingFile);
  g->add_option("--count", gen.count, "Number of samples");
  g->add_option("--dims", gen.dims, "Grid dimensions, e.g. --dims 32 32 32")->expected(2, 4);
  g->add_option("--mode", gen.mode, "cutout, embed or mixed");
  g->add_option("-o,--out", gen.out, "Output directory (TOPOVOX_OUTPUT_DIR wins)");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("-j,--workers", gen.workers, "Worker threads (0: all cores)");
  g->add_option("--max-objects", gen.max_objects, "Objects per sample, at most");
  g->add_option("--spacing", gen.spacing, "Minimum gap between objects, voxels");
  g->add_option("--verify-rate", gen.verify_rate, "Share of samples checked by the homology engine");
  g->add_option("--bridge-probability", gen.bridge_probability, "Chance of joining consecutive objects");
  g->add_option("--deform-iterations", gen.deform_iterations, "Volume-preserving moves per sample");
  g->add_option("--noise-scale", gen.noise_scale, "Deformation noise scale");
  g->add_option("--thicken-iterations", gen.thicken_iterations, "Background thinning passes (2D)");
  g->add_option("--dilate-iterations", gen.dilate_iterations, "Homology-checked dilation passes");
  g->add_option("--weight", gen.weights, "Catalogue weight, kind=value (repeatable)");

  std::string d_in, d_out;
  DeformConfig dcfg;
  auto* d = app.add_subcommand("deform", "Volume-preserving deformation of one voxel file");
  d->add_option("input", d_in)->required()->check(CLI::ExistingFile);
  d->add_option("output", d_out)->required();
  d->add_option("--iterations", dcfg.iterations, "Accepted moves")->capture_default_str();
  d->add_option("--noise-scale", dcfg.noise_scale)->capture_default_str();
  d->add_option("--octaves", dcfg.noise_octaves)->capture_default_str();
  d->add_option("--seed", dcfg.seed)->capture_default_str();
  d->add_option("--safety-radius", dcfg.safety_radius)->capture_default_str();
  d->add_option("--max-move", dcfg.max_move_distance)->capture_default_str();
  d->add_option("--check-every", dcfg.global_check_every, "Full Betti check interval")->capture_default_str();
  d->add_flag("--exhaustive", dcfg.exhaustive_targets, "Try every target of a source, not just the best");

  std::string t_in, t_out;
  int t_iter = 14;
  double t_bias = 0;
  std::uint64_t t_seed = 0;
  auto* t = app.add_subcommand("thicken", "Topology-preserving thickening of one voxel file");
  t->add_option("input", t_in)->required()->check(CLI::ExistingFile);
  t->add_option("output", t_out)->required();
  t->add_option("--iterations", t_iter)->capture_default_str();
  t->add_option("--bias-scale", t_bias, "Noise-biased dilation at this scale (0: unbiased)")->capture_default_str();
  t->add_option("--seed", t_seed)->capture_default_str();

  std::vector<std::string> v_paths;
  bool v_json = false;
  auto* v = app.add_subcommand("verify", "Recompute Betti numbers and compare with manifests");
  v->add_option("paths", v_paths, "Dataset directories or manifest files")->required();
  v->add_flag("--json", v_json, "Machine-readable report");

  std::string s_dir;
  auto* s = app.add_subcommand("stats", "Summarise a generated dataset");
  s->add_option("dir", s_dir)->required()->check(CLI::ExistingDirectory);

  std::string r_in, r_out;
  std::vector<std::string> r_fix;
  auto* r = app.add_subcommand("render-slice", "Write a 2D section as a PGM image");
  r->add_option("input", r_in)->required()->check(CLI::ExistingFile);
  r->add_option("output", r_out)->required();
  r->add_option("--fix", r_fix, "axis=coordinate for every axis but two (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return run_gen(gen);
    if (*d) return run_deform(d_in, d_out, dcfg);
    if (*t) return run_thicken(t_in, t_out, t_iter, t_bias, t_seed);
    if (*v) return run_verify(v_paths, v_json);
    if (*s) {
      std::cout << dataset_stats(s_dir).dump(2) << "\n";
      return 0;
    }
    if (*r) {
      const auto grid = read_voxels(r_in);
      const BinaryGrid slice = export_slice(r_in, parse_fixed(grid.ndim(), r_fix), r_out);
      std::cout << slice.dim(0) << "x" << slice.dim(1) << " slice, betti " << betti_numbers(slice).to_string()
                << "\n";
      return 0;
    }
  } catch (const topology_drift_error& e) {
    std::cerr << "topology drift: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
