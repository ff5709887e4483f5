#pragma once

// Run configuration of the hyperdpp tool: a JSON document, parsed strictly
// (unknown keys and wrong types are errors).

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

#include "hyperdpp/hyperdpp.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hyperdpp::cli {

using json = nlohmann::json;

struct KernelSpec {
  std::string type;  // bergman | tree_spectral | custom
  double alpha = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  int halo_radius = 0;  // 0: policy.tree_profile_length
  std::filesystem::path table;
  Interpolation interpolation = Interpolation::linear;
  TailRule tail = TailRule::zero;
};

struct ProfileSpec {
  double delta = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double grid_step = 0.1;
  /// explicit constants instead of a fit
  std::optional<double> c;
  std::optional<double> alpha;
};

struct EmpiricalSpec {
  std::size_t n_samples = 0;
  std::vector<double> radii;
  QuadratureGrid grid;
};

struct VerifySpec {
  double R_test = 3.0;
  QuadratureGrid grid;
};

struct GeometrySpec {
  int n_triangles = 1000;
  double sample_radius = 3.0;
  int containment_trials = 10000;
  double containment_R = 5.0;
  /// trees only: exhaustive containment check up to this radius (0: skip)
  double exhaustive_R = 4.0;
  /// refinement of the growth re-check grid
  int refine = 10;
};

struct SampleSpec {
  double R = 2.0;
  int count = 1;
  QuadratureGrid grid;
};

struct OutputSpec {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::filesystem::path points;
};

struct RunConfig {
  std::string space = "disk";  // disk | tree
  int q = 0;
  KernelSpec kernel;
  std::optional<ProfileSpec> profile;
  std::vector<double> radii;
  EmpiricalSpec empirical;
  VerifySpec verify;
  GeometrySpec geometry;
  SampleSpec sample;
  NumericPolicy policy;
  OutputSpec output;
  std::uint64_t seed = 0;
};

namespace detail {

/// A JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  std::optional<T> get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(where(key) + " has the wrong type");
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    auto v = get<T>(key);
    return v ? *v : fallback;
  }

  template <class T>
  T require(const std::string& key) {
    auto v = get<T>(key);
    if (!v) throw ValidationError(where(key) + " is required");
    return *v;
  }

  std::optional<Section> section(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    std::vector<std::string> unknown;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) unknown.push_back(it.key());
    }
    if (!unknown.empty()) {
      std::string msg = "unknown key(s) in " + (path_.empty() ? std::string("config") : path_) + ":";
      for (const auto& k : unknown) msg += " " + k;
      throw ValidationError(msg);
    }
  }

  std::string where(const std::string& key = {}) const {
    std::string p = path_;
    if (!key.empty()) p = p.empty() ? key : p + "." + key;
    return "config key '" + (p.empty() ? std::string("<root>") : p) + "'";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_grid(Section& s, QuadratureGrid& grid) {
  grid.radial_nodes = s.get_or<int>("radial_nodes", grid.radial_nodes);
  grid.angular_nodes = s.get_or<int>("angular_nodes", grid.angular_nodes);
  if (grid.radial_nodes < 0 || grid.angular_nodes < 0) {
    throw ValidationError(s.where() + ": node counts must be non-negative");
  }
}

inline void read_policy(Section& s, NumericPolicy& p) {
  p.quad_rel_tol = s.get_or("quad_rel_tol", p.quad_rel_tol);
  p.lunule_abs_tol = s.get_or("lunule_abs_tol", p.lunule_abs_tol);
  p.tail_rel_tol = s.get_or("tail_rel_tol", p.tail_rel_tol);
  p.max_quad_panels = s.get_or("max_quad_panels", p.max_quad_panels);
  p.eig_tol_disk = s.get_or("eig_tol_disk", p.eig_tol_disk);
  p.eig_tol_tree = s.get_or("eig_tol_tree", p.eig_tol_tree);
  p.radial_nodes_per_unit = s.get_or("radial_nodes_per_unit", p.radial_nodes_per_unit);
  p.angular_nodes_per_unit = s.get_or("angular_nodes_per_unit", p.angular_nodes_per_unit);
  p.min_radial_nodes = s.get_or("min_radial_nodes", p.min_radial_nodes);
  p.min_angular_nodes = s.get_or("min_angular_nodes", p.min_angular_nodes);
  p.delta_step = s.get_or("delta_step", p.delta_step);
  p.tree_profile_length = s.get_or("tree_profile_length", p.tree_profile_length);
  p.tree_mass_tol = s.get_or("tree_mass_tol", p.tree_mass_tol);
  s.finish();
  if (!(p.quad_rel_tol > 0.0) || !(p.lunule_abs_tol > 0.0) || !(p.tail_rel_tol > 0.0) ||
      !(p.eig_tol_disk >= 0.0) || !(p.eig_tol_tree >= 0.0) || !(p.delta_step > 0.0) ||
      !(p.radial_nodes_per_unit > 0.0) || !(p.angular_nodes_per_unit > 0.0) || p.min_radial_nodes < 1 ||
      p.min_angular_nodes < 1 || p.tree_profile_length < 1 || !(p.tree_mass_tol > 0.0) ||
      p.max_quad_panels < 1) {
    throw ValidationError("config key 'policy': every tolerance and resolution must be positive");
  }
}

}  // namespace detail

/// Parses and validates a configuration document. Relative paths are taken
/// relative to base_dir.
inline RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir = {}) {
  using detail::Section;
  RunConfig cfg;
  Section root(doc, "");

  {
    auto space = root.section("space");
    if (!space) throw ValidationError("config key 'space' is required");
    cfg.space = space->require<std::string>("kind");
    if (cfg.space == "tree") {
      cfg.q = space->require<int>("q");
      if (cfg.q < 3) throw ValidationError("config key 'space.q' must be >= 3");
    } else if (cfg.space != "disk") {
      throw ValidationError("config key 'space.kind' must be 'disk' or 'tree'");
    }
    space->finish();
  }

  {
    auto kernel = root.section("kernel");
    if (!kernel) throw ValidationError("config key 'kernel' is required");
    auto& k = cfg.kernel;
    k.type = kernel->require<std::string>("type");
    if (k.type == "bergman") {
      if (cfg.space != "disk") throw ValidationError("a bergman kernel needs space.kind = 'disk'");
      k.alpha = kernel->get_or("alpha", 0.0);
      if (!(k.alpha >= 0.0)) throw ValidationError("config key 'kernel.alpha' must be >= 0");
    } else if (k.type == "tree_spectral") {
      if (cfg.space != "tree") throw ValidationError("a tree_spectral kernel needs space.kind = 'tree'");
      if (auto q = kernel->get<int>("q"); q && *q != cfg.q) {
        throw ValidationError("config key 'kernel.q' differs from space.q");
      }
      const auto band = kernel->require<std::vector<double>>("band");
      if (band.size() != 2 || !(band[0] <= band[1])) {
        throw ValidationError("config key 'kernel.band' must be [a, b] with a <= b");
      }
      k.band_lo = band[0];
      k.band_hi = band[1];
      k.halo_radius = kernel->get_or("halo_radius", 0);
      if (k.halo_radius < 0) throw ValidationError("config key 'kernel.halo_radius' must be >= 0");
    } else if (k.type == "custom") {
      k.table = kernel->require<std::string>("table");
      if (k.table.is_relative()) k.table = base_dir / k.table;
      if (!std::filesystem::exists(k.table)) {
        throw ValidationError("config key 'kernel.table': file " + k.table.string() + " does not exist");
      }
      const auto interp = kernel->get_or<std::string>("interpolation", "linear");
      if (interp == "linear") k.interpolation = Interpolation::linear;
      else if (interp == "log_linear") k.interpolation = Interpolation::log_linear;
      else throw ValidationError("config key 'kernel.interpolation' must be 'linear' or 'log_linear'");
      const auto tail = kernel->get_or<std::string>("tail", "zero");
      if (tail == "zero") k.tail = TailRule::zero;
      else if (tail == "exponential") k.tail = TailRule::exponential;
      else throw ValidationError("config key 'kernel.tail' must be 'zero' or 'exponential'");
    } else {
      throw ValidationError("config key 'kernel.type' must be 'bergman', 'tree_spectral' or 'custom'");
    }
    kernel->finish();
  }

  if (auto prof = root.section("profile")) {
    ProfileSpec p;
    p.delta = prof->require<double>("delta");
    p.r_min = prof->require<double>("r_min");
    p.r_max = prof->require<double>("r_max");
    p.grid_step = prof->get_or("grid_step", p.grid_step);
    p.c = prof->get<double>("c");
    p.alpha = prof->get<double>("alpha");
    prof->finish();
    if (p.c.has_value() != p.alpha.has_value()) {
      throw ValidationError("config keys 'profile.c' and 'profile.alpha' go together");
    }
    if (p.delta < 0.0) throw ValidationError("config key 'profile.delta' must be >= 0");
    if (!(p.grid_step > 0.0)) throw ValidationError("config key 'profile.grid_step' must be positive");
    if (!(p.r_min < p.r_max)) throw ValidationError("config keys 'profile.r_min' < 'profile.r_max' required");
    cfg.profile = p;
  }

  cfg.radii = root.get_or<std::vector<double>>("radii", {});
  for (double R : cfg.radii) {
    if (!(R >= 0.0)) throw ValidationError("config key 'radii' must hold non-negative radii");
  }
  cfg.seed = root.get_or<std::uint64_t>("seed", 0);

  if (auto emp = root.section("empirical")) {
    const auto n = emp->get_or<std::int64_t>("n_samples", 0);
    if (n < 0) throw ValidationError("config key 'empirical.n_samples' must be >= 0");
    cfg.empirical.n_samples = static_cast<std::size_t>(n);
    cfg.empirical.radii = emp->get_or<std::vector<double>>("radii", {});
    detail::read_grid(*emp, cfg.empirical.grid);
    emp->finish();
  }
  if (auto ver = root.section("verify")) {
    cfg.verify.R_test = ver->get_or("R_test", cfg.verify.R_test);
    detail::read_grid(*ver, cfg.verify.grid);
    ver->finish();
  }
  if (auto geo = root.section("geometry")) {
    auto& g = cfg.geometry;
    g.n_triangles = geo->get_or("n_triangles", g.n_triangles);
    g.sample_radius = geo->get_or("sample_radius", g.sample_radius);
    g.containment_trials = geo->get_or("containment_trials", g.containment_trials);
    g.containment_R = geo->get_or("containment_R", g.containment_R);
    g.exhaustive_R = geo->get_or("exhaustive_R", g.exhaustive_R);
    g.refine = geo->get_or("refine", g.refine);
    geo->finish();
    if (g.n_triangles < 1 || g.containment_trials < 1 || g.refine < 1 || !(g.sample_radius > 0.0) ||
        !(g.containment_R > 0.0) || g.exhaustive_R < 0.0) {
      throw ValidationError("config key 'geometry': counts and radii must be positive");
    }
  }
  if (auto smp = root.section("sample")) {
    cfg.sample.R = smp->get_or("R", cfg.sample.R);
    cfg.sample.count = smp->get_or("count", cfg.sample.count);
    detail::read_grid(*smp, cfg.sample.grid);
    smp->finish();
    if (!(cfg.sample.R > 0.0) || cfg.sample.count < 1) {
      throw ValidationError("config key 'sample': R and count must be positive");
    }
  }
  if (auto pol = root.section("policy")) detail::read_policy(*pol, cfg.policy);
  if (auto out = root.section("output")) {
    auto path = [&](const char* key) {
      std::filesystem::path p = out->get_or<std::string>(key, "");
      if (!p.empty() && p.is_relative()) p = base_dir / p;
      return p;
    };
    cfg.output.csv = path("csv");
    cfg.output.json = path("json");
    cfg.output.points = path("points");
    out->finish();
  }
  root.finish();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file " + file.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, file.parent_path());
}

/// Reads a profile table: one "r,k" pair per line; '#' starts a comment and
/// a non-numeric first data line is taken as a header.
inline std::vector<ProfileEntry> read_profile_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open profile table " + file.string());
  std::vector<ProfileEntry> table;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    ProfileEntry e;
    if (!(fields >> e.r >> e.k)) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ValidationError("profile table " + file.string() + ": cannot read line " + std::to_string(lineno));
    }
    header_allowed = false;
    table.push_back(e);
  }
  return table;
}

}  // namespace hyperdpp::cli
