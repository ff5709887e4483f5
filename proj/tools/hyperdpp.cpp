// hyperdpp: batch front-end for kernel verification, geometry probes,
// variance sweeps, the variance/expectation bound and sampling.
//
// Exit codes: 0 pass, 1 a check or the bound failed, 2 configuration error,
// 3 numerical error.

#include "config.hpp"

#include "hyperdpp/hyperdpp.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <limits>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

namespace {

using namespace hyperdpp;
using cli::json;
using cli::RunConfig;

enum Exit { pass = 0, check_failed = 1, config_error = 2, numerical_error = 3 };

json policy_json(const NumericPolicy& p) {
  return {{"quad_rel_tol", p.quad_rel_tol},
          {"lunule_abs_tol", p.lunule_abs_tol},
          {"tail_rel_tol", p.tail_rel_tol},
          {"max_quad_panels", p.max_quad_panels},
          {"eig_tol_disk", p.eig_tol_disk},
          {"eig_tol_tree", p.eig_tol_tree},
          {"radial_nodes_per_unit", p.radial_nodes_per_unit},
          {"angular_nodes_per_unit", p.angular_nodes_per_unit},
          {"min_radial_nodes", p.min_radial_nodes},
          {"min_angular_nodes", p.min_angular_nodes},
          {"delta_step", p.delta_step},
          {"tree_profile_length", p.tree_profile_length},
          {"tree_mass_tol", p.tree_mass_tol}};
}

json profile_json(const GrowthProfile& p) {
  return {{"c", p.c}, {"alpha", p.alpha}, {"delta", p.delta}, {"r_min", p.r_min}, {"r_max", p.r_max},
          {"r0", p.r0()}};
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json containment_json(const ContainmentReport& r) {
  return {{"trials", r.trials}, {"violations", r.violations}, {"max_excess", finite_or_null(r.max_excess)}};
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

/// Writes to the file if a path is given, otherwise to the fallback stream.
class Sink {
 public:
  Sink(const std::filesystem::path& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ValidationError("cannot write " + path.string());
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

void write_json(const std::filesystem::path& path, const json& doc, std::ostream& fallback) {
  Sink sink(path, fallback);
  sink.stream() << doc.dump(2) << '\n';
}

template <class Space>
GrowthProfile make_profile(const Space& model, const RunConfig& cfg) {
  cli::ProfileSpec spec;
  if (cfg.profile) {
    spec = *cfg.profile;
  } else if constexpr (Space::is_discrete) {
    spec.delta = 0.0;
    spec.r_min = 0.0;
    spec.r_max = 10.0;
    spec.grid_step = 1.0;
  } else {
    spec.delta = std::log(1.0 + std::numbers::sqrt2);
    spec.r_min = 1.0;
    spec.r_max = 10.0;
  }
  if (spec.c) {
    if (!(*spec.c >= 1.0) || !(*spec.alpha > 0.0)) {
      throw ValidationError("config keys 'profile.c' >= 1 and 'profile.alpha' > 0 required");
    }
    return {.c = *spec.c, .alpha = *spec.alpha, .delta = spec.delta, .r_min = spec.r_min, .r_max = spec.r_max};
  }
  return fit_growth_profile(model, spec.delta, spec.r_min, spec.r_max, spec.grid_step);
}

json header_json(const std::string& subcommand, const std::string& model, const std::string& kernel,
                 const RunConfig& cfg) {
  return {{"subcommand", subcommand}, {"space", model}, {"kernel", kernel}, {"seed", cfg.seed},
          {"policy", policy_json(cfg.policy)}};
}

template <class Space>
int verify_kernel(const RadialKernel<Space>& kernel, const RunConfig& cfg) {
  const auto rep = verify_projection(kernel, cfg.verify.R_test, cfg.verify.grid, cfg.policy);
  json doc = header_json("verify-kernel", kernel.model().name(), kernel.label(), cfg);
  doc["R_test"] = cfg.verify.R_test;
  doc["size"] = rep.size;
  doc["min_eig"] = rep.min_eig;
  doc["max_eig"] = rep.max_eig;
  doc["tol"] = rep.tol;
  doc["hermitian_residual"] = rep.hermitian_residual;
  doc["reproducing_residual"] = rep.reproducing_residual;
  doc["cs_residual"] = rep.cs_residual;
  doc["reproducing_mass"] = kernel.total_mass();
  doc["koo"] = kernel.koo();
  doc["pass"] = rep.pass;
  write_json(cfg.output.json, doc, std::cout);
  return rep.pass ? pass : check_failed;
}

template <class Space>
int geometry_check(const Space& model, const RunConfig& cfg) {
  const auto& g = cfg.geometry;
  const GrowthProfile profile = make_profile(model, cfg);
  const double step = cfg.profile ? cfg.profile->grid_step : (Space::is_discrete ? 1.0 : 0.1);
  const double delta_hat = delta_estimate(model, g.n_triangles, g.sample_radius, cfg.seed, cfg.policy);
  const double growth = growth_violation(model, profile, step / g.refine);
  const auto contain = containment_check(model, profile.delta, g.containment_trials, g.containment_R, cfg.seed);

  // lunule lower bound on a grid of r >= r0 and R in the profile range
  double lunule_slack = std::numeric_limits<double>::infinity();
  double r0 = std::max(profile.r0(), 0.0);
  if constexpr (Space::is_discrete) r0 = std::ceil(r0 - 1e-12);
  const double r_step = Space::is_discrete ? 1.0 : 0.5;
  for (double R : detail::growth_grid(model, std::max(profile.r_min, 1.0), profile.r_max, 1.0)) {
    for (double r = r0; r <= 2.0 * R + 1.0; r += r_step) {
      const double lhs = lunule_volume(model, r, R, cfg.policy);
      lunule_slack = std::min(lunule_slack, lhs - lunule_lower_bound(model, profile, r, R) + cfg.policy.lunule_abs_tol);
    }
  }

  json doc = header_json("geometry-check", model.name(), "", cfg);
  doc.erase("kernel");
  doc["delta_estimate"] = delta_hat;
  doc["profile"] = profile_json(profile);
  doc["growth_violation"] = growth;
  doc["containment"] = containment_json(contain);
  doc["containment_R"] = g.containment_R;
  doc["lunule_bound_slack"] = finite_or_null(lunule_slack);
  bool ok = contain.violations == 0 && growth <= 0.0 && !(lunule_slack < 0.0) &&
            delta_hat <= profile.delta + 1e-9;
  if constexpr (Space::is_discrete) {
    if (g.exhaustive_R > 0.0) {
      const auto exhaustive = containment_exhaustive(model, profile.delta, g.exhaustive_R);
      doc["containment_exhaustive"] = containment_json(exhaustive);
      doc["exhaustive_R"] = g.exhaustive_R;
      ok = ok && exhaustive.violations == 0;
    }
  }
  doc["pass"] = ok;
  write_json(cfg.output.json, doc, std::cout);
  return ok ? pass : check_failed;
}

EmpiricalOptions empirical_options(const RunConfig& cfg) {
  EmpiricalOptions e;
  e.n_samples = cfg.empirical.n_samples;
  e.seed = cfg.seed;
  e.radii = cfg.empirical.radii;
  e.grid = cfg.empirical.grid;
  return e;
}

void report_row_errors(const std::vector<VarianceReport>& rows) {
  for (const auto& v : rows) {
    if (!v.error.empty()) std::cerr << "hyperdpp: R=" << format_double(v.R) << ": " << v.error << '\n';
  }
}

template <class Space>
int variance(const RadialKernel<Space>& kernel, const RunConfig& cfg) {
  std::vector<VarianceReport> rows(cfg.radii.size());
  const EmpiricalOptions emp = empirical_options(cfg);
  parallel_for(rows.size(), [&](std::size_t i) { rows[i] = variance_report(kernel, cfg.radii[i], emp, cfg.policy); });
  Sink sink(cfg.output.csv, std::cout);
  write_csv(sink.stream(), rows, {.with_bound = false});
  report_row_errors(rows);
  for (const auto& v : rows) {
    if (!v.error.empty()) return numerical_error;
  }
  return pass;
}

template <class Space>
int bound(const RadialKernel<Space>& kernel, const RunConfig& cfg) {
  const GrowthProfile profile = make_profile(kernel.model(), cfg);
  const BoundReport rep = theorem1_sweep(kernel, profile, cfg.radii, empirical_options(cfg), cfg.policy);
  {
    Sink sink(cfg.output.csv, std::cout);
    write_csv(sink.stream(), rep.sweep);
  }
  json doc = header_json("bound", kernel.model().name(), kernel.label(), cfg);
  doc["profile"] = profile_json(profile);
  doc["C"] = rep.constant.C;
  doc["r0"] = rep.constant.r0;
  doc["degenerate"] = rep.constant.degenerate;
  if (!kernel.certified()) doc["warning_unverified_kernel"] = true;
  json sweep = json::array();
  for (const auto& v : rep.sweep) {
    json row = {{"R", v.R}, {"ratio", v.ratio}, {"gap", v.ratio - v.C}, {"pass", v.pass}};
    if (v.variance_empirical) {
      row["variance_empirical"] = *v.variance_empirical;
      row["stderr"] = optional_json(v.stderr_empirical);
      row["mean_empirical"] = optional_json(v.mean_empirical);
      row["stderr_mean"] = optional_json(v.stderr_mean);
      row["ratio_empirical"] = *v.variance_empirical / v.expectation;
    }
    if (!v.error.empty()) row["error"] = v.error;
    sweep.push_back(row);
  }
  doc["sweep"] = sweep;
  doc["all_pass"] = rep.all_pass();
  write_json(cfg.output.json, doc, std::cerr);
  if (rep.constant.degenerate) std::cerr << "hyperdpp: warning: " << rep.constant.warning << '\n';
  if (!kernel.certified()) std::cerr << "hyperdpp: warning: " << kernel.label() << " is not a verified projection\n";
  report_row_errors(rep.sweep);
  for (const auto& v : rep.sweep) {
    if (!v.error.empty()) return numerical_error;
  }
  return rep.all_pass() ? pass : check_failed;
}

std::string point_text(const DiskPoint& p) { return format_double(p.z().real()) + "," + format_double(p.z().imag()); }
std::string point_text(const TreeVertex& v) { return v.to_string(); }

template <class Space>
int sample_points(const RadialKernel<Space>& kernel, const RunConfig& cfg) {
  const auto op = discretize(kernel, cfg.sample.R, cfg.sample.grid, cfg.policy);
  Sink sink(cfg.output.points, std::cout);
  auto& out = sink.stream();
  SampleLog log;
  for (int i = 0; i < cfg.sample.count; ++i) {
    const auto config = sample(op, split_seed(cfg.seed, static_cast<std::uint64_t>(i)), &log);
    if (i) out << '\n';
    out << "# sample " << i << '\n';
    for (const auto& p : config.points) out << point_text(p) << '\n';
  }
  if (log.reorthogonalizations) {
    std::cerr << "hyperdpp: " << log.reorthogonalizations << " extra re-orthogonalization(s) while sampling\n";
  }
  return pass;
}

template <class Space>
int run_kernel_command(const std::string& command, const RadialKernel<Space>& kernel, const RunConfig& cfg) {
  if (command == "verify-kernel") return verify_kernel(kernel, cfg);
  if (command == "variance") return variance(kernel, cfg);
  if (command == "bound") return bound(kernel, cfg);
  return sample_points(kernel, cfg);
}

int run(const std::string& command, const RunConfig& cfg) {
  if (cfg.space == "disk") {
    const PoincareDisk disk;
    if (command == "geometry-check") return geometry_check(disk, cfg);
    if (cfg.kernel.type == "bergman") return run_kernel_command(command, bergman_kernel(cfg.kernel.alpha), cfg);
    const auto table = cli::read_profile_table(cfg.kernel.table);
    if (table.empty()) throw ValidationError("profile table " + cfg.kernel.table.string() + " is empty");
    const auto kernel = custom_radial_kernel(disk, table.front().k, table, cfg.kernel.interpolation, cfg.kernel.tail);
    return run_kernel_command(command, kernel, cfg);
  }
  const RegularTree tree(cfg.q);
  if (command == "geometry-check") return geometry_check(tree, cfg);
  if (cfg.kernel.type == "tree_spectral") {
    const int halo = cfg.kernel.halo_radius > 0 ? cfg.kernel.halo_radius : cfg.policy.tree_profile_length;
    return run_kernel_command(command, tree_spectral_kernel(tree, cfg.kernel.band_lo, cfg.kernel.band_hi, halo, cfg.policy),
                              cfg);
  }
  const auto table = cli::read_profile_table(cfg.kernel.table);
  if (table.empty()) throw ValidationError("profile table " + cfg.kernel.table.string() + " is empty");
  return run_kernel_command(command, custom_radial_kernel(tree, table.front().k, table, cfg.kernel.interpolation, cfg.kernel.tail),
                            cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperdpp: determinantal point processes on hyperbolic spaces"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string csv_path, json_path, points_path;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify-kernel", "check 0 <= K <= I on a ball and report reproducing residuals (JSON)"},
      {"geometry-check", "estimate delta, fit the growth profile, check the containment lemma (JSON)"},
      {"variance", "expectation and both variance routes over the radii (CSV)"},
      {"bound", "constant C and the var/E >= C sweep (CSV + JSON summary)"},
      {"sample", "draw configurations on B_R (point lists)"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--csv", csv_path, "CSV output path (default: stdout)");
    sub->add_option("--json", json_path, "JSON output path");
    sub->add_option("--points", points_path, "sample output path (default: stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pass : config_error;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!csv_path.empty()) cfg.output.csv = csv_path;
    if (!json_path.empty()) cfg.output.json = json_path;
    if (!points_path.empty()) cfg.output.points = points_path;
    return run(command, cfg);
  } catch (const ValidationError& e) {
    std::cerr << "hyperdpp: configuration error: " << e.what() << '\n';
    return config_error;
  } catch (const DomainError& e) {
    std::cerr << "hyperdpp: configuration error: " << e.what() << '\n';
    return config_error;
  } catch (const NumericalError& e) {
    std::cerr << "hyperdpp: numerical error: " << e.what() << '\n';
    return numerical_error;
  } catch (const std::exception& e) {
    std::cerr << "hyperdpp: error: " << e.what() << '\n';
    return numerical_error;
  }
}
