// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass.

#include "hyperdpp/hyperdpp.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperdpp;

namespace {

namespace fs = std::filesystem;

const double ln_silver = std::log(1.0 + std::numbers::sqrt2);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

RadialKernel<RegularTree> tree_fixture() { return tree_spectral_kernel(RegularTree(3), -1.0, 1.0); }
GrowthProfile disk_profile() { return fit_growth_profile(PoincareDisk{}, ln_silver, 1.0, 10.0, 0.1); }
GrowthProfile tree_profile() { return fit_growth_profile(RegularTree(3), 0.0, 0.0, 10.0, 1.0); }

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

// 1. 0 <= K <= I on a ball
void kernel_legality(Outcome& o) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto op = build_operator(bergman_kernel(alpha), 3.0);
    lo = std::min(lo, op.min_eigenvalue());
    hi = std::max(hi, op.max_eigenvalue());
  }
  o.require(lo >= -1e-6 && hi <= 1.0 + 1e-6, "Bergman eigenvalues within [-1e-6, 1 + 1e-6]");
  const auto tree = build_operator(tree_fixture(), 5.0);
  o.require(tree.min_eigenvalue() >= 0.0 && tree.max_eigenvalue() <= 1.0, "tree eigenvalues within [0, 1]");
  o.detail << "Bergman alpha 0,1,2 on B_3: [" << fmt(lo) << ", " << fmt(hi) << "]; tree fixture on B_5 ("
           << tree.size() << " vertices): [" << fmt(tree.min_eigenvalue()) << ", " << fmt(tree.max_eigenvalue())
           << "]";
}

// 2. int k^2 sigma = k(0)
void reproducing_mass(Outcome& o) {
  double worst = 0.0;
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto K = bergman_kernel(alpha);
    auto f = [&](double r) { return K.modulus(r) * K.modulus(r) * sphere_area(PoincareDisk{}, r); };
    std::vector<double> breaks;
    for (double b = 1.0; b < 80.0; b += 1.0) breaks.push_back(b);
    const double mass = integrate_split(f, 0.0, 80.0, breaks, 1e-12);
    const double exact = (alpha + 1.0) / (4.0 * std::numbers::pi);
    worst = std::max(worst, std::abs(mass / exact - 1.0));
  }
  o.require(worst <= 1e-6, "Bergman relative error <= 1e-6");
  const auto T = tree_fixture();
  std::vector<double> terms;
  for (int r = 0; r <= 2048; ++r) terms.push_back(T.coefficient(r) * T.coefficient(r));
  const double tree_err = std::abs(pairwise_sum(terms) / T.koo() - 1.0);
  o.require(tree_err <= 1e-3, "tree relative error <= 1e-3");
  o.detail << "Bergman worst relative error " << fmt(worst) << "; tree fixture " << fmt(tree_err);
}

// 3. E = koo lambda(B_R) against a 2D trace quadrature
void expectation_identity(Outcome& o) {
  const auto K = bergman_kernel(0.0);
  double worst = 0.0;
  for (double R : {1.0, 2.0, 3.0}) {
    const double rho_max = std::tanh(0.5 * R);
    const int n_rho = 20000, n_theta = 8;
    std::vector<double> rows(n_rho);
    for (int i = 0; i < n_rho; ++i) {
      const double rho = (i + 0.5) * rho_max / n_rho;
      double row = 0.0;
      for (int j = 0; j < n_theta; ++j) {
        const DiskPoint x(std::polar(rho, 2.0 * std::numbers::pi * (j + 0.5) / n_theta));
        row += K(x, x).real();
      }
      rows[static_cast<std::size_t>(i)] = row * 4.0 * rho / std::pow(1.0 - rho * rho, 2);
    }
    const double trace = pairwise_sum(rows) * (rho_max / n_rho) * (2.0 * std::numbers::pi / n_theta);
    worst = std::max(worst, std::abs(trace / expectation(K, R) - 1.0));
  }
  o.require(worst <= 1e-5, "relative error <= 1e-5");
  const double e2 = expectation(K, 2.0);
  o.require(std::abs(e2 - std::pow(std::sinh(1.0), 2)) <= 1e-12 && std::abs(e2 - 1.38110) < 5e-6,
            "E(B_2) = sinh^2(1)");
  o.detail << "worst relative error on R = 1,2,3: " << fmt(worst) << "; E(B_2) = " << e2;
}

// 4. lunule route = direct route
void variance_routes(Outcome& o) {
  const auto K = bergman_kernel(0.0);
  double disk_worst = 0.0;
  for (int R = 1; R <= 6; ++R) {
    const double vl = variance_lunule(K, R), vd = variance_direct(K, R);
    disk_worst = std::max(disk_worst, std::abs(vl - vd) / vd);
  }
  const auto T = tree_fixture();
  double tree_worst = 0.0;
  for (int R = 2; R <= 8; ++R) tree_worst = std::max(tree_worst, std::abs(variance_lunule(T, R) - variance_direct(T, R)));
  o.require(disk_worst <= 5e-3, "disk relative difference <= 0.5%");
  o.require(tree_worst <= 1e-10, "tree absolute difference <= 1e-10");
  o.detail << "disk R = 1..6 worst relative difference " << fmt(disk_worst) << "; tree R = 2..8 worst absolute "
           << fmt(tree_worst);
}

// 5. 0 <= var <= E on the sweeps
void variance_domination(Outcome& o) {
  int points = 0;
  auto check = [&](double E, double v) {
    ++points;
    o.require(v >= 0.0 && v <= E, "0 <= var <= E");
  };
  const auto K = bergman_kernel(0.0);
  for (int R = 1; R <= 8; ++R) {
    const double E = expectation(K, R);
    check(E, variance_lunule(K, R));
    check(E, variance_direct(K, R));
  }
  const auto T = tree_fixture();
  for (int R = 2; R <= 8; ++R) {
    const double E = expectation(T, R);
    check(E, variance_lunule(T, R));
    check(E, variance_direct(T, R));
  }
  o.detail << points << " sweep points, both routes";
}

// 6. containment lemma
void containment(Outcome& o) {
  const auto disk = containment_check(PoincareDisk{}, ln_silver, 100000, 5.0, 6);
  const auto tree = containment_exhaustive(RegularTree(3), 0.0, 4.0);
  o.require(disk.trials == 100000 && disk.violations == 0, "no disk violations in 1e5 triples");
  o.require(tree.violations == 0, "no exhaustive tree violations");
  o.detail << "disk: " << disk.trials << " triples, " << disk.violations << " violations, max excess "
           << fmt(disk.max_excess) << "; tree q=3 R=4: " << tree.trials << " triples, " << tree.violations
           << " violations";
}

// 7. growth certificate
void growth_certificate(Outcome& o) {
  const auto d = disk_profile();
  const auto t = tree_profile();
  const double dv = growth_violation(PoincareDisk{}, d, 0.01);
  const double tv = growth_violation(RegularTree(3), t, 0.1);
  o.require(dv <= 0.0, "disk profile holds on the 10x grid");
  o.require(tv <= 0.0, "tree profile holds on the 10x grid");
  GrowthProfile exact = t;
  exact.c = 3.03;
  exact.alpha = std::log(2.0);
  o.require(growth_violation(RegularTree(3), exact, 1.0) <= 0.0 && std::abs(t.c - 3.03) < 1e-12 &&
                t.alpha == std::log(2.0),
            "tree admits (3.03, ln 2)");
  o.detail << "disk c = " << d.c << " worst slack " << fmt(dv) << "; tree c = " << t.c << " alpha = " << t.alpha
           << " worst slack " << fmt(tv);
}

// 8. lunule lower bound
void lunule_bound(Outcome& o) {
  const NumericPolicy policy;
  double worst = std::numeric_limits<double>::infinity();
  int points = 0;
  const auto d = disk_profile();
  for (double R = 1.0; R <= 10.0; R += 0.5) {
    for (double r = d.r0(); r <= 2.0 * R + 2.0; r += 0.25) {
      worst = std::min(worst, lunule_volume(PoincareDisk{}, r, R, policy) - lunule_lower_bound(PoincareDisk{}, d, r, R));
      ++points;
    }
  }
  const auto t = tree_profile();
  const RegularTree tree(3);
  for (int R = 1; R <= 10; ++R) {
    for (int r = static_cast<int>(std::ceil(t.r0())); r <= 2 * R + 2; ++r) {
      worst = std::min(worst, lunule_volume(tree, r, R) - lunule_lower_bound(tree, t, r, R));
      ++points;
    }
  }
  o.require(worst >= -1e-8, "lunule volume >= bound - 1e-8");
  o.detail << points << " (r, R) points with r >= r0, smallest slack " << fmt(worst);
}

// 9. the bound var / E >= C
void headline(Outcome& o) {
  EmpiricalOptions e;
  e.n_samples = 20000;
  e.seed = 20240601;
  e.radii = {2.0};
  const auto disk = theorem1_sweep(bergman_kernel(0.0), disk_profile(), {1, 2, 3, 4, 5, 6, 7, 8}, e);
  e.seed = 7;
  const auto tree = theorem1_sweep(tree_fixture(), tree_profile(), {2, 3, 4, 5, 6, 7, 8}, e);
  for (const auto* rep : {&disk, &tree}) {
    const char* name = rep == &disk ? "disk" : "tree";
    o.require(rep->constant.C > 0.0, std::string(name) + " C > 0");
    o.require(rep->all_pass(), std::string(name) + " ratio >= C at every R");
    double min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& v : rep->sweep) {
      o.require(v.error.empty(), std::string(name) + " R=" + fmt(v.R) + ": " + v.error);
      min_ratio = std::min(min_ratio, v.ratio);
      if (v.variance_empirical) {
        const double z = (*v.variance_empirical - v.variance_lunule) / *v.stderr_empirical;
        o.require(std::abs(z) <= 4.0, std::string(name) + " empirical variance within 4 standard errors");
        o.require(*v.variance_empirical / v.expectation >= rep->constant.C,
                  std::string(name) + " empirical ratio >= C");
        o.detail << name << " R=2 empirical variance " << fmt(*v.variance_empirical) << " +- "
                 << fmt(*v.stderr_empirical) << " vs " << fmt(v.variance_lunule) << " (z = " << fmt(z) << "); ";
      }
    }
    o.detail << name << " C = " << fmt(rep->constant.C) << ", min ratio " << fmt(min_ratio) << "; ";
  }
}

// 10. byte-identical CSV across thread counts
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reproducibility(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / "hyperdpp_acceptance";
  fs::create_directories(dir);
  for (const char* config : {"disk_bergman.json", "tree_spectral.json"}) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4"}) {
      const fs::path csv = dir / (std::string(config) + "." + threads + ".csv");
      const std::string cmd = std::string("HYPERDPP_THREADS=") + threads + " \"" + HYPERDPP_TOOL + "\" bound \"" +
                              HYPERDPP_CONFIGS + "/" + config + "\" --seed 11 --csv \"" + csv.string() +
                              "\" --json \"" + (dir / "summary.json").string() + "\"";
      const int status = std::system(cmd.c_str());
      o.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, std::string(config) + " bound exits 0");
      outputs.push_back(slurp(csv));
    }
    o.require(!outputs[0].empty() && outputs[0] == outputs[1], std::string(config) + " CSV identical");
    o.detail << config << ": " << outputs[0].size() << " bytes, " << (outputs[0] == outputs[1] ? "identical" : "DIFFERENT")
             << "; ";
  }
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"kernel legality", kernel_legality},
      {"reproducing mass", reproducing_mass},
      {"expectation identity", expectation_identity},
      {"variance route equality", variance_routes},
      {"variance domination", variance_domination},
      {"containment lemma", containment},
      {"growth certificate", growth_certificate},
      {"lunule lower bound", lunule_bound},
      {"variance / expectation >= C", headline},
      {"reproducibility across thread counts", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail.str()
              << " (" << fmt(seconds) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
