// Full-size acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <fmt/core.h>

#include "dklab/colehopf.hpp"
#include "dklab/config.hpp"
#include "dklab/experiment.hpp"

using namespace dklab;
namespace fs = std::filesystem;

namespace {

const fs::path kOut = fs::temp_directory_path() / "dk-lab-acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;
};

unsigned worker_count() { return std::max(2u, std::thread::hardware_concurrency()); }

// Runs every section; a criterion passes when every report of every section passes.
Outcome run_sections(const std::string& text, unsigned threads, std::ostream& log) {
  Outcome o;
  double worst_z = 0.0;
  std::size_t n = 0;
  for (const auto& cfg : parse_config_file(text)) {
    const auto result = run_experiment(cfg, {threads, kOut}, log);
    for (const auto& r : result.reports) {
      ++n;
      if (!r.pass) {
        o.pass = false;
        o.detail += fmt::format(" [{} {} t={} est={:.6g} ref={:.6g} z={:.3g}]", cfg.label, r.test_name, r.time,
                                r.estimate.mean, r.reference, r.z_score);
      }
      if (std::isfinite(r.z_score)) worst_z = std::max(worst_z, std::abs(r.z_score));
    }
  }
  o.detail = fmt::format("{} reports, max |z| = {:.2f}", n, worst_z) + o.detail;
  return o;
}

const char* kLaplace = R"(replicas = 100000
[ld_1d_gauss_one_atom]
experiment = laplace_duality, alpha = 1, dimension = 1, t = 1, phi = gaussian(0,1,1), nu = atoms[0.3]
[ld_1d_compact_alpha2]
experiment = laplace_duality, alpha = 2, dimension = 1, t = 0.5, phi = compact(0,1.5,2), nu = atoms[-1,-0.2,0.4,1.1]
[ld_2d_gauss]
experiment = laplace_duality, alpha = 1, dimension = 2, t = 0.5, phi = gaussian((0,0),0.8,1.5), nu = atoms[(0,0),(0.5,-0.5),(-1,0.2)]
[ld_2d_compact_ten_atoms]
experiment = laplace_duality, alpha = 2, dimension = 2, t = 1, phi = compact((0.2,0),1.5,1), nu = atoms[(0,0),(0.5,0.5),(-0.5,0.3),(1,-1),(0.1,0.2),(0,1),(-1,0),(0.3,-0.4),(0.8,0.1),(-0.2,-0.7)]
[ld_1d_gauss_alpha2]
experiment = laplace_duality, alpha = 2, dimension = 1, t = 1, phi = gaussian(0.5,0.7,3), nu = atoms[-0.5,0,0.5,1,2,2.5]
)";

const char* kMartingale = R"(replicas = 10000
[mg_1d_gauss]
experiment = martingale, t = 1, phi = gaussian(0,1,1), nu = atoms[0]
[mg_2d_ten_atoms]
experiment = martingale, dimension = 2, t = 0.5, phi = gaussian((0,0),1,1), nu = atoms[(0,0),(0.5,0.5),(-0.5,0.3),(1,-1),(0.1,0.2),(0,1),(-1,0),(0.3,-0.4),(0.8,0.1),(-0.2,-0.7)]
[mg_1d_compact_alpha2]
experiment = martingale, alpha = 2, t = 1, phi = compact(0,1.5,1), nu = atoms[-0.5,0.5,1]
)";

const char* kGenerating = R"(
experiment = generating_function, dimension = 1, t = 1, nu = atoms[-1,-0.5,0,0.5,1], region = [-1,1), replicas = 100000, s_values = 0.1,0.5,0.9,1
)";

const char* kBlowup = R"(
experiment = blowup_scan, dimension = 1, K = 100,1000,10000,100000, t = 0.25,1.0
)";

const char* kPoisson = R"(
experiment = poisson_invariance, nu = poisson(2), box = [0,1), t = 0,0.5, replicas = 100000
)";

std::vector<TestFunction> families(int d) {
  return {make_gaussian_bump(d, Point(d, 0.2), 0.9, 1.3), make_compact_bump(d, Point(d, -0.1), 1.2, 2.5),
          make_kappa(d)};
}

Outcome hj_residual() {
  Outcome o;
  std::string worst;
  for (int d : {1, 2}) {
    const double tol = d == 1 ? 1e-4 : 1e-3;
    std::mt19937_64 gen(2024 + d);
    std::uniform_real_distribution<double> ut(0.2, 2.0), ux(-2.0, 2.0);
    const ColeHopf ch(1.0, d);
    for (const auto& f : families(d)) {
      double max_res = 0.0;
      for (int i = 0; i < 30; ++i) {
        const double t = ut(gen);
        Point x(d);
        for (double& c : x) c = ux(gen);
        max_res = std::max(max_res, ch.hj_residual(f, t, x));
      }
      if (!(max_res < tol)) o.pass = false;
      worst += fmt::format(" d={} {}: {:.2e};", d, to_string(f.family()), max_res);
    }
  }
  o.detail = "max residual per family:" + worst;
  return o;
}

Outcome monotonicity() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uc(-1.5, 1.5), uw(0.3, 1.5), ua(0.0, 3.0), ut(0.05, 2.0);
  const ColeHopf ch(1.0, 1);
  int violations = 0;
  double worst = -1e300;
  for (int pair = 0; pair < 1000; ++pair) {
    const auto phi = pair % 2 ? make_gaussian_bump(1, {uc(gen)}, uw(gen), ua(gen))
                              : make_compact_bump(1, {uc(gen)}, uw(gen), ua(gen));
    const auto psi = phi + make_compact_bump(1, {uc(gen)}, uw(gen), ua(gen));
    const double t = ut(gen);
    const Point x{2.0 * uc(gen)};
    const double gap = ch.value(phi, t, x) - ch.value(psi, t, x);
    worst = std::max(worst, gap);
    violations += gap > 1e-10;
  }
  return {violations == 0, fmt::format("1000 pairs, {} violations, max V phi - V psi = {:.2e}", violations, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility(std::ostream& log) {
  const std::string text = R"(replicas = 4000
[rp_laplace]
experiment = laplace_duality, dimension = 2, t = 0.5, phi = compact((0,0),1,1), nu = atoms[(0,0),(1,0)]
[rp_martingale]
experiment = martingale, t = 1, phi = gaussian(0,1,1), nu = atoms[0,1], grid_steps = 50
[rp_generating]
experiment = generating_function, alpha = 0.5, t = 1, nu = atoms[0,0.5,1], region = [0,1)
[rp_poisson]
experiment = poisson_invariance, dimension = 2, nu = poisson(3), box = [0,1)x[0,1), t = 0.3
[rp_duality]
experiment = duality_martingale, t = 1, phi = compact(0,1,1), nu = atoms[0.2], time_points = 4
[rp_moment]
experiment = moment_bound, t = 1, nu = atoms[0,1]
)";
  const unsigned n = worker_count();
  Outcome o;
  std::size_t files = 0;
  for (const auto& cfg : parse_config_file(text)) {
    std::vector<std::string> outputs;
    for (unsigned threads : {1u, n, 1u}) {
      const fs::path dir = kOut / fmt::format("repro_{}_{}", threads, outputs.size());
      fs::create_directories(dir);
      const auto result = run_experiment(cfg, {threads, dir}, log);
      std::string all;
      for (const auto& f : result.files) all += slurp(f);
      outputs.push_back(all);
    }
    ++files;
    if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2]) {
      o.pass = false;
      o.detail += " " + cfg.label + " differs;";
    }
  }
  o.detail = fmt::format("{} experiments byte-identical at 1, {}, 1 threads", files, n) + o.detail;
  return o;
}

}  // namespace

int main() {
  fs::remove_all(kOut);
  fs::create_directories(kOut);
  std::ofstream log(kOut / "acceptance.log");
  const unsigned threads = worker_count();
  int failures = 0;

  auto report = [&](int id, const char* name, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << fmt::format("criterion {} {:<22} {}  ({:.1f} s) {}", id, name, o.pass ? "PASS" : "FAIL", secs,
                             o.detail)
              << std::endl;
  };

  report(1, "laplace_duality", [&] { return run_sections(kLaplace, threads, log); });
  report(2, "martingale", [&] { return run_sections(kMartingale, threads, log); });
  report(3, "hj_residual", [] { return hj_residual(); });
  report(4, "monotonicity", [] { return monotonicity(); });
  report(5, "generating_function", [&] { return run_sections(kGenerating, threads, log); });
  report(6, "blowup_dichotomy", [&] { return run_sections(kBlowup, 1, log); });
  report(7, "poisson_invariance", [&] { return run_sections(kPoisson, threads, log); });
  report(8, "reproducibility", [&] { return reproducibility(log); });

  std::cout << fmt::format("{} of 8 criteria passed; log in {}", 8 - failures, (kOut / "acceptance.log").string())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
