#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dklab/colehopf.hpp"
#include "dklab/dynamics.hpp"
#include "dklab/experiment.hpp"
#include "dklab/normal.hpp"
#include "dklab/rng.hpp"

namespace dklab {

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<std::pair<std::string, std::function<bool()>>> checks() {
  const Point zero1{0.0};
  std::vector<std::pair<std::string, std::function<bool()>>> c;

  // testfn
  c.emplace_back("gaussian bump value, slope and Laplacian at the centre", [=] {
    const auto g = make_gaussian_bump(1, zero1, 1.0, 1.0);
    return g.value(zero1) == 1.0 && g.gradient(zero1)[0] == 0.0 && g.laplacian(zero1) == -1.0;
  });
  c.emplace_back("zero-amplitude gaussian bump vanishes", [] {
    const auto g = make_gaussian_bump(1, {0.0}, 1.0, 0.0);
    const Point x{0.7};
    return g.value(x) == 0.0 && g.gradient(x)[0] == 0.0;
  });
  c.emplace_back("compact bump at the centre equals a/e", [=] {
    return near(make_compact_bump(1, zero1, 1.0, std::numbers::e).value(zero1), 1.0, 1e-15);
  });
  c.emplace_back("compact bump vanishes outside its support", [] {
    const auto f = make_compact_bump(1, {0.0}, 1.0, 1.0);
    return f.value(Point{1.0}) == 0.0 && f.value(Point{-1.5}) == 0.0 && f.value(Point{3.0}) == 0.0;
  });
  c.emplace_back("kappa(0) = 1/e", [=] { return near(make_kappa(1).value(zero1), std::exp(-1.0), 1e-15); });
  c.emplace_back("kappa(x) <= e exp(-|x|)", [] {
    const auto k = make_kappa(2);
    for (double r = 0.0; r <= 20.0; r += 0.25) {
      const Point x{r * 0.6, r * 0.8};
      if (k.value(x) > std::numbers::e * std::exp(-r) * (1.0 + 1e-15)) return false;
    }
    return true;
  });
  c.emplace_back("seminorm of the zero function is 0", [] {
    return seminorm_sup(make_constant(1, 0.0), {{1}, 2}, Rectangle::cube(1, -5.0, 5.0), 0.1) == 0.0;
  });
  c.emplace_back("sup of a gaussian bump is its amplitude", [] {
    return near(seminorm_sup(make_gaussian_bump(1, {0.0}, 1.0, 1.7), {{0}, 0}, Rectangle::cube(1, -10.0, 10.0), 0.01),
                1.7, 1e-15);
  });
  c.emplace_back("kappa bounds scale with the kappa amplitude", [] {
    const auto k = make_kappa(1);
    const auto box = Rectangle::cube(1, -5.0, 5.0);
    const auto a = kappa_bound_check(k, box, 0.05), b = kappa_bound_check(2.0 * k, box, 0.05);
    return near(b.gradient_ratio, 2.0 * a.gradient_ratio, 1e-12 * a.gradient_ratio) &&
           near(b.laplacian_ratio, a.laplacian_ratio, 1e-12 * a.laplacian_ratio);
  });
  c.emplace_back("kappa-type bounds are finite for a gaussian bump on a box", [] {
    const auto b = kappa_bound_check(make_gaussian_bump(1, {0.0}, 1.0, 1.0), Rectangle::cube(1, -3.0, 3.0), 0.05);
    return std::isfinite(b.gradient_ratio) && std::isfinite(b.laplacian_ratio);
  });

  // measure
  c.emplace_back("pairing with the empty measure is 0", [] {
    return pair(AtomicMeasure(1.0, 1), make_gaussian_bump(1, {0.0}, 1.0, 1.0)) == 0.0;
  });
  c.emplace_back("pairing delta_0 with a unit gaussian bump is 1", [] {
    return pair(AtomicMeasure(1.0, 1, {0.0}), make_gaussian_bump(1, {0.0}, 1.0, 1.0)) == 1.0;
  });
  c.emplace_back("two atoms with weight 1/2 pair to 1", [] {
    return pair(AtomicMeasure(2.0, 1, {0.0, 0.0}), make_gaussian_bump(1, {0.0}, 1.0, 1.0)) == 1.0;
  });
  c.emplace_back("rectangle count of the empty measure is 0",
                 [] { return count_in_rect(AtomicMeasure(1.0, 1), Rectangle::cube(1, 0.0, 2.0)) == 0.0; });
  c.emplace_back("direct rectangle count", [] {
    return count_in_rect(AtomicMeasure(1.0, 1, {0.5, 1.5, 2.5}), Rectangle::cube(1, 0.0, 2.0)) == 2.0;
  });
  c.emplace_back("rectangles are half-open", [] {
    return count_atoms(AtomicMeasure(1.0, 1, {0.0, 2.0}), Rectangle::cube(1, 0.0, 2.0)) == 1;
  });
  c.emplace_back("poisson sample on an empty box has no atoms", [] {
    ReplicaRng rng(7, 0);
    return sample_poisson(5.0, Rectangle::cube(1, 1.0, 1.0), 0.0, rng).empty();
  });
  c.emplace_back("sqrt-log family with K=1 is one atom at the origin", [] {
    const auto f = make_sqrt_log_family(1, 2);
    return f.atoms.size() == 1 && f.atoms.atom(0)[0] == 0.0 && f.atoms.atom(0)[1] == 0.0;
  });
  c.emplace_back("sqrt-log atoms are non-decreasing", [] {
    const auto f = make_sqrt_log_family(1000, 1);
    for (std::size_t i = 1; i < f.atoms.size(); ++i)
      if (f.atoms.atom(i)[0] < f.atoms.atom(i - 1)[0]) return false;
    return true;
  });

  // heat
  c.emplace_back("heat semigroup preserves constants", [] {
    const HeatEvaluator h(1.0, 1);
    return h.apply(make_constant(1, 2.5), 3.0, Point{0.3}) == 2.5;
  });
  c.emplace_back("heat semigroup at t=0 is the identity", [] {
    const HeatEvaluator h(1.0, 1);
    const auto f = make_compact_bump(1, {0.2}, 1.0, 1.0);
    const Point x{0.4};
    return h.apply(f, 0.0, x) == f.value(x);
  });
  c.emplace_back("heat indicator of an empty rectangle is 0", [] {
    const HeatEvaluator h(1.0, 1);
    return h.indicator(Rectangle::cube(1, 1.0, 1.0), 1.0, Point{1.0}) == 0.0;
  });
  c.emplace_back("heat indicator deep inside at small time is 1", [] {
    const HeatEvaluator h(1.0, 1);
    return near(h.indicator(Rectangle::cube(1, -1.0, 1.0), 1e-6, Point{0.0}), 1.0, 1e-9);
  });
  c.emplace_back("heat pairing with the empty measure is 0", [] {
    const HeatEvaluator h(1.0, 1);
    return h.pair(AtomicMeasure(1.0, 1), make_gaussian_bump(1, {0.0}, 1.0, 1.0), 1.0) == 0.0;
  });
  c.emplace_back("heat pairing is linear", [] {
    const HeatEvaluator h(1.0, 1);
    const AtomicMeasure nu(1.0, 1, {-0.5, 0.25, 1.0});
    const auto f = make_gaussian_bump(1, {0.0}, 0.7, 1.0), g = make_compact_bump(1, {0.5}, 1.0, 2.0);
    return near(h.pair(nu, f + g, 0.5), h.pair(nu, f, 0.5) + h.pair(nu, g, 0.5), 1e-12);
  });

  // hjb
  c.emplace_back("V_t 0 = 0", [] {
    const ColeHopf ch(1.0, 1);
    return ch.value(make_constant(1, 0.0), 1.0, Point{0.3}) == 0.0;
  });
  c.emplace_back("V_t c = c", [] {
    const ColeHopf ch(1.5, 1);
    return near(ch.value(make_constant(1, 0.8), 2.0, Point{0.3}), 0.8, 1e-14);
  });
  c.emplace_back("V_t 0 has zero derivatives", [] {
    const ColeHopf ch(1.0, 1);
    const auto d = ch.derivatives(make_constant(1, 0.0), 1.0, Point{0.3});
    return d.gradient[0] == 0.0 && d.laplacian == 0.0;
  });
  c.emplace_back("even bump gives zero gradient at the centre", [] {
    const ColeHopf ch(1.0, 1);
    return std::abs(ch.gradient(make_gaussian_bump(1, {0.0}, 1.0, 1.0), 0.5, Point{0.0})[0]) < 1e-6;
  });
  c.emplace_back("HJ residual of V_t 0 is 0", [] {
    const ColeHopf ch(1.0, 1);
    return ch.hj_residual(make_constant(1, 0.0), 0.5, Point{0.1}) == 0.0;
  });
  c.emplace_back("HJ residual of V_t c is 0", [] {
    const ColeHopf ch(1.0, 1);
    return ch.hj_residual(make_constant(1, 0.7), 0.5, Point{0.1}) < 1e-10;
  });
  c.emplace_back("monotonicity: 0 <= gaussian bump", [] {
    const ColeHopf ch(1.0, 1);
    const std::vector<Point> probes{{-1.0}, {0.0}, {0.5}, {2.0}};
    return monotonicity_check(ch, make_constant(1, 0.0), make_gaussian_bump(1, {0.0}, 1.0, 1.0), 0.5, probes,
                              Rectangle::cube(1, -5.0, 5.0), 0.05);
  });
  c.emplace_back("monotonicity: equal functions give equal values", [] {
    const ColeHopf ch(1.0, 1);
    const auto f = make_compact_bump(1, {0.0}, 1.0, 1.0);
    for (double x : {-0.5, 0.0, 0.9}) {
      const Point p{x};
      if (std::abs(ch.value(f, 0.5, p) - ch.value(f, 0.5, p)) > 1e-12) return false;
    }
    return true;
  });
  c.emplace_back("kappa domination constant of 0 is 0", [] {
    const ColeHopf ch(1.0, 1);
    return kappa_domination_check(ch, make_constant(1, 0.0), 1.0, Rectangle::cube(1, -2.0, 2.0), 0.5, 4).constant ==
           0.0;
  });

  // dynamics
  c.emplace_back("ensemble from delta_0 is one particle at the origin", [] {
    const auto e = init_ensemble(AtomicMeasure(1.0, 1, {0.0}), 1, 0);
    return e.size() == 1 && e.particle(0)[0] == 0.0;
  });
  c.emplace_back("same seed and replica give identical ensembles", [] {
    const AtomicMeasure nu(1.0, 2, {0.0, 0.0, 1.0, -1.0});
    const auto a = evolve(init_ensemble(nu, 9, 3), 0.7), b = evolve(init_ensemble(nu, 9, 3), 0.7);
    return std::equal(a.positions().begin(), a.positions().end(), b.positions().begin(), b.positions().end());
  });
  c.emplace_back("path on the grid {0} holds only the initial measure", [] {
    const AtomicMeasure nu(1.0, 1, {0.4});
    const std::vector<double> grid{0.0};
    const std::vector<TestFunction> fs{make_gaussian_bump(1, {0.0}, 1.0, 1.0)};
    const auto rec = sample_path(nu, grid, fs, 1, 0);
    return rec.snapshots.size() == 1 && rec.snapshots[0] == nu && rec.traces[0].pair.size() == 1;
  });
  c.emplace_back("one-particle trace equals phi at the particle", [] {
    const AtomicMeasure nu(1.0, 1, {0.4});
    const auto grid = uniform_grid(1.0, 4);
    const auto phi = make_gaussian_bump(1, {0.0}, 1.0, 1.0);
    const std::vector<TestFunction> fs{phi};
    const auto rec = sample_path(nu, grid, fs, 5, 2);
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (rec.traces[0].pair[i] != phi.value(rec.snapshots[i].atom(0))) return false;
    return true;
  });

  // verify
  McOptions small;
  small.replicas = 200;
  c.emplace_back("laplace duality with phi = 0 gives 1 = 1", [=] {
    const auto r = laplace_duality_test(AtomicMeasure(1.0, 1, {0.0}), make_constant(1, 0.0), 1.0, ColeHopf(1.0, 1),
                                        small);
    return r.estimate.mean == 1.0 && r.reference == 1.0 && r.z_score == 0.0 && r.pass;
  });
  c.emplace_back("martingale over a tiny horizon is near 0", [=] {
    const HeatEvaluator h(1.0, 1);
    const auto r = martingale_mean_test(AtomicMeasure(1.0, 1, {0.0}), make_gaussian_bump(1, {0.0}, 1.0, 1.0), 1e-8,
                                        1, h, small);
    return std::abs(r.estimate.mean) < 1e-6 && r.estimate.std_error < 1e-6;
  });
  c.emplace_back("quadratic variation of a constant is 0 = 0", [=] {
    const HeatEvaluator h(1.0, 1);
    const auto r =
        quadratic_variation_test(AtomicMeasure(1.0, 1, {0.0}), make_constant(1, 3.0), 1.0, 4, h, small);
    return r.estimate.mean == 0.0 && r.reference == 0.0 && r.pass;
  });
  c.emplace_back("quadratic variation reference scales by 4 under phi -> 2 phi", [] {
    const HeatEvaluator h(1.0, 1);
    const AtomicMeasure nu(1.0, 1, {0.0, 0.3});
    const auto f = make_gaussian_bump(1, {0.0}, 1.0, 1.0);
    const double a = quadratic_variation_reference(nu, f, 1.0, h);
    return near(quadratic_variation_reference(nu, 2.0 * f, 1.0, h), 4.0 * a, 1e-14 * a);
  });
  c.emplace_back("duality martingale with phi = 0 is identically 1", [=] {
    auto phi0 = 0.0 * make_compact_bump(1, {0.0}, 1.0, 1.0);
    const auto rs = duality_martingale_test(AtomicMeasure(1.0, 1, {0.0}), phi0, 1.0, 5, ColeHopf(1.0, 1), small);
    for (const auto& r : rs)
      if (r.estimate.mean != 1.0 || r.z_score != 0.0) return false;
    return true;
  });
  c.emplace_back("duality martingale endpoint equals the laplace duality statistic", [=] {
    const AtomicMeasure nu(1.0, 1, {0.2});
    const auto phi = make_compact_bump(1, {0.0}, 1.0, 1.0);
    const ColeHopf ch(1.0, 1);
    const auto rs = duality_martingale_test(nu, phi, 1.0, 1, ch, small);
    const auto ld = laplace_duality_test(nu, phi, 1.0, ch, small);
    return rs.back().estimate.mean == ld.estimate.mean && rs.back().reference == ld.reference;
  });
  c.emplace_back("generating function at s = 1 is 1 on both sides", [=] {
    const HeatEvaluator h(1.0, 1);
    const std::vector<double> s{1.0};
    const auto rs = generating_function_test(AtomicMeasure(1.0, 1, {0.0, 0.5}), Rectangle::cube(1, -1.0, 1.0), 1.0,
                                             s, h, small);
    return rs.back().estimate.mean == 1.0 && rs.back().reference == 1.0 && rs.back().pass;
  });
  c.emplace_back("poisson counts at t = 0 are Poisson", [=] {
    McOptions mc = small;
    mc.replicas = 2000;
    const std::vector<Rectangle> boxes{Rectangle::cube(1, 0.0, 1.0)};
    const auto rs = poisson_invariance_test(2.0, Rectangle::cube(1, 0.0, 1.0), 0.0, 0.0, boxes, 1.0, std::nullopt, mc);
    return rs[0].pass && rs[1].estimate.mean < 0.05;
  });
  c.emplace_back("moments of the empty measure are 0", [=] {
    const HeatEvaluator h(1.0, 1);
    const auto rs = moment_bound_test(AtomicMeasure(1.0, 1), 1.0, h, small);
    return rs[0].estimate.mean == 0.0 && rs[0].reference == 0.0 && rs[1].estimate.mean == 0.0 &&
           rs[1].reference == 0.0;
  });
  c.emplace_back("one-atom second moment reference is P_t kappa^2", [=] {
    const HeatEvaluator h(1.0, 1);
    const Point x{0.3};
    const auto rs = moment_bound_test(AtomicMeasure(1.0, 1, x), 1.0, h, small);
    const double direct = h.apply(square_integrand(make_kappa(1)), 1.0, x);
    return near(rs[1].reference, direct, 1e-14);
  });

  // cli
  c.emplace_back("minimal config gets documented defaults", [] {
    const auto cfg = parse_config(
        "experiment=laplace_duality, alpha=1, dimension=1, t=1, phi=gaussian(0,1,1), nu=atoms[0]");
    return cfg.replicas == 10000 && cfg.seed == 42 && cfg.quad_nodes == 64 && cfg.grid_steps == 200 &&
           cfg.pad == 6.0 && cfg.initial->atoms.size() == 1;
  });
  c.emplace_back("negative alpha is rejected citing alpha > 0", [] {
    try {
      parse_config("experiment = laplace_duality\nalpha = -1\nt = 1\nphi = zero\nnu = atoms[0]");
    } catch (const ValidationError& e) {
      return std::string(e.what()).find("alpha > 0") != std::string::npos;
    }
    return false;
  });
  c.emplace_back("list values parse", [] {
    const auto cfg = parse_config("experiment = blowup_scan, K = 100,1000,10000, t = 0.25,1.0");
    return cfg.times.size() == 2 && cfg.truncations.size() == 3 && cfg.truncations[2] == 10000;
  });
  const auto dir = std::filesystem::temp_directory_path() / "dk-lab-selftest";
  c.emplace_back("zero test function run exits 0", [=] {
    const auto cfg = parse_config(
        "experiment = laplace_duality, t = 1, phi = zero, nu = atoms[0, 1], replicas = 100, output = zero.csv");
    std::ostringstream sink;
    return exit_status(run_experiment(cfg, {1, dir}, sink)) == 0;
  });
  c.emplace_back("forced reference offset exits 1", [=] {
    const auto cfg = parse_config(
        "experiment = laplace_duality, t = 1, phi = zero, nu = atoms[0], replicas = 100, reference_offset = 0.1, "
        "output = forced.csv");
    std::ostringstream sink;
    return exit_status(run_experiment(cfg, {1, dir}, sink)) == 1;
  });
  return c;
}

}  // namespace

int run_selftest(std::ostream& log) {
  int failures = 0;
  const auto all = checks();
  for (const auto& [name, check] : all) {
    bool ok = false;
    std::string error;
    try {
      ok = check();
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (!ok) ++failures;
    log << (ok ? "ok   " : "FAIL ") << name;
    if (!error.empty()) log << " (" << error << ")";
    log << '\n';
  }
  log << fmt::format("{} checks, {} failed\n", all.size(), failures);
  return failures;
}

}  // namespace dklab
