#include "dklab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dklab/csv.hpp"
#include "dklab/dynamics.hpp"
#include "dklab/errors.hpp"
#include "dklab/parallel.hpp"
#include "dklab/quadrature.hpp"

namespace dklab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTvThreshold = 0.01;
constexpr double kRefinementShift = 0.5;

template <class... Args>
std::string notes(Args&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

VerificationReport make_report(std::string name, double alpha, int d, double t, const McOptions& opt) {
  VerificationReport r;
  r.test_name = std::move(name);
  r.alpha = alpha;
  r.dimension = d;
  r.time = t;
  r.replicas = opt.replicas;
  r.seed = opt.seed;
  return r;
}

void finish_z(VerificationReport& r, const MCEstimate& est, double reference, double z_max) {
  r.estimate = est;
  r.reference = reference;
  r.z_score = z_score(est, reference);
  r.pass = std::abs(r.z_score) <= z_max;
}

void require_replicas(const McOptions& opt) {
  if (opt.replicas < 2) throw ParameterError("Monte Carlo needs at least two replicas");
}

void require_matching_alpha(const AtomicMeasure& nu, double alpha) {
  if (nu.alpha() != alpha) throw ParameterError("measure weight 1/alpha does not match the semigroup alpha");
}

double feature_scale(const TestFunction& phi) {
  if (phi.family() == Family::GaussianBump || phi.family() == Family::CompactBump) return bump_params(phi).width;
  return 1.0;
}

}  // namespace

MCEstimate MCEstimate::from_samples(std::span<const double> samples) {
  MCEstimate e;
  e.replicas = samples.size();
  if (samples.empty()) return e;
  double sum = 0.0;
  for (double s : samples) sum += s;
  e.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return e;
  double ss = 0.0;
  for (double s : samples) ss += (s - e.mean) * (s - e.mean);
  const double n = static_cast<double>(samples.size());
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

double z_score(const MCEstimate& estimate, double reference) {
  const double diff = estimate.mean - reference;
  if (estimate.std_error > 0.0) return diff / estimate.std_error;
  if (diff == 0.0) return 0.0;
  return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

std::string report_csv_header() {
  return "test_name,alpha,d,t,replicas,seed,estimate,stderr,reference,z_score,pass,notes";
}

std::string to_csv_row(const VerificationReport& r) {
  std::string row;
  row += csv_field(r.test_name);
  row += ',' + format_real(r.alpha);
  row += ',' + std::to_string(r.dimension);
  row += ',' + format_real(r.time);
  row += ',' + std::to_string(r.replicas);
  row += ',' + std::to_string(r.seed);
  row += ',' + format_real(r.estimate.mean);
  row += ',' + format_real(r.estimate.std_error);
  row += ',' + format_real(r.reference);
  row += ',' + format_real(r.z_score);
  row += r.pass ? ",true," : ",false,";
  row += csv_field(r.notes);
  return row;
}

void write_reports_csv(std::ostream& out, std::span<const VerificationReport> reports) {
  out << report_csv_header() << '\n';
  for (const auto& r : reports) out << to_csv_row(r) << '\n';
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

double trapezoid_heat(const std::function<double(std::span<const double>)>& f, int dimension, double alpha, double t,
                      std::span<const double> x, double step) {
  if (!(t >= 0.0)) throw ParameterError("trapezoid_heat needs t >= 0");
  if (!(step > 0.0)) throw ParameterError("trapezoid_heat needs step > 0");
  if (dimension < 1 || dimension > 3) throw UnsupportedError("trapezoid_heat supports 1 <= d <= 3");
  if (t == 0.0) return f(x);
  const double sigma = std::sqrt(alpha * t);
  const double half_width = 9.0 * sigma;
  const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * half_width / step));
  const double h = 2.0 * half_width / static_cast<double>(n);
  std::vector<double> kernel(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double z = (-half_width + h * static_cast<double>(i)) / sigma;
    const double end = (i == 0 || i == n) ? 0.5 : 1.0;
    kernel[i] = end * h * std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  }
  const int d = dimension;
  std::vector<std::size_t> idx(d, 0);
  Point y(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      y[k] = x[k] - half_width + h * static_cast<double>(idx[k]);
      w *= kernel[idx[k]];
    }
    if (w > 0.0) sum += w * f(y);
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] <= n) break;
      idx[k] = 0;
    }
    if (k == d) break;
  }
  return sum;
}

double log_laplace_product_oracle(const AtomicMeasure& nu, const TestFunction& phi, double t, double step) {
  if (phi.dimension() != nu.dimension()) throw ParameterError("oracle: dimension mismatch");
  const double inv = 1.0 / nu.alpha();
  const auto boltzmann = [&phi, inv](std::span<const double> y) { return std::exp(-inv * phi.value(y)); };
  double log_sum = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i)
    log_sum += std::log(trapezoid_heat(boltzmann, nu.dimension(), nu.alpha(), t, nu.atom(i), step));
  return log_sum;
}

double integrate_over_ball(const std::function<double(std::span<const double>)>& f, int dimension, const Ball& ball,
                           double step) {
  if (!(step > 0.0)) throw ParameterError("integration step must be > 0");
  if (ball.radius <= 0.0) return 0.0;
  const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * ball.radius / step));
  const double h = 2.0 * ball.radius / static_cast<double>(n);
  const int d = dimension;
  std::vector<std::size_t> idx(d, 0);
  Point y(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      y[k] = ball.center[k] - ball.radius + h * static_cast<double>(idx[k]);
      w *= (idx[k] == 0 || idx[k] == n) ? 0.5 * h : h;
    }
    sum += w * f(y);
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] <= n) break;
      idx[k] = 0;
    }
    if (k == d) break;
  }
  return sum;
}

std::vector<double> poisson_binomial_pmf(std::span<const double> probabilities) {
  std::vector<double> pmf{1.0};
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("Bernoulli probability outside [0, 1]");
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += (1.0 - p) * pmf[k];
      next[k + 1] += p * pmf[k];
    }
    pmf = std::move(next);
  }
  return pmf;
}

std::vector<double> poisson_pmf(double mean, std::size_t n_max) {
  if (!(mean >= 0.0)) throw ParameterError("Poisson mean must be >= 0");
  std::vector<double> pmf(n_max + 1);
  for (std::size_t k = 0; k <= n_max; ++k)
    pmf[k] = mean == 0.0 ? (k == 0 ? 1.0 : 0.0)
                         : std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(k + 1.0));
  return pmf;
}

double total_variation(std::span<const double> empirical, std::span<const double> model) {
  const std::size_t n = std::max(empirical.size(), model.size());
  double tv = 0.0, model_mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = k < empirical.size() ? empirical[k] : 0.0;
    const double q = k < model.size() ? model[k] : 0.0;
    model_mass += q;
    tv += std::abs(p - q);
  }
  tv += std::max(0.0, 1.0 - model_mass);
  return 0.5 * tv;
}

void require_nonnegative(const TestFunction& phi) {
  const int d = phi.dimension();
  Rectangle box = Rectangle::cube(d, -10.0, 10.0);
  if (phi.support()) {
    Point lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo[k] = phi.support()->center[k] - phi.support()->radius;
      hi[k] = phi.support()->center[k] + phi.support()->radius;
    }
    box = Rectangle(lo, hi);
  }
  const double per_axis = d == 1 ? 4000.0 : d == 2 ? 400.0 : 60.0;
  double extent = 0.0;
  for (int k = 0; k < d; ++k) extent = std::max(extent, box.upper()[k] - box.lower()[k]);
  if (extent == 0.0) {
    if (phi.value(box.lower()) < 0.0) throw PreconditionError("test function is negative");
    return;
  }
  for_each_lattice_point(box, extent / per_axis, [&](std::span<const double> x) {
    if (phi.value(x) < 0.0) throw PreconditionError("test function must be non-negative; found a negative grid value");
  });
}

// ---------------------------------------------------------------------------
// Laplace duality
// ---------------------------------------------------------------------------

VerificationReport laplace_duality_test(const AtomicMeasure& nu, const TestFunction& phi, double t,
                                        const ColeHopf& colehopf, const McOptions& options) {
  require_replicas(options);
  require_matching_alpha(nu, colehopf.alpha());
  if (phi.dimension() != nu.dimension()) throw ParameterError("test function dimension mismatch");
  if (!(t >= 0.0)) throw ParameterError("t must be >= 0");
  require_nonnegative(phi);

  std::vector<double> samples(options.replicas);
  parallel_for(options.replicas, options.threads, [&](std::size_t r) {
    ParticleEnsemble e(nu, options.seed, r);
    if (t > 0.0) e.advance(t);
    samples[r] = std::exp(-e.pair(phi));
  });

  double log_reference = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) log_reference -= colehopf.value(phi, t, nu.atom(i));
  log_reference /= nu.alpha();

  auto report = make_report("laplace_duality", nu.alpha(), nu.dimension(), t, options);
  finish_z(report, MCEstimate::from_samples(samples), std::exp(log_reference) + options.reference_offset,
           options.z_max);
  report.notes = notes("atoms=", nu.size(), "; phi=", to_string(phi.family()), "; log_reference=",
                       format_real(log_reference));
  return report;
}

VerificationReport laplace_oracle_test(const AtomicMeasure& nu, const TestFunction& phi, double t,
                                       const ColeHopf& colehopf, double tolerance) {
  require_matching_alpha(nu, colehopf.alpha());
  if (phi.dimension() != nu.dimension()) throw ParameterError("test function dimension mismatch");
  const double scale = t > 0.0 ? std::min(std::sqrt(nu.alpha() * t), feature_scale(phi)) : feature_scale(phi);
  const double oracle = -nu.alpha() * log_laplace_product_oracle(nu, phi, t, scale / 50.0);
  double pairing = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) pairing += colehopf.value(phi, t, nu.atom(i));
  const double gap = std::abs(oracle - pairing);
  // Floor keeps the relative gap meaningful when the pairing vanishes.
  const double rel = gap / std::max(std::abs(pairing), 1e-6 * nu.alpha());

  McOptions none;
  none.replicas = 0;
  none.seed = 0;
  auto report = make_report("laplace_product_oracle", nu.alpha(), nu.dimension(), t, none);
  report.estimate = {oracle, 0.0, 0};
  report.reference = pairing;
  report.z_score = kNaN;
  report.pass = rel < tolerance;
  report.notes = notes("criterion=relative gap < ", format_real(tolerance), "; relative_gap=", format_real(rel));
  return report;
}

// ---------------------------------------------------------------------------
// Martingale problem
// ---------------------------------------------------------------------------

double quadratic_variation_reference(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                     const HeatEvaluator& heat) {
  static const QuadratureRule rule = gauss_legendre(32);
  const Integrand grad2 = gradient_norm2_integrand(phi);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = 0.5 * horizon * (1.0 + rule.nodes[i]);
    sum += 0.5 * horizon * rule.weights[i] * heat.pair(nu, grad2, s);
  }
  return sum;
}

MartingaleStudy martingale_study(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                 std::size_t grid_steps, const HeatEvaluator& heat, const McOptions& options) {
  require_replicas(options);
  require_matching_alpha(nu, heat.alpha());
  if (phi.dimension() != nu.dimension()) throw ParameterError("test function dimension mismatch");
  const std::vector<double> fine = uniform_grid(horizon, 2 * grid_steps);
  std::vector<double> coarse;
  for (std::size_t i = 0; i < fine.size(); i += 2) coarse.push_back(fine[i]);
  const double half_alpha = 0.5 * nu.alpha();

  std::vector<double> m_coarse(options.replicas), m_fine(options.replicas);
  const std::vector<TestFunction> functions{phi};
  parallel_for(options.replicas, options.threads, [&](std::size_t r) {
    const PathRecord rec = sample_path(nu, fine, functions, options.seed, r, false);
    const PathTrace& tr = rec.traces[0];
    std::vector<double> lap_coarse;
    lap_coarse.reserve(coarse.size());
    for (std::size_t i = 0; i < fine.size(); i += 2) lap_coarse.push_back(tr.pair_laplacian[i]);
    const double delta = tr.pair.back() - tr.pair.front();
    m_coarse[r] = delta - half_alpha * trapezoid(coarse, lap_coarse);
    m_fine[r] = delta - half_alpha * trapezoid(fine, tr.pair_laplacian);
  });

  auto squares = [](std::vector<double> v) {
    for (double& x : v) x *= x;
    return v;
  };
  const MCEstimate mean_c = MCEstimate::from_samples(m_coarse);
  const MCEstimate mean_f = MCEstimate::from_samples(m_fine);
  const MCEstimate sq_c = MCEstimate::from_samples(squares(m_coarse));
  const MCEstimate sq_f = MCEstimate::from_samples(squares(m_fine));
  auto shift = [](const MCEstimate& a, const MCEstimate& b) {
    const double diff = std::abs(a.mean - b.mean);
    if (a.std_error > 0.0) return diff / a.std_error;
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  };

  MartingaleStudy study;
  study.mean = make_report("martingale_mean", nu.alpha(), nu.dimension(), horizon, options);
  finish_z(study.mean, mean_c, options.reference_offset, options.z_max);
  const double shift_mean = shift(mean_c, mean_f);
  study.mean.pass = study.mean.pass && shift_mean < kRefinementShift;
  study.mean.notes = notes("grid_steps=", grid_steps, "; refinement_shift_se=", format_real(shift_mean),
                           shift_mean < kRefinementShift ? "" : "; discretization bias flagged");

  study.quadratic_variation = make_report("quadratic_variation", nu.alpha(), nu.dimension(), horizon, options);
  const double qv_ref = quadratic_variation_reference(nu, phi, horizon, heat);
  finish_z(study.quadratic_variation, sq_c, qv_ref + options.reference_offset, options.z_max);
  const double shift_sq = shift(sq_c, sq_f);
  study.quadratic_variation.pass = study.quadratic_variation.pass && shift_sq < kRefinementShift;
  study.quadratic_variation.notes = notes("grid_steps=", grid_steps, "; refinement_shift_se=", format_real(shift_sq),
                                          shift_sq < kRefinementShift ? "" : "; discretization bias flagged");
  return study;
}

VerificationReport martingale_mean_test(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                        std::size_t grid_steps, const HeatEvaluator& heat, const McOptions& options) {
  return martingale_study(nu, phi, horizon, grid_steps, heat, options).mean;
}

VerificationReport quadratic_variation_test(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                            std::size_t grid_steps, const HeatEvaluator& heat,
                                            const McOptions& options) {
  return martingale_study(nu, phi, horizon, grid_steps, heat, options).quadratic_variation;
}

// ---------------------------------------------------------------------------
// Time-dependent duality martingale
// ---------------------------------------------------------------------------

std::vector<VerificationReport> duality_martingale_test(const AtomicMeasure& nu, const TestFunction& phi,
                                                        double horizon, std::size_t time_points,
                                                        const ColeHopf& colehopf, const McOptions& options) {
  require_replicas(options);
  require_matching_alpha(nu, colehopf.alpha());
  if (!phi.support() || phi.family() == Family::GaussianBump)
    throw PreconditionError("duality martingale test needs a compactly supported test function");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
  if (time_points == 0) throw ParameterError("need at least one grid time");
  require_nonnegative(phi);

  const std::size_t n = time_points;
  const double z_max = n >= 10 ? std::max(options.z_max, 3.5) : options.z_max;
  std::vector<double> samples(options.replicas * n);
  parallel_for(options.replicas, options.threads, [&](std::size_t r) {
    ParticleEnsemble e(nu, options.seed, r);
    double previous = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double t = horizon * static_cast<double>(k) / static_cast<double>(n);
      e.advance(t - previous);
      previous = t;
      const double remaining = k == n ? 0.0 : horizon - t;
      double exponent = 0.0;
      for (std::size_t p = 0; p < e.size(); ++p) exponent += colehopf.value(phi, remaining, e.particle(p));
      samples[r * n + (k - 1)] = std::exp(-exponent / e.alpha());
    }
  });

  double log_y0 = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) log_y0 -= colehopf.value(phi, horizon, nu.atom(i));
  const double y0 = std::exp(log_y0 / nu.alpha()) + options.reference_offset;

  std::vector<VerificationReport> reports;
  std::vector<double> column(options.replicas);
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t r = 0; r < options.replicas; ++r) column[r] = samples[r * n + (k - 1)];
    const double t = horizon * static_cast<double>(k) / static_cast<double>(n);
    auto report = make_report("duality_martingale", nu.alpha(), nu.dimension(), t, options);
    finish_z(report, MCEstimate::from_samples(column), y0, z_max);
    report.notes = notes("horizon=", format_real(horizon), "; z_max=", format_real(z_max));
    reports.push_back(std::move(report));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Generating function / integer mass
// ---------------------------------------------------------------------------

std::vector<VerificationReport> generating_function_test(const AtomicMeasure& nu, const Rectangle& region, double t,
                                                         std::span<const double> s_values, const HeatEvaluator& heat,
                                                         const McOptions& options) {
  require_replicas(options);
  require_matching_alpha(nu, heat.alpha());
  if (region.dimension() != nu.dimension()) throw ParameterError("region dimension mismatch");
  if (!(t > 0.0)) throw ParameterError("generating function test needs t > 0");
  for (double s : s_values)
    if (!(s > 0.0 && s <= 1.0)) throw ParameterError("s values must lie in (0, 1]");

  std::vector<std::size_t> counts(options.replicas);
  std::vector<unsigned char> integral(options.replicas);
  parallel_for(options.replicas, options.threads, [&](std::size_t r) {
    ParticleEnsemble e(nu, options.seed, r);
    e.advance(t);
    const std::size_t c = e.count_in(region);
    const double mass = static_cast<double>(c) / e.alpha();
    const double scaled = mass * e.alpha();
    counts[r] = c;
    integral[r] = std::nearbyint(scaled) == static_cast<double>(c) && scaled >= 0.0;
  });

  std::vector<double> h(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) h[i] = heat.indicator(region, t, nu.atom(i));

  std::vector<VerificationReport> reports;
  {
    std::size_t ok = 0;
    for (unsigned char v : integral) ok += v;
    auto report = make_report("generating_function_integer_mass", nu.alpha(), nu.dimension(), t, options);
    report.estimate = {static_cast<double>(ok) / static_cast<double>(options.replicas), 0.0, options.replicas};
    report.reference = 1.0;
    report.z_score = kNaN;
    report.pass = ok == options.replicas;
    report.notes = notes("criterion=all replicas integer; integer_replicas=", ok);
    reports.push_back(std::move(report));
  }
  {
    std::vector<double> empirical(nu.size() + 1, 0.0);
    for (std::size_t c : counts) empirical[c] += 1.0;
    for (double& p : empirical) p /= static_cast<double>(options.replicas);
    const double tv = total_variation(empirical, poisson_binomial_pmf(h));
    auto report = make_report("generating_function_pmf", nu.alpha(), nu.dimension(), t, options);
    report.estimate = {tv, 0.0, options.replicas};
    report.reference = kTvThreshold;
    report.z_score = kNaN;
    report.pass = tv < kTvThreshold;
    report.notes = "criterion=total variation < 0.01 vs Poisson-binomial";
    reports.push_back(std::move(report));
  }
  std::vector<double> samples(options.replicas);
  for (double s : s_values) {
    for (std::size_t r = 0; r < options.replicas; ++r) samples[r] = std::pow(s, static_cast<double>(counts[r]));
    double log_g = 0.0;
    for (double hi : h) log_g += std::log1p((s - 1.0) * hi);
    auto report = make_report("generating_function_g", nu.alpha(), nu.dimension(), t, options);
    finish_z(report, MCEstimate::from_samples(samples), std::exp(log_g) + options.reference_offset, options.z_max);
    report.notes = notes("s=", format_real(s));
    reports.push_back(std::move(report));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Blow-up scan
// ---------------------------------------------------------------------------

std::vector<BlowupRow> blowup_scan(std::span<const std::size_t> truncations, std::span<const double> times,
                                   int dimension, double alpha, const std::optional<Rectangle>& region) {
  if (truncations.empty() || times.empty()) throw ParameterError("blow-up scan needs K values and times");
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    if (truncations[i] == 0) throw ParameterError("K values must be >= 1");
    if (i > 0 && truncations[i] <= truncations[i - 1]) throw ParameterError("K values must be increasing");
  }
  const Rectangle a = region.value_or(Rectangle::cube(dimension, 0.0, 1.0));
  const InitialFamily family = make_sqrt_log_family(truncations.back(), dimension);
  const HeatEvaluator heat(alpha, dimension, HeatEvaluator::kMinNodes);
  std::vector<BlowupRow> rows;
  for (double t : times) {
    if (!(t > 0.0)) throw ParameterError("blow-up scan times must be > 0");
    // Neumaier-compensated running sum.
    double sum = 0.0, carry = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 1; k <= truncations.back(); ++k) {
      const double term = heat.indicator(a, t, family.atoms.atom(k - 1));
      const double s = sum + term;
      carry += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
      sum = s;
      if (k == truncations[next]) {
        rows.push_back({k, t, sum + carry});
        ++next;
      }
    }
  }
  return rows;
}

std::vector<VerificationReport> blowup_checks(std::span<const BlowupRow> table, int dimension, double alpha) {
  std::map<double, std::vector<BlowupRow>> by_time;
  for (const auto& row : table) by_time[row.time].push_back(row);
  McOptions none;
  none.replicas = 0;
  none.seed = 0;
  std::vector<VerificationReport> reports;
  for (const auto& [t, rows] : by_time) {
    if (rows.size() < 2) continue;
    if (t < 0.5) {
      // Two decades below the largest K when available, else the smallest K.
      const BlowupRow* base = &rows.front();
      for (const auto& row : rows)
        if (100 * row.truncation == rows.back().truncation) base = &row;
      const double first = base->partial_sum, last = rows.back().partial_sum;
      const double rel = std::abs(last - first) / first;
      auto report = make_report("blowup_convergent", alpha, dimension, t, none);
      report.estimate = {rel, 0.0, 0};
      report.reference = 0.01;
      report.z_score = kNaN;
      report.pass = rel < 0.01;
      report.notes = notes("criterion=|S_K2 - S_K1| < 0.01 S_K1; K1=", base->truncation,
                           "; K2=", rows.back().truncation);
      reports.push_back(std::move(report));
    } else {
      double min_ratio = std::numeric_limits<double>::infinity();
      std::string ratios;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].truncation != 10 * rows[i - 1].truncation) continue;
        const double ratio = rows[i].partial_sum / rows[i - 1].partial_sum;
        min_ratio = std::min(min_ratio, ratio);
        ratios += notes("; S_", rows[i].truncation, "/S_", rows[i - 1].truncation, "=", format_real(ratio));
      }
      if (ratios.empty()) continue;
      auto report = make_report("blowup_divergent", alpha, dimension, t, none);
      report.estimate = {min_ratio, 0.0, 0};
      report.reference = 1.5;
      report.z_score = kNaN;
      report.pass = min_ratio >= 1.5;
      report.notes = "criterion=min S_10K/S_K >= 1.5" + ratios;
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

void write_blowup_csv(std::ostream& out, std::span<const BlowupRow> table) {
  out << "K,t,S_K\n";
  for (const auto& row : table)
    out << row.truncation << ',' << format_real(row.time) << ',' << format_real(row.partial_sum) << '\n';
}

// ---------------------------------------------------------------------------
// Poisson invariance
// ---------------------------------------------------------------------------

std::vector<VerificationReport> poisson_invariance_test(double lambda, const Rectangle& box, double pad, double t,
                                                        std::span<const Rectangle> sub_boxes, double alpha,
                                                        const std::optional<TestFunction>& phi_in,
                                                        const McOptions& options) {
  require_replicas(options);
  if (!(lambda > 0.0)) throw ParameterError("poisson intensity must be > 0");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  if (!(t >= 0.0)) throw ParameterError("t must be >= 0");
  if (pad < 6.0 * std::sqrt(alpha * t) * (1.0 - 1e-12))
    throw PreconditionError("pad must be >= 6 sqrt(alpha t)");
  for (const auto& sb : sub_boxes)
    if (!box.contains(sb)) throw PreconditionError("sub-boxes must lie inside the sampling box");
  const int d = box.dimension();

  TestFunction phi = [&] {
    if (phi_in) return *phi_in;
    Point center(d);
    double half = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d; ++k) {
      center[k] = 0.5 * (box.lower()[k] + box.upper()[k]);
      half = std::min(half, 0.5 * (box.upper()[k] - box.lower()[k]));
    }
    return make_compact_bump(d, center, half, 1.0);
  }();
  if (phi.dimension() != d) throw ParameterError("test function dimension mismatch");
  if (!phi.support()) throw PreconditionError("Laplace functional check needs a compactly supported test function");
  require_nonnegative(phi);

  const std::size_t nb = sub_boxes.size();
  std::vector<std::size_t> counts(options.replicas * nb);
  std::vector<double> laplace_t(options.replicas), laplace_diff(options.replicas);
  const std::uint64_t sampling_seed = derive_seed(options.seed, 1);
  parallel_for(options.replicas, options.threads, [&](std::size_t r) {
    ReplicaRng rng(sampling_seed, r);
    const AtomicMeasure xi = sample_poisson(lambda, box, pad, rng).with_alpha(alpha);
    ParticleEnsemble e(xi, options.seed, r);
    const double at_zero = std::exp(-e.pair(phi));
    if (t > 0.0) e.advance(t);
    for (std::size_t b = 0; b < nb; ++b) counts[r * nb + b] = e.count_in(sub_boxes[b]);
    laplace_t[r] = std::exp(-e.pair(phi));
    laplace_diff[r] = laplace_t[r] - at_zero;
  });

  std::vector<VerificationReport> reports;
  std::vector<double> column(options.replicas);
  for (std::size_t b = 0; b < nb; ++b) {
    const double mean = lambda * sub_boxes[b].volume();
    std::size_t n_max = 0;
    for (std::size_t r = 0; r < options.replicas; ++r) {
      column[r] = static_cast<double>(counts[r * nb + b]);
      n_max = std::max(n_max, counts[r * nb + b]);
    }
    auto count_report = make_report("poisson_invariance_mean", alpha, d, t, options);
    finish_z(count_report, MCEstimate::from_samples(column), mean + options.reference_offset, options.z_max);
    count_report.notes = notes("sub_box=", b, "; lambda_vol=", format_real(mean));
    reports.push_back(std::move(count_report));

    std::vector<double> empirical(n_max + 1, 0.0);
    for (std::size_t r = 0; r < options.replicas; ++r) empirical[counts[r * nb + b]] += 1.0;
    for (double& p : empirical) p /= static_cast<double>(options.replicas);
    const double tv = total_variation(empirical, poisson_pmf(mean, n_max));
    auto pmf_report = make_report("poisson_invariance_pmf", alpha, d, t, options);
    pmf_report.estimate = {tv, 0.0, options.replicas};
    pmf_report.reference = kTvThreshold;
    pmf_report.z_score = kNaN;
    pmf_report.pass = tv < kTvThreshold;
    pmf_report.notes = notes("sub_box=", b, "; criterion=total variation < 0.01 vs Poisson");
    reports.push_back(std::move(pmf_report));
  }

  const double inv = 1.0 / alpha;
  double radius = phi.support()->radius;
  const double integral = -integrate_over_ball(
      [&phi, inv](std::span<const double> y) { return std::expm1(-inv * phi.value(y)); }, d, *phi.support(),
      radius / 400.0);
  auto laplace_report = make_report("poisson_invariance_laplace", alpha, d, t, options);
  finish_z(laplace_report, MCEstimate::from_samples(laplace_t),
           std::exp(-lambda * integral) + options.reference_offset, options.z_max);
  laplace_report.notes = notes("phi=", to_string(phi.family()), "; lambda_integral=", format_real(lambda * integral));
  reports.push_back(std::move(laplace_report));

  auto paired = make_report("poisson_invariance_stationarity", alpha, d, t, options);
  finish_z(paired, MCEstimate::from_samples(laplace_diff), options.reference_offset, options.z_max);
  paired.notes = "paired difference of the Laplace functional at t and at 0";
  reports.push_back(std::move(paired));
  return reports;
}

// ---------------------------------------------------------------------------
// Moment bound
// ---------------------------------------------------------------------------

std::vector<VerificationReport> moment_bound_test(const AtomicMeasure& nu, double horizon, const HeatEvaluator& heat,
                                                  const McOptions& options) {
  require_replicas(options);
  require_matching_alpha(nu, heat.alpha());
  if (!(horizon >= 0.0)) throw ParameterError("horizon must be >= 0");
  const TestFunction kappa = make_kappa(nu.dimension());
  const Integrand kappa2 = square_integrand(kappa);

  std::vector<double> first(options.replicas), second(options.replicas);
  parallel_for(options.replicas, options.threads, [&](std::size_t r) {
    ParticleEnsemble e(nu, options.seed, r);
    if (horizon > 0.0) e.advance(horizon);
    const double k = e.pair(kappa);
    first[r] = k;
    second[r] = k * k;
  });

  auto references = [&](double t) {
    double mean_sum = 0.0, var_sum = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      const double pk = heat.apply(kappa, t, nu.atom(i));
      mean_sum += pk;
      var_sum += heat.apply(kappa2, t, nu.atom(i)) - pk * pk;
    }
    const double m1 = mean_sum / nu.alpha();
    return std::pair{m1, m1 * m1 + var_sum / (nu.alpha() * nu.alpha())};
  };
  const auto [ref1, ref2] = references(horizon);
  double sup_second = 0.0;
  for (int i = 0; i <= 10; ++i) sup_second = std::max(sup_second, references(horizon * i / 10.0).second);

  std::vector<VerificationReport> reports;
  auto r1 = make_report("moment_first", nu.alpha(), nu.dimension(), horizon, options);
  finish_z(r1, MCEstimate::from_samples(first), ref1 + options.reference_offset, options.z_max);
  r1.notes = notes("atoms=", nu.size());
  reports.push_back(std::move(r1));
  auto r2 = make_report("moment_second", nu.alpha(), nu.dimension(), horizon, options);
  finish_z(r2, MCEstimate::from_samples(second), ref2 + options.reference_offset, options.z_max);
  r2.notes = notes("atoms=", nu.size(), "; sup_second_moment_reference=", format_real(sup_second));
  reports.push_back(std::move(r2));
  return reports;
}

}  // namespace dklab
