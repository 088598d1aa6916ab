#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dklab/colehopf.hpp"
#include "dklab/geometry.hpp"
#include "dklab/heat.hpp"
#include "dklab/measure.hpp"
#include "dklab/testfn.hpp"

namespace dklab {

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(replicas)
  std::size_t replicas = 0;

  /// Mean and standard error, summed in sample order.
  static MCEstimate from_samples(std::span<const double> samples);
};

/// (mean - reference) / std_error; 0 when both sides agree exactly with zero error.
double z_score(const MCEstimate& estimate, double reference);

struct VerificationReport {
  std::string test_name;
  double alpha = 1.0;
  int dimension = 1;
  double time = 0.0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  MCEstimate estimate;
  double reference = 0.0;
  double z_score = 0.0;  // NaN for non-z criteria (see notes)
  bool pass = false;
  std::string notes;
};

std::string report_csv_header();
/// test_name,alpha,d,t,replicas,seed,estimate,stderr,reference,z_score,pass,notes
std::string to_csv_row(const VerificationReport& report);
void write_reports_csv(std::ostream& out, std::span<const VerificationReport> reports);

struct McOptions {
  std::size_t replicas = 10000;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  double z_max = 3.0;
  /// Added to every deterministic reference; non-zero only to exercise the failure path.
  double reference_offset = 0.0;
};

// ---------------------------------------------------------------------------
// Deterministic oracles. None of these touch the particle sampler or the
// heat/Cole-Hopf quadrature.
// ---------------------------------------------------------------------------

/// E f(x + sqrt(alpha t) xi) by the trapezoid rule with the given step on the
/// window x +- 9 sqrt(alpha t) (d <= 3).
double trapezoid_heat(const std::function<double(std::span<const double>)>& f, int dimension, double alpha, double t,
                      std::span<const double> x, double step);

/// ln prod_i P_t exp(-phi/alpha)(x_i): the Laplace transform of independent
/// particles, computed particle by particle with trapezoid_heat.
double log_laplace_product_oracle(const AtomicMeasure& nu, const TestFunction& phi, double t, double step);

/// Trapezoid integral of f over the bounding box of a ball (f must vanish on its boundary).
double integrate_over_ball(const std::function<double(std::span<const double>)>& f, int dimension, const Ball& ball,
                           double step);

/// Law of a sum of independent Bernoulli(p_i).
std::vector<double> poisson_binomial_pmf(std::span<const double> probabilities);

std::vector<double> poisson_pmf(double mean, std::size_t n_max);

/// (1/2) sum |p_k - q_k|, the shorter vector padded with zeros; mass of q
/// beyond its length (1 - sum q) counts as unmatched.
double total_variation(std::span<const double> empirical, std::span<const double> model);

/// PreconditionError unless phi >= 0 on a dense grid covering its support
/// (or [-10, 10]^d when the support is unknown).
void require_nonnegative(const TestFunction& phi);

// ---------------------------------------------------------------------------
// Monte Carlo verifications.
// ---------------------------------------------------------------------------

/// E exp(-<mu_t, phi>) against exp(-<nu, V_t phi>).
VerificationReport laplace_duality_test(const AtomicMeasure& nu, const TestFunction& phi, double t,
                                        const ColeHopf& colehopf, const McOptions& options);

/// Deterministic cross-check: -alpha ln prod_i P_t exp(-phi/alpha)(x_i) by the
/// trapezoid oracle against sum_i V_t phi(x_i) from the Cole-Hopf evaluator;
/// passes when the relative gap is below `tolerance`.
VerificationReport laplace_oracle_test(const AtomicMeasure& nu, const TestFunction& phi, double t,
                                       const ColeHopf& colehopf, double tolerance = 1e-8);

struct MartingaleStudy {
  VerificationReport mean;                 // E M_T(phi) = 0
  VerificationReport quadratic_variation;  // E M_T(phi)^2 = int_0^T <nu, P_s |grad phi|^2> ds
};

/// Simulates on a grid with 2 * grid_steps intervals; estimates use every
/// other point (grid_steps intervals) and the full grid is the refinement run.
/// A report fails if refinement moves its estimate by >= 0.5 standard errors.
MartingaleStudy martingale_study(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                 std::size_t grid_steps, const HeatEvaluator& heat, const McOptions& options);

VerificationReport martingale_mean_test(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                        std::size_t grid_steps, const HeatEvaluator& heat, const McOptions& options);

VerificationReport quadratic_variation_test(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                            std::size_t grid_steps, const HeatEvaluator& heat,
                                            const McOptions& options);

/// Deterministic int_0^T <nu, P_s |grad phi|^2> ds (Gauss-Legendre in s).
double quadratic_variation_reference(const AtomicMeasure& nu, const TestFunction& phi, double horizon,
                                     const HeatEvaluator& heat);

/// E exp(-<mu_t, V_{T-t} phi>) = exp(-<nu, V_T phi>) at t = T k / n, k = 1..n.
/// z_max is raised to 3.5 when n >= 10.
std::vector<VerificationReport> duality_martingale_test(const AtomicMeasure& nu, const TestFunction& phi,
                                                        double horizon, std::size_t time_points,
                                                        const ColeHopf& colehopf, const McOptions& options);

/// Integer mass, pmf of alpha mu_t(A) against the Poisson-binomial law, and
/// E s^{alpha mu_t(A)} against prod_i (1 + (s - 1) P_t 1_A(x_i)).
std::vector<VerificationReport> generating_function_test(const AtomicMeasure& nu, const Rectangle& region, double t,
                                                         std::span<const double> s_values, const HeatEvaluator& heat,
                                                         const McOptions& options);

struct BlowupRow {
  std::size_t truncation = 0;
  double time = 0.0;
  double partial_sum = 0.0;
};

/// S_K(t) = sum_{k <= K} P(B_t^k in A), B_0^k = sqrt(ln k) e_1, computed
/// exactly from normal CDFs. A defaults to [0, 1)^d.
std::vector<BlowupRow> blowup_scan(std::span<const std::size_t> truncations, std::span<const double> times,
                                   int dimension, double alpha = 1.0,
                                   const std::optional<Rectangle>& region = std::nullopt);

/// Dichotomy checks on a scan table: for t < 1/2 the relative change from
/// K_max / 100 (or the smallest K) to K_max is < 1e-2; for t >= 1/2 every S_{10K}/S_K >= 1.5.
std::vector<VerificationReport> blowup_checks(std::span<const BlowupRow> table, int dimension, double alpha = 1.0);

void write_blowup_csv(std::ostream& out, std::span<const BlowupRow> table);

/// Poisson(lambda) start on box + pad, evolved to t: per sub-box mean count and
/// pmf against Poisson(lambda vol), plus the Laplace functional of `phi`
/// against exp(-lambda int (1 - exp(-phi/alpha))) and against its own t = 0 value.
std::vector<VerificationReport> poisson_invariance_test(double lambda, const Rectangle& box, double pad, double t,
                                                        std::span<const Rectangle> sub_boxes, double alpha,
                                                        const std::optional<TestFunction>& phi,
                                                        const McOptions& options);

/// First and second moments of <mu_T, kappa> against heat-quadrature references.
std::vector<VerificationReport> moment_bound_test(const AtomicMeasure& nu, double horizon, const HeatEvaluator& heat,
                                                  const McOptions& options);

}  // namespace dklab
