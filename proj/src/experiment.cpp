#include "dklab/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "dklab/colehopf.hpp"
#include "dklab/errors.hpp"

namespace dklab {

namespace {

std::filesystem::path resolve(const RunOptions& options, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : options.output_dir / p;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error(fmt::format("write to {} failed", path.string()));
}

template <class V>
void append(std::vector<VerificationReport>& out, V&& more) {
  for (auto& r : more) out.push_back(std::move(r));
}

std::string summary_line(const VerificationReport& r) {
  std::string line = fmt::format("{} {} d={} alpha={} t={}", r.pass ? "PASS" : "FAIL", r.test_name, r.dimension,
                                 r.alpha, r.time);
  if (std::isnan(r.z_score))
    line += fmt::format(" value={:.6g} reference={:.6g}", r.estimate.mean, r.reference);
  else
    line += fmt::format(" estimate={:.6g} se={:.3g} reference={:.6g} z={:.3f}", r.estimate.mean,
                        r.estimate.std_error, r.reference, r.z_score);
  if (!r.notes.empty()) line += " [" + r.notes + "]";
  return line;
}

}  // namespace

bool ExperimentResult::all_passed() const {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

int exit_status(const ExperimentResult& result) { return result.all_passed() ? 0 : 1; }

ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& options, std::ostream& log) {
  McOptions mc;
  mc.replicas = c.replicas;
  mc.seed = c.seed;
  mc.threads = options.threads;
  mc.z_max = c.z_max;
  mc.reference_offset = c.reference_offset;

  ExperimentResult result;
  auto& reports = result.reports;
  const std::filesystem::path out_path = resolve(options, c.output_path);

  auto context = [&c](const std::exception& e) {
    return fmt::format("experiment '{}' ({}): {}", c.label, to_string(c.experiment), e.what());
  };

  try {
    if (c.experiment == ExperimentKind::BlowupScan) {
      const auto table = blowup_scan(c.truncations, c.times, c.dimension, c.alpha, c.region);
      append(reports, blowup_checks(table, c.dimension, c.alpha));
      auto out = open_output(out_path);
      write_blowup_csv(out, table);
      close_output(out, out_path);
      result.files.push_back(out_path);
      std::filesystem::path reports_path = out_path;
      reports_path.replace_filename(out_path.stem().string() + "_reports" + out_path.extension().string());
      auto rout = open_output(reports_path);
      write_reports_csv(rout, reports);
      close_output(rout, reports_path);
      result.files.push_back(reports_path);
    } else {
      const HeatEvaluator heat(c.alpha, c.dimension, c.quad_nodes);
      const ColeHopf colehopf(heat);
      const AtomicMeasure nu = c.initial ? c.initial->atoms : AtomicMeasure(c.alpha, c.dimension);
      for (double t : c.times) {
        switch (c.experiment) {
          case ExperimentKind::LaplaceDuality:
            reports.push_back(laplace_duality_test(nu, *c.phi, t, colehopf, mc));
            reports.push_back(laplace_oracle_test(nu, *c.phi, t, colehopf));
            break;
          case ExperimentKind::Martingale: {
            auto study = martingale_study(nu, *c.phi, t, c.grid_steps, heat, mc);
            reports.push_back(std::move(study.mean));
            reports.push_back(std::move(study.quadratic_variation));
            break;
          }
          case ExperimentKind::MartingaleMean:
            reports.push_back(martingale_mean_test(nu, *c.phi, t, c.grid_steps, heat, mc));
            break;
          case ExperimentKind::QuadraticVariation:
            reports.push_back(quadratic_variation_test(nu, *c.phi, t, c.grid_steps, heat, mc));
            break;
          case ExperimentKind::DualityMartingale:
            append(reports, duality_martingale_test(nu, *c.phi, t, c.time_points, colehopf, mc));
            break;
          case ExperimentKind::GeneratingFunction:
            append(reports, generating_function_test(nu, *c.region, t, c.s_values, heat, mc));
            break;
          case ExperimentKind::PoissonInvariance:
            append(reports, poisson_invariance_test(c.initial->intensity, *c.box, c.pad, t, c.sub_boxes, c.alpha,
                                                    c.phi, mc));
            break;
          case ExperimentKind::MomentBound:
            append(reports, moment_bound_test(nu, t, heat, mc));
            break;
          case ExperimentKind::BlowupScan:
            break;
        }
      }
      auto out = open_output(out_path);
      write_reports_csv(out, reports);
      close_output(out, out_path);
      result.files.push_back(out_path);
    }
  } catch (const std::invalid_argument& e) {
    throw ParameterError(context(e));
  } catch (const PreconditionError& e) {
    throw PreconditionError(context(e));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(context(e));
  }

  for (const auto& r : reports) log << summary_line(r) << '\n';
  return result;
}

}  // namespace dklab
