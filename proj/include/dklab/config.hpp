#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dklab/errors.hpp"
#include "dklab/geometry.hpp"
#include "dklab/measure.hpp"
#include "dklab/testfn.hpp"

namespace dklab {

enum class ExperimentKind {
  LaplaceDuality,
  Martingale,  // mean and quadratic variation from one simulation
  MartingaleMean,
  QuadraticVariation,
  DualityMartingale,
  GeneratingFunction,
  BlowupScan,
  PoissonInvariance,
  MomentBound,
};

std::string_view to_string(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> experiment_from_string(std::string_view name) noexcept;

/// Malformed text: unknown key, bad syntax or a value of the wrong type.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed config that violates an experiment precondition.
class ValidationError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct ExperimentConfig {
  std::string label;  // section name, or the experiment name without sections
  ExperimentKind experiment = ExperimentKind::LaplaceDuality;
  double alpha = 1.0;
  int dimension = 1;
  std::vector<double> times;  // t values; each one is run (horizons for path experiments)

  std::optional<InitialFamily> initial;
  std::string initial_text;
  std::optional<TestFunction> phi;
  std::string phi_text;

  std::size_t replicas = 10000;
  std::uint64_t seed = 42;
  int quad_nodes = 64;
  std::size_t grid_steps = 200;

  std::optional<Rectangle> box;   // Poisson sampling box
  double pad = 0.0;               // default 6 sqrt(alpha max t)
  std::vector<Rectangle> sub_boxes;
  std::optional<Rectangle> region;
  std::vector<double> s_values{0.1, 0.5, 0.9, 1.0};
  std::size_t time_points = 10;
  std::vector<std::size_t> truncations{100, 1000, 10000, 100000};

  double z_max = 3.0;
  double reference_offset = 0.0;  // debug: shifts every reference to force failures
  std::string output_path;        // relative paths resolve against the run's output directory
};

/// All experiments in a config text. Lines are `key = value`; several
/// assignments may share a line separated by commas. `[name]` starts a new
/// experiment section; keys before the first section are shared defaults.
/// `#` starts a comment.
std::vector<ExperimentConfig> parse_config_file(std::string_view text);

/// Exactly one experiment; ValidationError when the text defines several.
ExperimentConfig parse_config(std::string_view text);

/// DK_LAB_SEED, when set, replaces the master seed.
void apply_environment(ExperimentConfig& config);

/// Parsers for individual values, exposed for tests.
TestFunction parse_test_function(std::string_view text, int dimension);
InitialFamily parse_initial(std::string_view text, int dimension, double alpha);
Rectangle parse_rectangle(std::string_view text);

}  // namespace dklab
