#include "dklab/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>

#include <fmt/format.h>

namespace dklab {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 9> kExperimentNames{{
    {ExperimentKind::LaplaceDuality, "laplace_duality"},
    {ExperimentKind::Martingale, "martingale"},
    {ExperimentKind::MartingaleMean, "martingale_mean"},
    {ExperimentKind::QuadraticVariation, "quadratic_variation"},
    {ExperimentKind::DualityMartingale, "duality_martingale"},
    {ExperimentKind::GeneratingFunction, "generating_function"},
    {ExperimentKind::BlowupScan, "blowup_scan"},
    {ExperimentKind::PoissonInvariance, "poisson_invariance"},
    {ExperimentKind::MomentBound, "moment_bound"},
}};

constexpr std::array<std::string_view, 21> kKeys{
    "experiment", "alpha",     "dimension",   "t",       "T",      "nu",       "phi",
    "replicas",   "seed",      "quad_nodes",  "grid_steps", "box", "pad",      "sub_boxes",
    "region",     "s_values",  "time_points", "K",       "z_max",  "reference_offset", "output",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of an identifier followed by optional blanks and '=', or 0.
std::size_t assignment_head(std::string_view s) {
  s = trim(s);
  if (s.empty() || !is_ident_start(s.front())) return 0;
  std::size_t i = 1;
  while (i < s.size() && is_ident_char(s[i])) ++i;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i < s.size() && s[i] == '=' ? i : 0;
}

// Splits at commas outside any bracket pair. With `assignments_only`, a comma
// splits only when an assignment (`ident =`) follows it.
std::vector<std::string_view> split_top_level(std::string_view s, bool assignments_only) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    else if (c == ')' || c == ']') --depth;
    else if (c == ',' && depth == 0 && (!assignments_only || assignment_head(s.substr(i + 1)) > 0)) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(s.substr(start)));
  return parts;
}

double parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw ParseError(fmt::format("expected a real number, got '{}'", s), 0);
  return v;
}

std::uint64_t parse_unsigned(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    // Accept integral values written as reals, e.g. 1e5.
    double r = 0.0;
    try {
      r = parse_real(s);
    } catch (const ParseError&) {
      throw ParseError(fmt::format("expected a non-negative integer, got '{}'", s), 0);
    }
    if (!(r >= 0.0) || r != std::floor(r) || r > 1.8e19)
      throw ParseError(fmt::format("expected a non-negative integer, got '{}'", s), 0);
    return static_cast<std::uint64_t>(r);
  }
  return v;
}

std::vector<double> parse_real_list(std::string_view s) {
  std::vector<double> out;
  for (auto part : split_top_level(s, false)) out.push_back(parse_real(part));
  return out;
}

// `name(args)` -> name, args; plain `name` -> name, nullopt.
std::pair<std::string_view, std::optional<std::string_view>> parse_call(std::string_view s) {
  s = trim(s);
  const auto open = s.find('(');
  if (open == std::string_view::npos) return {s, std::nullopt};
  if (s.back() != ')') throw ParseError(fmt::format("unbalanced parentheses in '{}'", s), 0);
  return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

// Scalar (repeated along every axis) or tuple (x1, ..., xd).
Point parse_point(std::string_view s, int dimension) {
  s = trim(s);
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') throw ParseError(fmt::format("unbalanced parentheses in '{}'", s), 0);
    Point p = parse_real_list(s.substr(1, s.size() - 2));
    if (static_cast<int>(p.size()) != dimension)
      throw ParseError(fmt::format("point '{}' has {} coordinates, dimension is {}", s, p.size(), dimension), 0);
    return p;
  }
  return Point(dimension, parse_real(s));
}

std::vector<std::string_view> call_args(std::string_view name, const std::optional<std::string_view>& args,
                                        std::size_t expected) {
  if (!args) throw ParseError(fmt::format("{} needs {} arguments", name, expected), 0);
  auto parts = split_top_level(*args, false);
  if (parts.size() != expected)
    throw ParseError(fmt::format("{} needs {} arguments, got {}", name, expected, parts.size()), 0);
  return parts;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};
using Section = std::map<std::string, Entry, std::less<>>;

template <class F>
auto with_line(const Entry& e, F&& f) {
  try {
    return f(std::string_view(e.value));
  } catch (const ParseError& err) {
    throw ParseError(err.what(), e.line);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::invalid_argument& err) {
    throw ValidationError(fmt::format("line {}: {}", e.line, err.what()));
  }
}

void require(bool condition, std::string_view constraint) {
  if (!condition) throw ValidationError(fmt::format("constraint violated: {}", constraint));
}

ExperimentConfig build(const std::string& label, const Section& s) {
  ExperimentConfig c;
  auto find = [&s](std::string_view key) -> const Entry* {
    const auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
  };

  // Values are parsed (and type-checked) before presence is required, so a
  // malformed or out-of-range value is reported ahead of a missing key.
  const Entry* experiment = find("experiment");
  if (experiment) {
    const auto kind = experiment_from_string(trim(experiment->value));
    if (!kind) throw ParseError(fmt::format("unknown experiment '{}'", trim(experiment->value)), experiment->line);
    c.experiment = *kind;
  }
  c.label = label.empty() && experiment ? std::string(to_string(c.experiment)) : label;

  if (auto e = find("alpha")) c.alpha = with_line(*e, parse_real);
  require(c.alpha > 0.0 && std::isfinite(c.alpha), "alpha > 0");
  if (auto e = find("dimension")) c.dimension = static_cast<int>(with_line(*e, parse_unsigned));
  require(c.dimension >= 1 && c.dimension <= 3, "1 <= dimension <= 3");

  const Entry* t_entry = find("t");
  if (const Entry* upper = find("T")) {
    if (t_entry) throw ParseError("'t' and 'T' are the same key", upper->line);
    t_entry = upper;
  }
  if (t_entry) c.times = with_line(*t_entry, parse_real_list);
  else if (experiment && c.experiment == ExperimentKind::BlowupScan) c.times = {0.25, 1.0};
  for (double t : c.times) require(t >= 0.0 && std::isfinite(t), "t >= 0");

  if (auto e = find("replicas")) c.replicas = with_line(*e, parse_unsigned);
  if (auto e = find("seed")) c.seed = with_line(*e, parse_unsigned);
  if (auto e = find("quad_nodes")) c.quad_nodes = static_cast<int>(with_line(*e, parse_unsigned));
  if (auto e = find("grid_steps")) c.grid_steps = with_line(*e, parse_unsigned);
  if (auto e = find("time_points")) c.time_points = with_line(*e, parse_unsigned);
  if (auto e = find("z_max")) c.z_max = with_line(*e, parse_real);
  if (auto e = find("reference_offset")) c.reference_offset = with_line(*e, parse_real);
  if (auto e = find("s_values")) c.s_values = with_line(*e, parse_real_list);
  if (auto e = find("K")) {
    c.truncations.clear();
    for (double k : with_line(*e, parse_real_list)) {
      require(k >= 1.0 && k == std::floor(k), "K values are positive integers");
      c.truncations.push_back(static_cast<std::size_t>(k));
    }
  }
  require(c.replicas >= 2, "replicas >= 2");
  require(c.quad_nodes >= 8, "quad_nodes >= 8");
  require(c.grid_steps >= 1, "grid_steps >= 1");
  require(c.time_points >= 1, "time_points >= 1");
  require(c.z_max > 0.0, "z_max > 0");
  for (double sv : c.s_values) require(sv > 0.0 && sv <= 1.0, "s values in (0, 1]");
  for (std::size_t i = 1; i < c.truncations.size(); ++i)
    require(c.truncations[i] > c.truncations[i - 1], "K values increasing");

  const int d = c.dimension;
  auto rect = [d](std::string_view v) {
    Rectangle r = parse_rectangle(v);
    if (r.dimension() != d) throw ParseError(fmt::format("rectangle '{}' does not have dimension {}", v, d), 0);
    return r;
  };
  if (auto e = find("box")) c.box = with_line(*e, rect);
  if (auto e = find("region")) c.region = with_line(*e, rect);
  if (auto e = find("sub_boxes"))
    c.sub_boxes = with_line(*e, [&](std::string_view v) {
      std::vector<Rectangle> out;
      for (auto part : split_top_level(v, false)) out.push_back(rect(part));
      return out;
    });

  if (auto e = find("phi")) {
    c.phi = with_line(*e, [d](std::string_view v) { return parse_test_function(v, d); });
    c.phi_text = std::string(trim(e->value));
  }
  if (auto e = find("nu")) {
    c.initial = with_line(*e, [&](std::string_view v) { return parse_initial(v, d, c.alpha); });
    c.initial_text = std::string(trim(e->value));
  }

  std::optional<double> pad;
  if (auto e = find("pad")) pad = with_line(*e, parse_real);
  if (auto e = find("output")) c.output_path = std::string(trim(e->value));

  if (!experiment)
    throw ValidationError(fmt::format("experiment '{}': the key 'experiment' is required", label));
  require(!c.times.empty(), "t is required");
  const double t_max = *std::max_element(c.times.begin(), c.times.end());
  c.pad = pad.value_or(6.0 * std::sqrt(c.alpha * t_max));
  if (c.output_path.empty()) c.output_path = c.label + ".csv";

  const bool poisson = c.initial && c.initial->kind == InitialKind::PoissonOnBox;
  switch (c.experiment) {
    case ExperimentKind::BlowupScan:
      require(!c.truncations.empty(), "K is non-empty");
      for (double t : c.times) require(t > 0.0, "t > 0");
      break;
    case ExperimentKind::PoissonInvariance:
      require(poisson, "nu = poisson(lambda) for poisson_invariance");
      require(c.box.has_value(), "box is required for poisson_invariance");
      require(c.pad >= 6.0 * std::sqrt(c.alpha * t_max) * (1.0 - 1e-12), "pad >= 6 sqrt(alpha t)");
      if (c.sub_boxes.empty()) c.sub_boxes.push_back(*c.box);
      for (const auto& sb : c.sub_boxes) require(c.box->contains(sb), "sub_boxes inside box");
      if (c.phi) require(c.phi->support().has_value(), "phi compactly supported");
      break;
    default:
      require(c.initial.has_value(), "nu is required");
      require(!poisson, "nu = poisson(lambda) only for poisson_invariance");
      break;
  }
  switch (c.experiment) {
    case ExperimentKind::LaplaceDuality:
    case ExperimentKind::Martingale:
    case ExperimentKind::MartingaleMean:
    case ExperimentKind::QuadraticVariation:
      require(c.phi.has_value(), "phi is required");
      break;
    case ExperimentKind::DualityMartingale:
      require(c.phi.has_value(), "phi is required");
      require(c.phi->support().has_value() && c.phi->family() != Family::GaussianBump, "phi compactly supported");
      for (double t : c.times) require(t > 0.0, "t > 0");
      break;
    case ExperimentKind::GeneratingFunction:
      require(c.region.has_value(), "region is required");
      for (double t : c.times) require(t > 0.0, "t > 0");
      break;
    default:
      break;
  }
  if (c.experiment == ExperimentKind::Martingale || c.experiment == ExperimentKind::MartingaleMean ||
      c.experiment == ExperimentKind::QuadraticVariation)
    for (double t : c.times) require(t > 0.0, "t > 0");
  return c;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  for (const auto& [k, name] : kExperimentNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view name) noexcept {
  for (const auto& [k, n] : kExperimentNames)
    if (n == name) return k;
  return std::nullopt;
}

ParseError::ParseError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

Rectangle parse_rectangle(std::string_view text) {
  Point lo, hi;
  std::string_view rest = trim(text);
  while (true) {
    if (rest.empty() || rest.front() != '[')
      throw ParseError(fmt::format("rectangle '{}' must look like [a,b) or [a,b)x[c,d)", text), 0);
    const auto close = rest.find(')');
    if (close == std::string_view::npos)
      throw ParseError(fmt::format("rectangle '{}' must use half-open intervals [a,b)", text), 0);
    const auto ends = parse_real_list(rest.substr(1, close - 1));
    if (ends.size() != 2) throw ParseError(fmt::format("interval in '{}' needs two endpoints", text), 0);
    lo.push_back(ends[0]);
    hi.push_back(ends[1]);
    rest = trim(rest.substr(close + 1));
    if (rest.empty()) break;
    if (rest.front() != 'x' && rest.front() != '*')
      throw ParseError(fmt::format("rectangle '{}': intervals are joined with 'x'", text), 0);
    rest = trim(rest.substr(1));
  }
  return Rectangle(lo, hi);
}

TestFunction parse_test_function(std::string_view text, int dimension) {
  const auto [name, args] = parse_call(text);
  if (name == "zero" && !args) return make_constant(dimension, 0.0);
  if (name == "kappa" && (!args || trim(*args).empty())) return make_kappa(dimension);
  if (name == "constant") return make_constant(dimension, parse_real(call_args(name, args, 1)[0]));
  if (name == "gaussian" || name == "compact") {
    const auto a = call_args(name, args, 3);
    Point center = parse_point(a[0], dimension);
    const double width = parse_real(a[1]), amplitude = parse_real(a[2]);
    return name == "gaussian" ? make_gaussian_bump(dimension, std::move(center), width, amplitude)
                              : make_compact_bump(dimension, std::move(center), width, amplitude);
  }
  throw ParseError(
      fmt::format("unknown test function '{}' (gaussian(c,s,a), compact(c,r,a), kappa, constant(c), zero)", text), 0);
}

InitialFamily parse_initial(std::string_view text, int dimension, double alpha) {
  const std::string_view s = trim(text);
  if (s.starts_with("atoms[")) {
    if (s.back() != ']') throw ParseError(fmt::format("unbalanced brackets in '{}'", s), 0);
    const auto inner = trim(s.substr(6, s.size() - 7));
    std::vector<double> coords;
    if (!inner.empty())
      for (auto part : split_top_level(inner, false)) {
        const auto p = trim(part);
        if (dimension > 1 && (p.empty() || p.front() != '('))
          throw ParseError(fmt::format("atom '{}' must be a tuple of {} coordinates", p, dimension), 0);
        const Point x = parse_point(p, dimension);
        coords.insert(coords.end(), x.begin(), x.end());
      }
    InitialFamily f;
    f.kind = InitialKind::ExplicitList;
    f.atoms = AtomicMeasure(alpha, dimension, std::move(coords));
    return f;
  }
  const auto [name, args] = parse_call(s);
  if (name == "sqrt_log") {
    const std::uint64_t k = parse_unsigned(call_args(name, args, 1)[0]);
    InitialFamily f = make_sqrt_log_family(k, dimension);
    f.atoms = f.atoms.with_alpha(alpha);
    return f;
  }
  if (name == "poisson") {
    InitialFamily f;
    f.kind = InitialKind::PoissonOnBox;
    f.atoms = AtomicMeasure(alpha, dimension);
    f.intensity = parse_real(call_args(name, args, 1)[0]);
    if (!(f.intensity > 0.0)) throw ValidationError("constraint violated: lambda > 0");
    return f;
  }
  throw ParseError(fmt::format("unknown initial condition '{}' (atoms[...], sqrt_log(K), poisson(lambda))", s), 0);
}

std::vector<ExperimentConfig> parse_config_file(std::string_view text) {
  Section shared;
  std::vector<std::pair<std::string, Section>> sections;
  Section* current = &shared;
  std::size_t line_no = 0;
  while (!text.empty() || line_no == 0) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (text.empty()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("section header must look like [name]", line_no);
      const auto name = trim(line.substr(1, line.size() - 2));
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_ident_char))
        throw ParseError(fmt::format("invalid section name '{}'", name), line_no);
      for (const auto& [existing, _] : sections)
        if (existing == name) throw ParseError(fmt::format("duplicate section '{}'", name), line_no);
      sections.emplace_back(std::string(name), shared);
      current = &sections.back().second;
      continue;
    }
    for (auto assignment : split_top_level(line, true)) {
      const auto eq = assignment.find('=');
      if (eq == std::string_view::npos)
        throw ParseError(fmt::format("expected key = value, got '{}'", assignment), line_no);
      const std::string key(trim(assignment.substr(0, eq)));
      const auto value = trim(assignment.substr(eq + 1));
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
        throw ParseError(fmt::format("unknown key '{}'", key), line_no);
      if (value.empty()) throw ParseError(fmt::format("key '{}' has no value", key), line_no);
      // Section keys override shared defaults, but a key may not repeat within one block.
      const bool in_shared = current == &shared;
      auto it = current->find(key);
      if (it != current->end() && (in_shared || !shared.contains(key) || shared.at(key).line != it->second.line))
        throw ParseError(fmt::format("duplicate key '{}'", key), line_no);
      (*current)[key] = Entry{std::string(value), line_no};
    }
  }
  std::vector<ExperimentConfig> out;
  if (sections.empty()) {
    out.push_back(build("", shared));
  } else {
    for (const auto& [name, section] : sections) out.push_back(build(name, section));
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  auto all = parse_config_file(text);
  if (all.size() != 1) throw ValidationError("expected exactly one experiment section");
  return std::move(all.front());
}

void apply_environment(ExperimentConfig& config) {
  if (const char* env = std::getenv("DK_LAB_SEED"); env && *env) {
    try {
      config.seed = parse_unsigned(env);
    } catch (const ParseError&) {
      throw ValidationError(fmt::format("DK_LAB_SEED='{}' is not a non-negative integer", env));
    }
  }
}

}  // namespace dklab
