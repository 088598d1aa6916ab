#include "dklab/measure.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "dklab/csv.hpp"
#include "dklab/errors.hpp"

namespace dklab {

AtomicMeasure::AtomicMeasure(double alpha, int dimension, std::vector<double> coordinates)
    : alpha_(alpha), dimension_(dimension), coords_(std::move(coordinates)) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be > 0");
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
  if (coords_.size() % static_cast<std::size_t>(dimension) != 0)
    throw ParameterError("coordinate array length is not a multiple of the dimension");
  for (double c : coords_)
    if (!std::isfinite(c)) throw ParameterError("atom coordinates must be finite");
}

AtomicMeasure::AtomicMeasure(double alpha, const std::vector<Point>& atoms, int dimension)
    : AtomicMeasure(alpha, dimension) {
  coords_.reserve(atoms.size() * static_cast<std::size_t>(dimension));
  for (const auto& a : atoms) {
    if (static_cast<int>(a.size()) != dimension) throw ParameterError("atom has the wrong dimension");
    for (double c : a)
      if (!std::isfinite(c)) throw ParameterError("atom coordinates must be finite");
    coords_.insert(coords_.end(), a.begin(), a.end());
  }
}

AtomicMeasure AtomicMeasure::with_alpha(double alpha) const { return {alpha, dimension_, coords_}; }

double pair_points(double alpha, int dimension, std::span<const double> coordinates, const TestFunction& f) {
  if (f.dimension() != dimension) throw ParameterError("pairing: dimension mismatch");
  const std::size_t d = static_cast<std::size_t>(dimension);
  double sum = 0.0;
  for (std::size_t i = 0; i < coordinates.size(); i += d) sum += f.value(coordinates.subspan(i, d));
  return sum / alpha;
}

double pair(const AtomicMeasure& mu, const TestFunction& f) {
  return pair_points(mu.alpha(), mu.dimension(), mu.coordinates(), f);
}

std::size_t count_atoms(const AtomicMeasure& mu, const Rectangle& a) {
  if (a.dimension() != mu.dimension()) throw ParameterError("count_in_rect: dimension mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (a.contains(mu.atom(i))) ++n;
  return n;
}

double count_in_rect(const AtomicMeasure& mu, const Rectangle& a) {
  return static_cast<double>(count_atoms(mu, a)) / mu.alpha();
}

AtomicMeasure sample_poisson(double lambda, const Rectangle& box, double pad, ReplicaRng& rng) {
  if (!(lambda > 0.0)) throw ParameterError("poisson intensity must be > 0");
  const Rectangle region = box.padded(pad);
  const int d = region.dimension();
  const std::uint64_t n = rng.poisson(lambda * region.volume());
  std::vector<double> coords(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      const double lo = region.lower()[k], hi = region.upper()[k];
      coords[i * d + k] = lo + (hi - lo) * rng.uniform();
    }
  return {1.0, d, std::move(coords)};
}

InitialFamily make_sqrt_log_family(std::size_t truncation, int dimension) {
  if (truncation == 0) throw ParameterError("sqrt-log family needs K >= 1");
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
  std::vector<double> coords(truncation * static_cast<std::size_t>(dimension), 0.0);
  for (std::size_t k = 1; k <= truncation; ++k)
    coords[(k - 1) * dimension] = std::sqrt(std::log(static_cast<double>(k)));
  InitialFamily family;
  family.kind = InitialKind::SqrtLogLattice;
  family.atoms = AtomicMeasure(1.0, dimension, std::move(coords));
  family.truncation = truncation;
  return family;
}

void write_atoms_csv(std::ostream& out, const AtomicMeasure& mu) {
  out << "alpha=" << format_real(mu.alpha()) << ",d=" << mu.dimension() << '\n';
  for (int k = 0; k < mu.dimension(); ++k) out << (k ? "," : "") << "x_" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto a = mu.atom(i);
    for (std::size_t k = 0; k < a.size(); ++k) out << (k ? "," : "") << format_real(a[k]);
    out << '\n';
  }
}

AtomicMeasure read_atoms_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("atom CSV: missing header");
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[0].rfind("alpha=", 0) != 0 || header[1].rfind("d=", 0) != 0)
    throw ParameterError("atom CSV: header must read alpha=<a>,d=<d>");
  const double alpha = std::stod(header[0].substr(6));
  const int d = std::stoi(header[1].substr(2));
  if (!std::getline(in, line)) throw ParameterError("atom CSV: missing column names");
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto row = split_csv_line(line);
    if (static_cast<int>(row.size()) != d) throw ParameterError("atom CSV: row has the wrong number of columns");
    for (const auto& v : row) coords.push_back(std::stod(v));
  }
  return {alpha, d, std::move(coords)};
}

}  // namespace dklab
