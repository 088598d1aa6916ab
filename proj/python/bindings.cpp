#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dklab/colehopf.hpp"
#include "dklab/dynamics.hpp"
#include "dklab/experiment.hpp"

namespace py = pybind11;
using namespace dklab;

namespace {

std::vector<Point> atoms_of(const AtomicMeasure& mu) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < mu.size(); ++i) out.emplace_back(mu.atom(i).begin(), mu.atom(i).end());
  return out;
}

}  // namespace

PYBIND11_MODULE(_dklab, m) {
  m.doc() = "Dean-Kawasaki verification lab";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);

  py::class_<Rectangle>(m, "Rectangle")
      .def(py::init<Point, Point>(), py::arg("lower"), py::arg("upper"))
      .def_static("cube", &Rectangle::cube)
      .def_property_readonly("lower", &Rectangle::lower)
      .def_property_readonly("upper", &Rectangle::upper)
      .def_property_readonly("volume", &Rectangle::volume)
      .def("contains", [](const Rectangle& r, const Point& x) { return r.contains(std::span<const double>(x)); });

  py::class_<TestFunction>(m, "TestFunction")
      .def_property_readonly("dimension", &TestFunction::dimension)
      .def_property_readonly("family", [](const TestFunction& f) { return std::string(to_string(f.family())); })
      .def("__call__", [](const TestFunction& f, const Point& x) { return f.value(x); })
      .def("gradient", [](const TestFunction& f, const Point& x) { return f.gradient(x); })
      .def("laplacian", [](const TestFunction& f, const Point& x) { return f.laplacian(x); })
      .def("__rmul__", [](const TestFunction& f, double c) { return c * f; })
      .def("__add__", [](const TestFunction& f, const TestFunction& g) { return f + g; });

  m.def("gaussian_bump", &make_gaussian_bump, py::arg("dimension"), py::arg("center"), py::arg("width"),
        py::arg("amplitude"));
  m.def("compact_bump", &make_compact_bump, py::arg("dimension"), py::arg("center"), py::arg("radius"),
        py::arg("amplitude"));
  m.def("kappa", &make_kappa, py::arg("dimension"));
  m.def("constant", &make_constant, py::arg("dimension"), py::arg("value"));

  py::class_<AtomicMeasure>(m, "AtomicMeasure")
      .def(py::init([](double alpha, const std::vector<Point>& atoms, int d) { return AtomicMeasure(alpha, atoms, d); }),
           py::arg("alpha"), py::arg("atoms"), py::arg("dimension"))
      .def_property_readonly("alpha", &AtomicMeasure::alpha)
      .def_property_readonly("dimension", &AtomicMeasure::dimension)
      .def_property_readonly("atoms", &atoms_of)
      .def("__len__", &AtomicMeasure::size)
      .def("pair", [](const AtomicMeasure& mu, const TestFunction& f) { return pair(mu, f); })
      .def("count_in", [](const AtomicMeasure& mu, const Rectangle& a) { return count_in_rect(mu, a); });

  m.def("sqrt_log_atoms", [](std::size_t k, int d) { return make_sqrt_log_family(k, d).atoms; });

  py::class_<HeatEvaluator>(m, "HeatEvaluator")
      .def(py::init<double, int, int>(), py::arg("alpha"), py::arg("dimension"), py::arg("quad_nodes") = 64)
      .def("apply", [](const HeatEvaluator& h, const TestFunction& f, double t,
                       const Point& x) { return h.apply(f, t, x); })
      .def("indicator", [](const HeatEvaluator& h, const Rectangle& a, double t,
                           const Point& x) { return h.indicator(a, t, x); })
      .def("pair", [](const HeatEvaluator& h, const AtomicMeasure& nu, const TestFunction& f,
                      double t) { return h.pair(nu, f, t); });

  py::class_<ColeHopf>(m, "ColeHopf")
      .def(py::init<double, int, int>(), py::arg("alpha"), py::arg("dimension"), py::arg("quad_nodes") = 64)
      .def("value", [](const ColeHopf& c, const TestFunction& f, double t, const Point& x) { return c.value(f, t, x); })
      .def("gradient", [](const ColeHopf& c, const TestFunction& f, double t,
                          const Point& x) { return c.gradient(f, t, x); })
      .def("laplacian", [](const ColeHopf& c, const TestFunction& f, double t,
                           const Point& x) { return c.laplacian(f, t, x); })
      .def("hj_residual", [](const ColeHopf& c, const TestFunction& f, double t,
                             const Point& x) { return c.hj_residual(f, t, x); });

  py::class_<ParticleEnsemble>(m, "ParticleEnsemble")
      .def(py::init<const AtomicMeasure&, std::uint64_t, std::uint64_t>(), py::arg("initial"), py::arg("seed"),
           py::arg("replica"))
      .def_property_readonly("time", &ParticleEnsemble::time)
      .def("advance", &ParticleEnsemble::advance)
      .def("measure", &ParticleEnsemble::measure)
      .def("pair", &ParticleEnsemble::pair);

  py::class_<MCEstimate>(m, "MCEstimate")
      .def_readonly("mean", &MCEstimate::mean)
      .def_readonly("std_error", &MCEstimate::std_error)
      .def_readonly("replicas", &MCEstimate::replicas);

  py::class_<VerificationReport>(m, "VerificationReport")
      .def_readonly("test_name", &VerificationReport::test_name)
      .def_readonly("alpha", &VerificationReport::alpha)
      .def_readonly("dimension", &VerificationReport::dimension)
      .def_readonly("time", &VerificationReport::time)
      .def_readonly("estimate", &VerificationReport::estimate)
      .def_readonly("reference", &VerificationReport::reference)
      .def_readonly("z_score", &VerificationReport::z_score)
      .def_readonly("passed", &VerificationReport::pass)
      .def_readonly("notes", &VerificationReport::notes)
      .def("csv_row", &to_csv_row);

  auto options = [](std::size_t replicas, std::uint64_t seed, unsigned threads) {
    McOptions o;
    o.replicas = replicas;
    o.seed = seed;
    o.threads = threads;
    return o;
  };
  m.def(
      "laplace_duality_test",
      [options](const AtomicMeasure& nu, const TestFunction& phi, double t, std::size_t replicas, std::uint64_t seed,
                unsigned threads, int quad_nodes) {
        py::gil_scoped_release release;
        return laplace_duality_test(nu, phi, t, ColeHopf(nu.alpha(), nu.dimension(), quad_nodes),
                                    options(replicas, seed, threads));
      },
      py::arg("nu"), py::arg("phi"), py::arg("t"), py::arg("replicas") = 10000, py::arg("seed") = 42,
      py::arg("threads") = 1, py::arg("quad_nodes") = 64);
  m.def(
      "generating_function_test",
      [options](const AtomicMeasure& nu, const Rectangle& region, double t, std::vector<double> s_values,
                std::size_t replicas, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        return generating_function_test(nu, region, t, s_values, HeatEvaluator(nu.alpha(), nu.dimension()),
                                        options(replicas, seed, threads));
      },
      py::arg("nu"), py::arg("region"), py::arg("t"), py::arg("s_values"), py::arg("replicas") = 10000,
      py::arg("seed") = 42, py::arg("threads") = 1);
  m.def(
      "blowup_scan",
      [](std::vector<std::size_t> k_values, std::vector<double> t_values, int d, double alpha) {
        std::vector<std::tuple<std::size_t, double, double>> rows;
        for (const auto& r : blowup_scan(k_values, t_values, d, alpha)) rows.emplace_back(r.truncation, r.time, r.partial_sum);
        return rows;
      },
      py::arg("k_values"), py::arg("t_values"), py::arg("dimension") = 1, py::arg("alpha") = 1.0);

  m.def(
      "run_config",
      [](const std::string& text, const std::filesystem::path& output_dir, unsigned threads) {
        std::ostringstream log;
        std::vector<VerificationReport> reports;
        for (auto& cfg : parse_config_file(text)) {
          auto result = run_experiment(cfg, {threads, output_dir}, log);
          reports.insert(reports.end(), result.reports.begin(), result.reports.end());
        }
        return std::make_pair(reports, log.str());
      },
      py::arg("text"), py::arg("output_dir"), py::arg("threads") = 1);
  m.def("selftest", [] {
    std::ostringstream log;
    const int failures = run_selftest(log);
    return std::make_pair(failures, log.str());
  });
}
