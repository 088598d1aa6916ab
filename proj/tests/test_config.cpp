#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dklab/config.hpp"
#include "dklab/experiment.hpp"

using namespace dklab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dk-lab-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Parse, MinimalConfigGetsDefaults) {
  const auto c =
      parse_config("experiment=laplace_duality, alpha=1, dimension=1, t=1, phi=gaussian(0,1,1), nu=atoms[0]");
  EXPECT_EQ(c.experiment, ExperimentKind::LaplaceDuality);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.dimension, 1);
  EXPECT_EQ(c.times, std::vector<double>{1.0});
  EXPECT_EQ(c.replicas, 10000u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.quad_nodes, 64);
  EXPECT_EQ(c.grid_steps, 200u);
  EXPECT_DOUBLE_EQ(c.pad, 6.0);
  ASSERT_TRUE(c.initial.has_value());
  EXPECT_EQ(c.initial->atoms.size(), 1u);
  ASSERT_TRUE(c.phi.has_value());
  EXPECT_DOUBLE_EQ(c.phi->value(std::vector<double>{0.0}), 1.0);
  EXPECT_EQ(c.output_path, "laplace_duality.csv");
}

TEST(Parse, NegativeAlphaCitesConstraint) {
  try {
    parse_config("alpha = -1");
    FAIL() << "no error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("alpha > 0"), std::string::npos) << e.what();
  }
}

TEST(Parse, BlowupLists) {
  const auto c = parse_config("experiment = blowup_scan, K = 100,1000,10000, t = 0.25,1.0");
  EXPECT_EQ(c.experiment, ExperimentKind::BlowupScan);
  EXPECT_EQ(c.truncations, (std::vector<std::size_t>{100, 1000, 10000}));
  EXPECT_EQ(c.times, (std::vector<double>{0.25, 1.0}));
}

TEST(Parse, BlowupDefaults) {
  const auto c = parse_config("experiment = blowup_scan");
  EXPECT_EQ(c.truncations, (std::vector<std::size_t>{100, 1000, 10000, 100000}));
  EXPECT_EQ(c.times, (std::vector<double>{0.25, 1.0}));
}

TEST(Parse, UnknownKeyNamesKeyAndLine) {
  try {
    parse_config("experiment = laplace_duality\n# comment\nalpah = 1\n");
    FAIL() << "no error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("alpah"), std::string::npos);
  }
}

TEST(Parse, TypeMismatch) {
  EXPECT_THROW(parse_config("experiment = laplace_duality\nreplicas = many\nphi = zero\nnu = atoms[0]"), ParseError);
  EXPECT_THROW(parse_config("experiment = laplace_duality\ndimension = 1.5\nphi = zero\nnu = atoms[0]"),
               ParseError);
  EXPECT_THROW(parse_config("experiment = nonsense"), ParseError);
  EXPECT_THROW(parse_config("experiment = laplace_duality\nalpha = 1\nalpha = 2"), ParseError);
}

TEST(Parse, IntegerInRealNotation) {
  const auto c = parse_config("experiment=laplace_duality, t=1, replicas=1e5, phi=zero, nu=atoms[0]");
  EXPECT_EQ(c.replicas, 100000u);
}

TEST(Parse, SectionsShareDefaults) {
  const auto cs = parse_config_file(
      "alpha = 2\nreplicas = 100\nt = 1\n"
      "[first]\nexperiment = laplace_duality\nphi = compact(0,1,1)\nnu = atoms[0, 1]\n"
      "[second]\nexperiment = generating_function\nalpha = 1\nnu = atoms[0]\nregion = [0,1)\n");
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].label, "first");
  EXPECT_EQ(cs[0].alpha, 2.0);
  EXPECT_EQ(cs[0].replicas, 100u);
  EXPECT_EQ(cs[1].alpha, 1.0);
  EXPECT_EQ(cs[1].output_path, "second.csv");
  EXPECT_THROW(parse_config("[a]\nexperiment=blowup_scan\n[b]\nexperiment=blowup_scan"), ValidationError);
}

TEST(Parse, Values) {
  const auto phi = parse_test_function("gaussian((1,2),0.5,3)", 2);
  EXPECT_DOUBLE_EQ(phi.value(std::vector<double>{1.0, 2.0}), 3.0);
  const auto broadcast = parse_test_function("compact(0,1,2)", 2);
  EXPECT_DOUBLE_EQ(broadcast.value(std::vector<double>{0.0, 0.0}), 2.0 / std::exp(1.0));
  const auto r = parse_rectangle("[0,1)x[-1,2)");
  EXPECT_EQ(r.dimension(), 2);
  EXPECT_DOUBLE_EQ(r.volume(), 3.0);
  const auto init = parse_initial("sqrt_log(5)", 1, 1.0);
  EXPECT_EQ(init.kind, InitialKind::SqrtLogLattice);
  EXPECT_EQ(init.atoms.size(), 5u);
  const auto atoms = parse_initial("atoms[(0,0),(1,2)]", 2, 0.5);
  EXPECT_EQ(atoms.atoms.size(), 2u);
  EXPECT_EQ(atoms.atoms.alpha(), 0.5);
  EXPECT_THROW(parse_test_function("triangle(0,1)", 1), ParseError);
  EXPECT_THROW(parse_rectangle("[0,1]"), ParseError);
}

TEST(Parse, EnvironmentSeed) {
  auto c = parse_config("experiment=blowup_scan, seed=3");
  ::setenv("DK_LAB_SEED", "99", 1);
  apply_environment(c);
  ::unsetenv("DK_LAB_SEED");
  EXPECT_EQ(c.seed, 99u);
  apply_environment(c);
  EXPECT_EQ(c.seed, 99u);
}

TEST(Run, ZeroTestFunctionPasses) {
  const auto dir = scratch("zero");
  std::ostringstream log;
  const auto c = parse_config("experiment=laplace_duality, t=1, phi=zero, nu=atoms[0, 2], replicas=500");
  const auto r = run_experiment(c, {1, dir}, log);
  EXPECT_TRUE(r.all_passed()) << log.str();
  EXPECT_EQ(exit_status(r), 0);
  EXPECT_TRUE(fs::exists(dir / "laplace_duality.csv"));
  EXPECT_NE(log.str().find("PASS"), std::string::npos);
}

TEST(Run, ForcedOffsetFails) {
  const auto dir = scratch("offset");
  std::ostringstream log;
  const auto c = parse_config(
      "experiment=laplace_duality, t=1, phi=gaussian(0,1,1), nu=atoms[0], replicas=1000, reference_offset=0.1");
  const auto r = run_experiment(c, {1, dir}, log);
  EXPECT_EQ(exit_status(r), 1);
  EXPECT_NE(log.str().find("FAIL"), std::string::npos);
}

TEST(Run, BlowupTableColumns) {
  const auto dir = scratch("blowup");
  std::ostringstream log;
  const auto c = parse_config("experiment=blowup_scan, K=1,10, t=1");
  run_experiment(c, {1, dir}, log);
  const auto text = read_file(dir / "blowup_scan.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "K,t,S_K");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Run, ByteIdenticalAcrossThreads) {
  const std::string text =
      "experiment=generating_function, alpha=0.5, dimension=2, t=0.5, nu=atoms[(0,0),(0.5,0.5),(1,-1)], "
      "region=[0,1)x[0,1), replicas=3000, seed=11";
  const auto c = parse_config(text);
  std::string first;
  for (unsigned threads : {1u, 4u, 1u}) {
    const auto dir = scratch("repro" + std::to_string(threads));
    std::ostringstream log;
    run_experiment(c, {threads, dir}, log);
    const auto out = read_file(dir / "generating_function.csv");
    ASSERT_FALSE(out.empty());
    if (first.empty()) first = out;
    EXPECT_EQ(out, first) << threads;
  }
}

TEST(Run, ErrorsCarryContext) {
  const auto dir = scratch("ctx");
  std::ostringstream log;
  const auto c = parse_config("experiment=laplace_duality, t=1, phi=constant(-1), nu=atoms[0], replicas=10");
  try {
    run_experiment(c, {1, dir}, log);
    FAIL() << "no error";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("laplace_duality"), std::string::npos) << e.what();
  }
}
