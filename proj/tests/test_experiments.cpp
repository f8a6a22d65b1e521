#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shellvi/errors.hpp"
#include "shellvi/experiments.hpp"
#include "shellvi/system_io.hpp"

namespace shellvi {
namespace {

namespace fs = std::filesystem;

const char* kCylinder =
    "chart = cylinder\n"
    "swap = true\n"
    "bounds = 0, 2, 0.1, 3.041592653589793\n"
    "clamped_edges = bottom,right,top,left\n"
    "lambda = 1\n"
    "mu = 1\n"
    "q = 0 0 1\n"
    "nx = 4\n"
    "ny = 4\n"
    "nz = 2\n"
    "eps = 0.2 0.1\n";

std::string expect_config_error(const std::string& text) {
  try {
    experiment_config(Config::parse(text));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path p = fs::temp_directory_path() / ("shellvi_test_" + name);
  std::ofstream(p) << contents;
  return p;
}

int run_cli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "shellvi");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  ::testing::internal::CaptureStderr();
  ::testing::internal::CaptureStdout();
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  (void)::testing::internal::GetCapturedStdout();
  const std::string e = ::testing::internal::GetCapturedStderr();
  if (err) *err = e;
  return code;
}

TEST(Config, ParsesKeysCommentsAndOverrides) {
  const Config c = Config::parse("# header\na = 1.5  # trailing\nb = x y\na = 2\nlist = 1, 2 3\nflag = true\n");
  EXPECT_DOUBLE_EQ(c.get_double("a"), 2.0);
  EXPECT_EQ(c.get_string("b"), "x y");
  EXPECT_EQ(c.get_list("list"), (std::vector<double>{1, 2, 3}));
  EXPECT_TRUE(c.get_bool("flag"));
  EXPECT_EQ(c.get_int("missing", 7), 7);
  EXPECT_THROW(Config::parse("no equals sign\n"), Error);
}

TEST(Config, ErrorsNameTheKey) {
  const Config c = Config::parse("n = 2.5\n");
  try {
    c.get_int("n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'n'"), std::string::npos);
  }
  try {
    c.get_double("absent");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'absent'"), std::string::npos);
  }
}

TEST(ExperimentConfig, ValidatesInvariants) {
  const std::string base(kCylinder);
  EXPECT_NO_THROW(experiment_config(Config::parse(base)));
  EXPECT_NE(expect_config_error(base + "q = 0 0 2\n").find("'q'"), std::string::npos);
  EXPECT_NE(expect_config_error(base + "eps = 0.1 0.2\n").find("'eps'"), std::string::npos);
  EXPECT_NE(expect_config_error(base + "nz = 1\n").find("nz"), std::string::npos);
  EXPECT_NE(expect_config_error(base + "F33 = sin(\n").find("'F33'"), std::string::npos);
  EXPECT_NE(expect_config_error(base + "averaging = midpoint\n").find("'averaging'"), std::string::npos);
  EXPECT_NE(expect_config_error("chart = plate\n").find("'bounds'"), std::string::npos);
}

TEST(Expression, Evaluates) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0, 0, 0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2")(0, 0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0, 0, 0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("y1 * y2 - x3")(2, 3, 1), 5.0);
  EXPECT_NEAR(Expression::parse("sin(pi / 2) + sqrt(abs(-4))")(0, 0, 0), 3.0, 1e-15);
  EXPECT_TRUE(Expression::parse("2 * pi").is_constant());
  EXPECT_FALSE(Expression::parse("y1").is_constant());
  EXPECT_THROW(Expression::parse("1 +"), Error);
  EXPECT_THROW(Expression::parse("foo(1)"), Error);
  EXPECT_THROW(Expression::parse("(1"), Error);
}

TEST(SystemFile, AtomicWriteAndLoad) {
  const fs::path p = fs::temp_directory_path() / "shellvi_test_system.txt";
  std::mt19937_64 rng(4);
  const QuadraticProgram qp = testing::random_qp(6, 2, rng);
  save_system(p.string(), qp);
  const QuadraticProgram back = load_system(p.string());
  EXPECT_EQ(back.f, qp.f);
  write_file_atomic(p.string(), "replaced\n");
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "replaced");
  fs::remove(p);
  EXPECT_THROW(load_system((fs::temp_directory_path() / "shellvi_no_such_file").string()), Error);
}

TEST(Cli, MissingKeyExitsOneAndNamesIt) {
  const fs::path cfg = temp_file("missing.cfg", "chart = cylinder\nbounds = 0, 2, 0.1, 3\nclamped_edges = left\nlambda = 1\nq = 0 0 1\n");
  std::string err;
  EXPECT_EQ(run_cli({"sweep", "-c", cfg.string(), "-o", "-"}, &err), 1);
  EXPECT_NE(err.find("'mu'"), std::string::npos) << err;
  fs::remove(cfg);
}

TEST(Cli, FailedAlignmentExitsTwo) {
  const fs::path cfg = temp_file(
      "down.cfg",
      "chart = plate\nbounds = 0, 1, 0, 1\nclamped_edges = bottom\nlambda = 1\nmu = 1\nq = 0 0 -1\n"
      "offset = 0 0 -1\n");
  std::string err;
  EXPECT_EQ(run_cli({"sweep", "-c", cfg.string(), "-o", "-"}, &err), 2);
  EXPECT_NE(err.find("hypothesis (dpcmp) failed"), std::string::npos) << err;
  fs::remove(cfg);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_NE(run_cli({"bogus"}), 0);
}

TEST(Cli, Solve2dFromSystemFile) {
  const fs::path sys = fs::temp_directory_path() / "shellvi_test_cli_system.txt";
  std::mt19937_64 rng(8);
  save_system(sys.string(), testing::random_qp(6, 2, rng));
  const fs::path out = fs::temp_directory_path() / "shellvi_test_cli_solution.json";
  EXPECT_EQ(run_cli({"solve2d", "--system", sys.string(), "-o", out.string()}), 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("\"certified\": true"), std::string::npos);
  fs::remove(sys);
  fs::remove(out);
}

TEST(Sweep, ZeroLoadGivesZeroGaps) {
  const ExperimentConfig x = experiment_config(Config::parse(kCylinder));
  const SweepReport rep = run_sweep(x);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const SweepRow& r : rep.rows) {
    EXPECT_EQ(r.gap, 0.0);
    EXPECT_EQ(r.active3d, 0);
    EXPECT_TRUE(r.certified);
  }
  EXPECT_GT(rep.hypotheses.margin, 0.0);
  EXPECT_GT(rep.hypotheses.alignment, 0.0);
}

TEST(Sweep, DeterministicReport) {
  const ExperimentConfig x = experiment_config(Config::parse(std::string(kCylinder) + "F33 = 3\n"));
  const SweepReport a = run_koiter_compare(x);
  const SweepReport b = run_koiter_compare(x);
  EXPECT_EQ(a.csv(), b.csv());
  // Triangle inequality between the three discrete solutions of each row.
  for (const SweepRow& r : a.rows) {
    EXPECT_TRUE(r.certified);
    EXPECT_LE(r.koiter_gap, r.koiter_gap_mean + r.gap + 1e-12);
  }
}

TEST(Korn, PlateEigenvaluesPositiveAndDecreasing) {
  ExperimentConfig x = experiment_config(Config::parse(
      "chart = plate\nbounds = 0, 4, 0, 4\nclamped_edges = bottom,right,top,left\nlambda = 1\nmu = 1\n"
      "q = 0 0 1\noffset = 0 0 1\nkorn_nx = 4\nkorn_ny = 4\nkorn_nz = 2\nkorn_eps = 0.2 0.1\n"));
  const KornReport rep = run_korn_probe(x);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_GT(rep.rows[1].eigenvalue, 0.0);
  EXPECT_LT(rep.rows[1].eigenvalue, rep.rows[0].eigenvalue);
}

TEST(Signorini, CylinderCheckPasses) {
  ExperimentConfig x = experiment_config(Config::parse(std::string(kCylinder) + "samples = 5\n"));
  const SignoriniReport rep = run_signorini_check(x);
  EXPECT_EQ(rep.counterexamples, 0);
  EXPECT_LE(rep.average_beta_error, 1e-8);
  EXPECT_LE(rep.average_3_error, 1e-8);
  EXPECT_TRUE(rep.ok());
}

TEST(GeneralizedEigenvalue, DiagonalPencil) {
  SparseMatrix A(5, 5), B(5, 5);
  for (int i = 0; i < 5; ++i) {
    A.insert(i, i) = 1.0 + i;
    B.insert(i, i) = 2.0;
  }
  EXPECT_NEAR(smallest_generalized_eigenvalue(A, B), 0.5, 1e-10);
}

}  // namespace
}  // namespace shellvi
