#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "iroa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome r;
  r.code = iroa::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string tmp(const std::string& name) { return std::string(TEST_TMP_DIR) + "/cli_" + name; }

std::string write(const std::string& name, const std::string& text) {
  const std::string path = tmp(name);
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kIdentity =
    "4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n0 3 0 0\n";

}  // namespace

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 1); }
TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }
TEST(Cli, UnknownFlag) { EXPECT_EQ(run({"solve", "x.txt", "--bogus"}).code, 1); }

TEST(CliSolve, IdentityProblem) {
  const std::string path = write("identity.txt", kIdentity);
  const std::string out_path = tmp("identity_x.txt");
  const Outcome r = run({"solve", path, "--out", out_path});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("converged: yes"), std::string::npos);
  EXPECT_NE(r.out.find("support: 1\n"), std::string::npos);
  std::istringstream values(slurp(out_path));
  std::vector<double> x;
  for (double v; values >> v;) x.push_back(v);
  ASSERT_EQ(x.size(), 4u);
  EXPECT_NEAR(x[1], 3.0, 1e-5);
}

TEST(CliSolve, IhtNeedsK) {
  const std::string path = write("identity.txt", kIdentity);
  const Outcome r = run({"solve", path, "--solver", "iht"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--k"), std::string::npos);
  EXPECT_EQ(run({"solve", path, "--solver", "iht", "--k", "1"}).code, 0);
}

TEST(CliSolve, OtherSolvers) {
  const std::string path = write("identity.txt", kIdentity);
  EXPECT_EQ(run({"solve", path, "--solver", "ista", "--mu", "1e-6"}).code, 0);
  EXPECT_EQ(run({"solve", path, "--solver", "nope"}).code, 1);
}

TEST(CliSolve, ScheduleDispatch) {
  const std::string path = write("identity.txt", kIdentity);
  const Outcome r = run({"solve", path, "--schedule", "1,2,3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("schedule 1,2,3"), std::string::npos);
  EXPECT_EQ(run({"solve", path, "--schedule", "3,2"}).code, 1);
  EXPECT_EQ(run({"solve", path, "--schedule", "1,2", "--solver", "ista"}).code, 1);
}

TEST(CliSolve, MaxItersCapGivesExitTwo) {
  const std::string path = tmp("gen_k9.txt");
  ASSERT_EQ(run({"gen", "--out", path}).code, 0);
  EXPECT_EQ(run({"solve", path, "--max-iters", "1"}).code, 2);
}

TEST(CliSolve, ParseErrorNamesFileAndLine) {
  const std::string path = write("broken.txt", "2 2\n1 0\n0 x\n1 1\n");
  const Outcome r = run({"solve", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(path), std::string::npos);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST(CliSolve, MissingFile) {
  EXPECT_EQ(run({"solve", tmp("does_not_exist.txt")}).code, 1);
}

TEST(CliBench, WritesCsvAndManifest) {
  const std::string csv = tmp("bench.csv");
  const std::string svg = tmp("bench.svg");
  const Outcome r = run({"bench", "--m", "10", "--n", "20", "--trials", "3", "--k-list", "1,2",
                     "--solvers", "iroa,iht", "--csv", csv, "--svg", svg, "--workers", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(csv);
  const std::string header = std::string(iroa::kCurveCsvHeader) + "\n";
  ASSERT_EQ(text.rfind(header, 0), 0u);
  std::istringstream lines(text.substr(header.size()));
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("iht,1,3,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("iroa,1,3,", 0), 0u);
  EXPECT_EQ(rows[0].back(), ',');
  EXPECT_NE(slurp(csv + ".manifest").find("seed = 1"), std::string::npos);
  EXPECT_NE(slurp(svg).find("<svg"), std::string::npos);
}

TEST(CliBench, ReproducibleBytes) {
  const std::string a = tmp("bench_a.csv");
  const std::string b = tmp("bench_b.csv");
  const std::vector<std::string> common = {"bench", "--m", "10", "--n", "20", "--trials", "4",
                                           "--k-list", "1:5:2", "--solvers", "iroa,iht,ista"};
  auto with = [&](const std::string& csv, const std::string& workers) {
    auto v = common;
    v.insert(v.end(), {"--csv", csv, "--workers", workers});
    return v;
  };
  ASSERT_EQ(run(with(a, "1")).code, 0);
  ASSERT_EQ(run(with(b, "3")).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(CliBench, TimingColumnOptIn) {
  const std::string csv = tmp("bench_timed.csv");
  ASSERT_EQ(run({"bench", "--m", "10", "--n", "20", "--trials", "2", "--k-list", "1",
                 "--solvers", "iroa", "--csv", csv, "--timing"})
                .code,
            0);
  const std::string text = slurp(csv);
  EXPECT_NE(text.back(), ',');
  EXPECT_NE(text.substr(text.size() - 2, 1), ",");
}

TEST(CliBench, InvalidArguments) {
  EXPECT_EQ(run({"bench", "--k-list", "5:2:1"}).code, 1);
  EXPECT_EQ(run({"bench", "--k-list", "a,b"}).code, 1);
  EXPECT_EQ(run({"bench", "--k-list", "4,2"}).code, 1);
  EXPECT_EQ(run({"bench", "--n", "20", "--m", "10", "--k-list", "25"}).code, 1);
  EXPECT_EQ(run({"bench", "--solvers", "omp", "--k-list", "1"}).code, 1);
  EXPECT_EQ(run({"bench", "--sign-mode", "uniform"}).code, 1);
}

TEST(CliTrace, GeneratedProblem) {
  const std::string csv = tmp("trace.csv");
  const std::string svg = tmp("trace.svg");
  const Outcome r = run({"trace", "--m", "30", "--n", "60", "--k", "3", "--csv", csv, "--svg", svg});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("relative_error"), std::string::npos);
  EXPECT_EQ(slurp(csv).rfind("# quantity:", 0), 0u);
  EXPECT_NE(slurp(svg).find("class=\"iteration\""), std::string::npos);
}

TEST(CliTrace, FromFile) {
  const std::string path = write("identity.txt", kIdentity);
  const Outcome r = run({"trace", path});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("-\n"), std::string::npos);  // no ground truth
}

TEST(CliOracle, Cases) {
  const std::string id = write("identity.txt", kIdentity);
  Outcome r = run({"oracle", id});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("size: 1"), std::string::npos);
  EXPECT_NE(r.out.find("support: 1\n"), std::string::npos);

  const std::string zero = write("zero.txt", "2 3\n1 0 1\n0 1 1\n0 0\n");
  r = run({"oracle", zero});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("size: 0"), std::string::npos);

  const std::string dense = write("dense.txt", "2 3\n1 0 0\n0 1 0\n1 1\n");
  EXPECT_EQ(run({"oracle", dense, "--k-max", "1"}).code, 3);
  EXPECT_EQ(run({"oracle", dense, "--k-max", "2"}).code, 0);
  EXPECT_EQ(run({"oracle", dense, "--k-max", "5"}).code, 1);

  const std::string wide = tmp("wide.txt");
  ASSERT_EQ(run({"gen", "--m", "5", "--n", "40", "--k", "1", "--out", wide}).code, 0);
  EXPECT_EQ(run({"oracle", wide}).code, 1);
}

TEST(CliGen, StdoutMatchesFileAndLoads) {
  const std::string path = tmp("gen.txt");
  const Outcome a = run({"gen", "--m", "6", "--n", "12", "--k", "2", "--seed", "5", "--trial", "3"});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(run({"gen", "--m", "6", "--n", "12", "--k", "2", "--seed", "5", "--trial", "3",
                 "--out", path})
                .code,
            0);
  EXPECT_EQ(a.out, slurp(path));
  const iroa::Problem p = iroa::load_problem(path);
  EXPECT_EQ(p.m(), 6);
  EXPECT_EQ(p.n(), 12);
  ASSERT_TRUE(p.ground_truth());
  EXPECT_EQ((p.ground_truth()->array() != 0.0).count(), 2);
}

TEST(CliGen, NonnegativeAndGaussian) {
  const std::string path = tmp("gen_nn.txt");
  ASSERT_EQ(run({"gen", "--m", "6", "--n", "12", "--k", "4", "--sign-mode", "gaussian",
                 "--nonnegative", "--out", path})
                .code,
            0);
  EXPECT_GE(iroa::load_problem(path).ground_truth()->minCoeff(), 0.0);
  EXPECT_EQ(run({"gen", "--k", "0"}).code, 1);
}

TEST(CliParsers, KList) {
  using iroa::cli::parse_k_list;
  EXPECT_EQ(parse_k_list("2:10:4"), (std::vector<iroa::Index>{2, 6, 10}));
  EXPECT_EQ(parse_k_list("3"), (std::vector<iroa::Index>{3}));
  EXPECT_THROW(parse_k_list("0,1"), iroa::cli::UsageError);
  EXPECT_THROW(parse_k_list("1:2"), iroa::cli::UsageError);
}
