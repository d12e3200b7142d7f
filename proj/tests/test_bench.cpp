#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "iroa/bench.hpp"
#include "iroa/svg.hpp"

using namespace iroa;

namespace {

BenchConfig small_config() {
  BenchConfig cfg;
  cfg.spec.m = 20;
  cfg.spec.n = 40;
  cfg.spec.trials = 5;
  cfg.spec.seed = 7;
  cfg.k_values = {1};
  cfg.solvers = {iroa_solver()};
  cfg.workers = 1;
  return cfg;
}

std::string csv_of(const RecoveryCurve& c) {
  std::ostringstream os;
  write_curve_csv(os, c);
  return os.str();
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(RunExperiment, OneSparseAlwaysRecovered) {
  const RecoveryCurve curve = run_experiment(small_config());
  ASSERT_EQ(curve.cells.size(), 1u);
  EXPECT_EQ(curve.cells[0].successes, 5u);
  EXPECT_EQ(curve.cells[0].trials, 5u);
  EXPECT_DOUBLE_EQ(curve.cells[0].frequency(), 1.0);
}

TEST(RunExperiment, HugeToleranceCountsEverything) {
  BenchConfig cfg = small_config();
  cfg.k_values = {10, 15};
  cfg.solvers = {iroa_solver(), iht_solver()};
  cfg.success_tol = 1e9;
  const RecoveryCurve curve = run_experiment(cfg);
  for (const auto& c : curve.cells) EXPECT_DOUBLE_EQ(c.frequency(), 1.0);
}

TEST(RunExperiment, WorkerCountDoesNotChangeResult) {
  BenchConfig cfg = small_config();
  cfg.k_values = {2, 6, 10};
  cfg.solvers = {iroa_solver(), iht_solver()};
  cfg.workers = 1;
  const std::string serial = csv_of(run_experiment(cfg));
  cfg.workers = 4;
  const std::string parallel = csv_of(run_experiment(cfg));
  EXPECT_EQ(serial, parallel);
}

// Every solver sees bit-identical data for a given (k, trial).
TEST(RunExperiment, SolversShareProblems) {
  BenchConfig cfg = small_config();
  cfg.k_values = {2, 4};
  cfg.solvers = {iroa_solver(), iht_solver(), ista_solver()};
  cfg.workers = 3;
  std::map<std::pair<Index, std::size_t>, std::set<std::uint64_t>> hashes;
  std::map<std::pair<Index, std::size_t>, std::size_t> calls;
  cfg.observer = [&](const SolveEvent& e) {
    hashes[{e.k, e.trial}].insert(e.problem_hash);
    ++calls[{e.k, e.trial}];
  };
  run_experiment(cfg);
  ASSERT_EQ(hashes.size(), 10u);
  for (const auto& [key, set] : hashes) {
    EXPECT_EQ(set.size(), 1u);
    EXPECT_EQ(calls[key], 3u);
  }
}

TEST(RunExperiment, SolverErrorsAreCountedNotFatal) {
  BenchConfig cfg = small_config();
  cfg.spec.m = 40;  // square: IRLS rejects M >= N
  cfg.solvers = {irls_solver()};
  const RecoveryCurve curve = run_experiment(cfg);
  EXPECT_EQ(curve.cells[0].failures, 5u);
  EXPECT_EQ(curve.cells[0].successes, 0u);
  EXPECT_EQ(curve.log.size(), 5u);
}

TEST(BenchConfig, Validation) {
  BenchConfig cfg = small_config();
  cfg.k_values = {};
  EXPECT_THROW(cfg.validate(), InputError);
  cfg.k_values = {3, 2};
  EXPECT_THROW(cfg.validate(), InputError);
  cfg.k_values = {41};
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = small_config();
  cfg.solvers.clear();
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_THROW(solver_from_name("omp"), InputError);
}

TEST(CurveCsv, RowFormat) {
  RecoveryCurve curve;
  CellStats c;
  c.solver = "iroa";
  c.k = 5;
  c.trials = 100;
  c.successes = 97;
  c.mean_iterations = 12.5;
  c.mean_wall_time = 0.25;
  curve.cells.push_back(c);
  EXPECT_EQ(csv_of(curve), std::string(kCurveCsvHeader) + "\niroa,5,100,97,0.970000,12.500000,\n");
  std::ostringstream timed;
  write_curve_csv(timed, curve, true);
  EXPECT_NE(timed.str().find("0.970000,12.500000,0.250000\n"), std::string::npos);
}

TEST(CurveCsv, EmptyCurveIsHeaderOnly) {
  EXPECT_EQ(csv_of(RecoveryCurve{}), std::string(kCurveCsvHeader) + "\n");
}

TEST(CurveCsv, RoundTrip) {
  BenchConfig cfg = small_config();
  cfg.k_values = {1, 3, 5};
  cfg.solvers = {iroa_solver(), iht_solver()};
  const RecoveryCurve curve = run_experiment(cfg);
  const std::string text = csv_of(curve);
  std::istringstream in(text);
  const RecoveryCurve back = read_curve_csv(in);
  EXPECT_EQ(csv_of(back), text);
}

TEST(CurveCsv, RejectsBadInput) {
  std::istringstream no_header("iroa,1,1,1,1.0,1.0,\n");
  EXPECT_THROW(read_curve_csv(no_header), ParseError);
  std::istringstream short_row(std::string(kCurveCsvHeader) + "\niroa,1,1\n");
  try {
    read_curve_csv(short_row);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CurveCsv, FileExport) {
  const std::string path = std::string(TEST_TMP_DIR) + "/bench_export.csv";
  const RecoveryCurve curve = run_experiment(small_config());
  export_csv(curve, path);
  EXPECT_EQ(csv_of(import_csv(path)), csv_of(curve));
  EXPECT_THROW(export_csv(curve, "/nonexistent-dir/x.csv"), FileError);
}

TEST(CurveSvg, SinglePointHasMarkerNoLine) {
  RecoveryCurve curve;
  CellStats c;
  c.solver = "iroa";
  c.k = 4;
  c.trials = 1;
  c.successes = 1;
  curve.cells.push_back(c);
  const std::string svg = curve_svg(curve);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
}

TEST(CurveSvg, OneSeriesPerSolver) {
  BenchConfig cfg = small_config();
  cfg.k_values = {1, 2};
  cfg.solvers = {iroa_solver(), iht_solver()};
  const std::string svg = curve_svg(run_experiment(cfg));
  EXPECT_NE(svg.find("data-solver=\"iroa\""), std::string::npos);
  EXPECT_NE(svg.find("data-solver=\"iht\""), std::string::npos);
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++lines;
  }
  EXPECT_EQ(lines, 2u);
  EXPECT_THROW(curve_svg(RecoveryCurve{}), InputError);
}

TEST(RunTrace, IdentityErrorsShrink) {
  const Problem problem(Matrix::Identity(4, 4), vec({0, 3, 0, 0}), vec({0, 3, 0, 0}));
  const TraceTable t = run_trace(problem, IroaConfig{});
  ASSERT_FALSE(t.rows.empty());
  ASSERT_TRUE(t.relative_errors);
  EXPECT_EQ(t.rows.size(), t.relative_errors->size());
  EXPECT_EQ(t.rows.size(), t.active_sizes.size());
  for (std::size_t i = 1; i < t.relative_errors->size(); ++i) {
    EXPECT_LE((*t.relative_errors)[i], (*t.relative_errors)[i - 1]);
  }
  EXPECT_EQ(t.active_sizes.back(), 1u);
}

TEST(RunTrace, ZeroDataSingleZeroRow) {
  const Problem problem(Matrix::Identity(3, 3), Vector::Zero(3));
  const TraceTable t = run_trace(problem, IroaConfig{});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(t.rows[0].isZero(0.0));
  EXPECT_FALSE(t.relative_errors);
}

TEST(RunTrace, CsvAndSvg) {
  const Problem problem(Matrix::Identity(3, 3), vec({1, 0, 0}));
  const TraceTable t = run_trace(problem, IroaConfig{});
  std::ostringstream os;
  write_trace_csv(os, t);
  std::istringstream in(os.str());
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(first.rfind("# quantity: x", 0), 0u);
  EXPECT_EQ(second, "iteration,relative_error,active,x0,x1,x2");
  const std::string svg = trace_svg(t);
  std::size_t lines = 0;
  for (auto pos = svg.find("class=\"iteration\""); pos != std::string::npos;
       pos = svg.find("class=\"iteration\"", pos + 1)) {
    ++lines;
  }
  EXPECT_EQ(lines, t.rows.size());
}

TEST(Manifest, RecordsRunParameters) {
  const std::string path = std::string(TEST_TMP_DIR) + "/bench_manifest.txt";
  const BenchConfig cfg = small_config();
  write_manifest(path, cfg, run_experiment(cfg), {{"note", "unit"}});
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  for (const char* key : {"version = ", "timestamp = ", "seed = 7", "sign_mode = pm1",
                          "solver = iroa:", "note = unit", "total_wall_time_s = "}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(Fingerprint, SensitiveToData) {
  const Problem a(Matrix::Identity(2, 2), vec({1, 0}));
  const Problem b(Matrix::Identity(2, 2), vec({1, 1e-300}));
  EXPECT_NE(problem_fingerprint(a), problem_fingerprint(b));
  EXPECT_EQ(problem_fingerprint(a), problem_fingerprint(Problem(a.phi(), a.b())));
}
