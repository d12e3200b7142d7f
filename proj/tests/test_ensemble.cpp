#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "iroa/ensemble.hpp"

using namespace iroa;

TEST(GaussianMatrix, OneByOneIsPlusMinusOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Matrix a = gaussian_matrix(1, 1, rng);
    EXPECT_EQ(std::abs(a(0, 0)), 1.0);
  }
}

TEST(GaussianMatrix, UnitColumns) {
  Rng rng(5);
  const Matrix a = gaussian_matrix(30, 120, rng);
  for (Index j = 0; j < a.cols(); ++j) EXPECT_NEAR(a.col(j).norm(), 1.0, 1e-12);
}

// 10^4 standard normal draws: the sample mean is within 4 standard errors.
TEST(GaussianMatrix, RawEntriesAreCentred) {
  Rng rng(17);
  const Matrix a = gaussian_entries(100, 100, rng);
  EXPECT_LT(std::abs(a.mean()), 4.0 / std::sqrt(10000.0));
  const double var = (a.array() - a.mean()).square().mean();
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(SparseSignal, FullSupport) {
  Rng rng(3);
  const SparseSignal s = sparse_signal(6, 6, rng);
  EXPECT_EQ(s.support, (std::vector<Index>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(s.values.cwiseAbs(), Vector::Ones(6));
}

TEST(SparseSignal, RejectsBadK) {
  Rng rng(3);
  EXPECT_THROW(sparse_signal(6, 0, rng), InputError);
  EXPECT_THROW(sparse_signal(6, 7, rng), InputError);
}

TEST(SparseSignal, ExactSupportSize) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const SparseSignal s = sparse_signal(200, 9, rng, SignMode::gaussian);
    EXPECT_EQ(s.support.size(), 9u);
    EXPECT_EQ((s.values.array() != 0.0).count(), 9);
    EXPECT_TRUE(std::is_sorted(s.support.begin(), s.support.end()));
  }
}

TEST(SparseSignal, NonnegativeFlag) {
  Rng rng(8);
  for (SignMode mode : {SignMode::pm1, SignMode::gaussian}) {
    const SparseSignal s = sparse_signal(50, 20, rng, mode, true);
    EXPECT_GE(s.values.minCoeff(), 0.0);
  }
}

TEST(SignMode, RoundTripsThroughString) {
  EXPECT_EQ(sign_mode_from_string(to_string(SignMode::pm1)), SignMode::pm1);
  EXPECT_EQ(sign_mode_from_string(to_string(SignMode::gaussian)), SignMode::gaussian);
  EXPECT_THROW(sign_mode_from_string("uniform"), InputError);
}

TEST(MakeProblem, Deterministic) {
  EnsembleSpec spec;
  spec.k = 9;
  spec.seed = 123;
  spec.trials = 3;
  const Problem a = make_problem(spec, 2);
  const Problem b = make_problem(spec, 2);
  EXPECT_EQ(a.phi(), b.phi());
  EXPECT_EQ(a.b(), b.b());
  EXPECT_EQ(*a.ground_truth(), *b.ground_truth());
  EXPECT_EQ(a.label(), b.label());
}

TEST(MakeProblem, TrialsDiffer) {
  EnsembleSpec spec;
  spec.k = 5;
  spec.trials = 10;
  std::set<double> first_entries;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    first_entries.insert(make_problem(spec, t).phi()(0, 0));
  }
  EXPECT_EQ(first_entries.size(), spec.trials);
}

TEST(MakeProblem, ConsistentData) {
  EnsembleSpec spec;
  spec.m = 25;
  spec.n = 100;
  spec.k = 7;
  spec.trials = 5;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    const Problem p = make_problem(spec, t);
    EXPECT_EQ(p.b(), p.phi() * *p.ground_truth());
    EXPECT_EQ((p.ground_truth()->array() != 0.0).count(), 7);
  }
}

TEST(MakeProblem, Validation) {
  EnsembleSpec spec;
  spec.trials = 2;
  EXPECT_THROW(make_problem(spec, 2), InputError);
  spec.m = 300;
  EXPECT_THROW(make_problem(spec, 0), InputError);
  spec = {};
  spec.k = 0;
  EXPECT_THROW(spec.validate(), InputError);
}

TEST(TrialSeed, SpreadsNeighbouringIndices) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t t = 0; t < 256; ++t) seeds.insert(trial_seed(s, t));
  }
  EXPECT_EQ(seeds.size(), 4u * 256u);
}
