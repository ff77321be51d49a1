// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The csbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bpdn_oracle.hpp"
#include "csbeam/error.hpp"
#include "csbeam/sparse_solver.hpp"

namespace csbeam {
namespace {

BpdnSolution solve(const CMatrix& a, const CVector& y, double delta, bool nonneg = false) {
  return solve_bpdn(BpdnProblem{a, y, delta, nonneg, {}});
}

TEST(SolveBpdn, IdentityEquality) {
  const CVector y = (CVector(2) << 1.0, 0.0).finished();
  const BpdnSolution s = solve(CMatrix::Identity(2, 2), y, 0.0);
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(std::abs(s.x(0) - Complex(1.0)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(s.x(1)), 0.0, 1e-9);
  EXPECT_EQ(s.status, SolveStatus::kConverged);
}

TEST(SolveBpdn, IdentityBallShrinksAlongResidual) {
  const CVector y = (CVector(2) << 1.0, 0.0).finished();
  for (bool nonneg : {false, true}) {
    const BpdnSolution s = solve(CMatrix::Identity(2, 2), y, 0.5, nonneg);
    ASSERT_TRUE(s.converged);
    EXPECT_NEAR(std::abs(s.x(0) - Complex(0.5)), 0.0, 1e-7);
    EXPECT_NEAR(std::abs(s.x(1)), 0.0, 1e-7);
    EXPECT_LE(s.residual_norm, 0.5 * (1.0 + kFeasibilitySlack));
  }
}

CMatrix unit_columns(int k, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CMatrix a(k, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < k; ++i) a(i, j) = Complex(normal(rng), normal(rng));
    a.col(j).normalize();
  }
  return a;
}

TEST(SolveBpdn, RecoversThirdBasisVector) {
  const CMatrix a = unit_columns(4, 8, 2024);
  const CVector y = a.col(3);
  // The oracle must find e3 as the unique minimizer among small supports.
  const testing::OracleResult oracle = testing::bpdn_oracle(a, y, 0.0 + 1e-12, false, 2);
  ASSERT_EQ(oracle.support, std::vector<int>{3});
  EXPECT_TRUE(oracle.certified);

  const BpdnSolution s = solve(a, y, 0.0);
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(std::abs(s.x(3) - Complex(1.0)), 0.0, 1e-5);
  for (int j = 0; j < 8; ++j) {
    if (j != 3) EXPECT_LT(std::abs(s.x(j)), 1e-5) << j;
  }
}

TEST(SolveBpdn, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (bool nonneg : {false, true}) {
      const testing::RandomProblem p = testing::random_problem(seed, nonneg);
      const testing::OracleResult oracle = testing::bpdn_oracle(p.a, p.y, p.delta, nonneg);
      ASSERT_TRUE(oracle.certified) << seed;
      const BpdnSolution s = solve(p.a, p.y, p.delta, nonneg);
      EXPECT_TRUE(s.converged) << seed;
      EXPECT_NEAR(s.objective, oracle.objective, 1e-4 * oracle.objective) << seed;
      EXPECT_LE(s.residual_norm, p.delta * (1.0 + 1e-6)) << seed;
      if (nonneg) {
        for (Eigen::Index j = 0; j < s.x.size(); ++j) {
          EXPECT_GE(s.x(j).real(), 0.0);
          EXPECT_EQ(s.x(j).imag(), 0.0);
        }
      }
    }
  }
}

TEST(SolveBpdn, ScaleCovariance) {
  const testing::RandomProblem p = testing::random_problem(7, false);
  const BpdnSolution base = solve(p.a, p.y, p.delta);
  for (double c : {0.01, 3.0, 1e4}) {
    const BpdnSolution scaled = solve(p.a, p.y * c, p.delta * c);
    EXPECT_LT((scaled.x - base.x * c).norm(), 1e-6 * c * base.x.norm()) << c;
  }
}

TEST(SolveBpdn, Deterministic) {
  const testing::RandomProblem p = testing::random_problem(11, true);
  const BpdnSolution a = solve(p.a, p.y, p.delta, true);
  const BpdnSolution b = solve(p.a, p.y, p.delta, true);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(SolveBpdn, TrivialWhenDeltaCoversY) {
  const CMatrix a = unit_columns(3, 5, 1);
  const CVector y = a.col(0) * 0.5;
  const BpdnSolution s = solve(a, y, 0.6);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.x, CVector::Zero(5));
}

TEST(SolveBpdn, InconsistentEqualityThrows) {
  CMatrix a(2, 1);
  a << 1.0, 0.0;
  const CVector y = (CVector(2) << 0.0, 1.0).finished();
  try {
    solve(a, y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
}

TEST(SolveBpdn, NonnegInfeasibleIsFlagged) {
  // y points against the only column.
  CMatrix a(2, 1);
  a << 1.0, 0.0;
  const CVector y = (CVector(2) << -1.0, 0.0).finished();
  for (double delta : {0.0, 0.5}) {
    const BpdnSolution s = solve(a, y, delta, true);
    EXPECT_FALSE(s.converged);
    EXPECT_EQ(s.status, SolveStatus::kInfeasibleNonneg);
    EXPECT_GE(s.x(0).real(), 0.0);
    EXPECT_GT(s.residual_norm, delta);
  }
}

TEST(SolveBpdn, TraceRowsAndCsv) {
  const testing::RandomProblem p = testing::random_problem(3, false);
  SolveOptions options;
  options.record_trace = true;
  const BpdnSolution s = solve_bpdn(BpdnProblem{p.a, p.y, p.delta, false, {}}, options);
  ASSERT_FALSE(s.trace.empty());
  EXPECT_EQ(s.trace.front().iter, 1);
  EXPECT_LE(static_cast<int>(s.trace.size()), s.iterations);
  std::ostringstream os;
  write_trace_csv(os, s.trace);
  EXPECT_EQ(os.str().substr(0, 36), "iter,objective,primal_res,dual_res\n1");
}

TEST(DeltaZeroFeasibility, Cases) {
  EXPECT_TRUE(delta_zero_feasibility(CMatrix::Identity(3, 3), CVector::Ones(3)));
  CMatrix rank1(2, 2);
  rank1 << 1.0, 2.0, 0.0, 0.0;
  EXPECT_FALSE(delta_zero_feasibility(rank1, (CVector(2) << 0.0, 1.0).finished()));
  const CMatrix a = unit_columns(5, 9, 4);
  const CVector x0 = unit_columns(9, 1, 5).col(0);
  EXPECT_TRUE(delta_zero_feasibility(a, a * x0));
}

TEST(NonnegResidualFloor, MatchesProjection) {
  CMatrix a(2, 2);
  a << 1.0, 0.0, 0.0, 1.0;
  const CVector y = (CVector(2) << 2.0, -3.0).finished();
  CVector x;
  EXPECT_NEAR(nonneg_residual_floor(a, y, &x), 3.0, 1e-9);
  EXPECT_NEAR(std::abs(x(0) - Complex(2.0)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(x(1)), 0.0, 1e-9);
}

TEST(MinMeasurements, Examples) {
  EXPECT_EQ(min_measurements(1, std::exp(1.0), 1.0), 1);
  EXPECT_EQ(min_measurements(1, 1600, 2.0), 15);
  EXPECT_EQ(min_measurements(2, 8, 2.0), 6);
  EXPECT_THROW(min_measurements(8, 8, 2.0), Error);
  EXPECT_THROW(min_measurements(0, 8, 2.0), Error);
}

}  // namespace
}  // namespace csbeam
