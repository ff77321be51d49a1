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

#pragma once

#include <iosfwd>
#include <vector>

#include "csbeam/wave_model.hpp"

namespace csbeam {

struct SolverTolerances {
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  int max_iters = 5000;
};

/// min ||x||_1  s.t.  ||y - A x||_2 <= delta  (and x real >= 0 when nonneg).
struct BpdnProblem {
  CMatrix A;
  CVector y;
  double delta = 0.0;
  bool nonneg = false;
  SolverTolerances tolerances;
};

enum class SolveStatus { kConverged, kMaxItersExceeded, kInfeasibleNonneg };

const char* to_string(SolveStatus status);

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
};

struct BpdnSolution {
  CVector x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kMaxItersExceeded;
  std::vector<TraceRow> trace;
};

struct SolveOptions {
  bool record_trace = false;
};

/// Feasibility slack accepted on ||y - A x|| <= delta at exit.
inline constexpr double kFeasibilitySlack = 1e-6;

/// Residual accepted for delta == 0, relative to ||y||.
inline constexpr double kZeroDeltaRadius = 1e-10;

/// Basis pursuit denoising by ADMM.
///
/// Splitting: min ||z||_1 + I(||w|| <= delta)  s.t.  x = z,  A x + w = y.
/// Both constraints carry the same penalty, so the x-update matrix (I + A^H A)
/// does not depend on rho and is factored once (through the K x K dual form
/// I + A A^H when K < N). rho starts at 1 and is rebalanced every few
/// iterations. The problem is rescaled internally to ||A||_2 = 1, ||y||_2 = 1.
///
/// Every few iterations the support of the iterate is polished (the
/// support-restricted program is solved directly and grown by the worst dual
/// violator) and the best feasible point is checked against a dual bound; a
/// gap below 1e-7 relative ends the run early. The returned point is the
/// feasible candidate with the smallest l1 norm.
/// delta == 0 is an equality constraint A x = y, accepted at a residual of
/// kZeroDeltaRadius * ||y||. An inconsistent complex system throws
/// ErrorKind::kInfeasible; an infeasible nonnegative program returns
/// SolveStatus::kInfeasibleNonneg with the nonnegative least-squares point.
BpdnSolution solve_bpdn(const BpdnProblem& problem, const SolveOptions& options = {});

/// True iff min_x ||y - A x|| <= 1e-9 ||y||.
bool delta_zero_feasibility(const CMatrix& A, const CVector& y);

/// Smallest real x >= 0 residual min ||y - A x|| (projected-gradient NNLS).
double nonneg_residual_floor(const CMatrix& A, const CVector& y,
                             CVector* minimizer = nullptr);

/// ceil(c_k * sparsity * ln(n / sparsity)): advisory measurement count.
int min_measurements(int sparsity, double n, double c_k);

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace csbeam
