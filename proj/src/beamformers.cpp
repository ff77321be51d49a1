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

#include "csbeam/beamformers.hpp"

#include <cmath>
#include <sstream>

#include "csbeam/error.hpp"

namespace csbeam {
namespace {

void check_policy(const DeltaPolicy& p) {
  require(p.explicit_value >= 0.0, "explicit delta must be nonnegative");
  require(p.noise_power >= 0.0, "noise power must be nonnegative");
  require(p.safety >= 1.0, "delta safety factor must be >= 1");
}

}  // namespace

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kCB: return "cb";
    case Algorithm::kCSB1: return "csb1";
    case Algorithm::kCSB2: return "csb2";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "cb") return Algorithm::kCB;
  if (name == "csb1") return Algorithm::kCSB1;
  if (name == "csb2") return Algorithm::kCSB2;
  fail(ErrorKind::kInvalidArgument, "unknown algorithm '" + name + "'");
}

double resolve_delta_csb1(const DeltaPolicy& policy, int sensors) {
  check_policy(policy);
  require(sensors >= 1, "sensor count must be positive");
  if (policy.mode == DeltaPolicy::Mode::kExplicit) return policy.explicit_value;
  return policy.safety * std::sqrt(policy.noise_power * sensors);
}

double resolve_delta_csb2(const DeltaPolicy& policy, int sensors) {
  check_policy(policy);
  require(sensors >= 1, "sensor count must be positive");
  require(policy.block_count >= 1, "block count must be at least 1");
  if (policy.mode == DeltaPolicy::Mode::kExplicit) return policy.explicit_value;
  const double m = sensors;
  return policy.safety * policy.noise_power *
         (std::sqrt(m) + m / std::sqrt(static_cast<double>(policy.block_count)));
}

PowerMap csb1(const CVector& snapshot, const SteeringMatrix& steering, double delta,
              const SolverTolerances& tolerances, const SolveOptions& options) {
  require(snapshot.size() == steering.sensors(),
          "snapshot length does not match steering matrix rows");
  BpdnProblem problem{steering.entries(), snapshot, delta, false, tolerances};
  const BpdnSolution sol = solve_bpdn(problem, options);

  PowerMap map;
  map.algorithm = Algorithm::kCSB1;
  map.frequency = steering.frequency();
  map.values = sol.x.cwiseAbs2();
  map.delta = delta;
  map.iterations = sol.iterations;
  map.converged = sol.converged;
  return map;
}

PowerMap csb1_multi(const SnapshotSet& snapshots, const SteeringMatrix& steering,
                    double delta, const SolverTolerances& tolerances) {
  require(snapshots.block_count() >= 1, "need at least one snapshot block");
  PowerMap acc;
  for (int b = 0; b < snapshots.block_count(); ++b) {
    PowerMap one = csb1(snapshots.blocks.col(b), steering, delta, tolerances);
    if (b == 0) {
      acc = std::move(one);
    } else {
      acc.values += one.values;
      acc.iterations += one.iterations;
      acc.converged = acc.converged && one.converged;
    }
  }
  acc.values /= static_cast<double>(snapshots.block_count());
  acc.block_count = snapshots.block_count();
  acc.multi_block = true;
  return acc;
}

PowerMap csb2(const CrossSpectralMatrix& csm, const LiftedMatrix& lifted, double delta,
              const SolverTolerances& tolerances, const Csb2Options& csb2_options,
              const SolveOptions& options, BpdnSolution* raw) {
  const int m = csm.sensors();
  require(lifted.sensors() == m, "CSM and lifted matrix disagree on sensor count");

  BpdnProblem problem;
  problem.delta = delta;
  problem.nonneg = true;
  problem.tolerances = tolerances;
  const CVector rv = vectorize_csm(csm);
  if (csb2_options.remove_diagonal) {
    require(m >= 2, "diagonal removal needs at least two sensors");
    const Eigen::Index rows = static_cast<Eigen::Index>(m) * (m - 1);
    problem.A.resize(rows, lifted.points());
    problem.y.resize(rows);
    Eigen::Index r = 0;
    for (int i = 0; i < m; ++i) {
      for (int l = 0; l < m; ++l) {
        if (i == l) continue;
        problem.A.row(r) = lifted.entries().row(lifted_row(i, l, m));
        problem.y(r) = rv(lifted_row(i, l, m));
        ++r;
      }
    }
  } else {
    problem.A = lifted.entries();
    problem.y = rv;
  }

  BpdnSolution sol = solve_bpdn(problem, options);
  if (sol.status == SolveStatus::kInfeasibleNonneg) {
    std::ostringstream os;
    os << "no nonnegative power map reaches the residual bound delta = " << delta
       << "; increase delta";
    fail(ErrorKind::kInfeasibleNonneg, os.str());
  }

  PowerMap map;
  map.algorithm = Algorithm::kCSB2;
  map.frequency = csm.frequency;
  map.values = sol.x.real().cwiseMax(0.0);
  map.delta = delta;
  map.iterations = sol.iterations;
  map.converged = sol.converged;
  map.block_count = csm.block_count;
  if (raw) *raw = std::move(sol);
  return map;
}

PowerMap cb(const CrossSpectralMatrix& csm, const SteeringMatrix& steering) {
  require(csm.sensors() == steering.sensors(),
          "CSM and steering matrix disagree on sensor count");
  const CMatrix& g = steering.entries();
  PowerMap map;
  map.algorithm = Algorithm::kCB;
  map.frequency = steering.frequency();
  map.block_count = csm.block_count;
  map.values.resize(g.cols());
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    const CVector w = g.col(k) / g.col(k).squaredNorm();
    const double v = w.dot(csm.entries * w).real();
    map.values(k) = std::max(v, 0.0);
  }
  return map;
}

}  // namespace csbeam
