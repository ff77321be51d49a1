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

#include <string>

#include <Eigen/Core>

#include "csbeam/signal_sim.hpp"
#include "csbeam/sparse_solver.hpp"
#include "csbeam/wave_model.hpp"

namespace csbeam {

enum class Algorithm { kCB, kCSB1, kCSB2 };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

/// Nonnegative source power per grid point (Pa^2), grid-index aligned.
struct PowerMap {
  Eigen::VectorXd values;
  double frequency = 0.0;
  Algorithm algorithm = Algorithm::kCB;
  double delta = 0.0;
  int iterations = 0;
  bool converged = true;
  int block_count = 1;
  /// Set when the map averages per-block CSB-I solves.
  bool multi_block = false;

  int size() const { return static_cast<int>(values.size()); }
};

struct DeltaPolicy {
  enum class Mode { kExplicit, kFromNoisePower };
  Mode mode = Mode::kFromNoisePower;
  double explicit_value = 0.0;
  /// Per-channel noise variance in the snapshot domain (Pa^2).
  double noise_power = 0.0;
  double safety = 1.0;
  int block_count = 1;
};

/// Explicit value, or safety * sigma * sqrt(M).
double resolve_delta_csb1(const DeltaPolicy& policy, int sensors);

/// Explicit value, or safety * sigma^2 * (sqrt(M) + M / sqrt(K)).
double resolve_delta_csb2(const DeltaPolicy& policy, int sensors);

struct Csb2Options {
  /// Zero the CSM diagonal and drop the autopower rows of the lifted matrix.
  bool remove_diagonal = false;
};

/// Single-snapshot CSB-I: map value k is |S_k|^2.
PowerMap csb1(const CVector& snapshot, const SteeringMatrix& steering, double delta,
              const SolverTolerances& tolerances = {},
              const SolveOptions& options = {});

/// Mean of per-block CSB-I maps.
PowerMap csb1_multi(const SnapshotSet& snapshots, const SteeringMatrix& steering,
                    double delta, const SolverTolerances& tolerances = {});

/// CSB-II on the vectorized CSM with nonnegative powers.
/// Throws ErrorKind::kInfeasibleNonneg if no nonnegative map fits within delta.
PowerMap csb2(const CrossSpectralMatrix& csm, const LiftedMatrix& lifted, double delta,
              const SolverTolerances& tolerances = {},
              const Csb2Options& csb2_options = {},
              const SolveOptions& options = {},
              BpdnSolution* raw = nullptr);

/// Conventional beamformer w^H R w with w = g / (g^H g).
PowerMap cb(const CrossSpectralMatrix& csm, const SteeringMatrix& steering);

}  // namespace csbeam
