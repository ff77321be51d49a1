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

#include <complex>

#include <Eigen/Core>

#include "csbeam/geometry.hpp"

namespace csbeam {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Speed of sound in air at 20 degC (m/s).
inline constexpr double kDefaultSpeed = 343.0;

/// Distances below this are treated as a source sitting on a sensor.
inline constexpr double kMinDistance = 1e-9;

/// Free-field monopole response exp(-j*w*r/c) / (4*pi*r) for every sensor.
CVector steering_vector(const ArrayGeometry& geometry, const Vec3& source,
                        double frequency, double speed = kDefaultSpeed);

/// M x N matrix whose column k is the steering vector of grid point k.
class SteeringMatrix {
 public:
  SteeringMatrix(CMatrix entries, double frequency, double speed)
      : entries_(std::move(entries)), frequency_(frequency), speed_(speed) {}

  const CMatrix& entries() const { return entries_; }
  int sensors() const { return static_cast<int>(entries_.rows()); }
  int points() const { return static_cast<int>(entries_.cols()); }
  double frequency() const { return frequency_; }
  double speed() const { return speed_; }

 private:
  CMatrix entries_;
  double frequency_;
  double speed_;
};

/// M^2 x N lifting of a SteeringMatrix. Column k is vec(g_k g_k^H) with the
/// CSM element (i, l) stored at row i*M + l, the same layout `vectorize_csm`
/// uses.
class LiftedMatrix {
 public:
  LiftedMatrix(CMatrix entries, int sensors)
      : entries_(std::move(entries)), sensors_(sensors) {}

  const CMatrix& entries() const { return entries_; }
  int sensors() const { return sensors_; }
  int points() const { return static_cast<int>(entries_.cols()); }

 private:
  CMatrix entries_;
  int sensors_;
};

SteeringMatrix steering_matrix(const ArrayGeometry& geometry,
                               const ImagingGrid& grid, double frequency,
                               double speed = kDefaultSpeed);

LiftedMatrix lift_steering_matrix(const SteeringMatrix& steering);

/// Row index of CSM element (i, l) in a vectorized M x M matrix.
inline int lifted_row(int i, int l, int m) { return i * m + l; }

}  // namespace csbeam
