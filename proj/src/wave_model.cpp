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

#include "csbeam/wave_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "csbeam/error.hpp"

namespace csbeam {
namespace {

void check_medium(double frequency, double speed) {
  require(frequency > 0.0 && std::isfinite(frequency),
          "frequency must be positive and finite");
  require(speed > 0.0 && std::isfinite(speed),
          "propagation speed must be positive and finite");
}

Complex green(double distance, double wavenumber) {
  return std::polar(1.0 / (4.0 * std::numbers::pi * distance),
                    -wavenumber * distance);
}

}  // namespace

CVector steering_vector(const ArrayGeometry& geometry, const Vec3& source,
                        double frequency, double speed) {
  check_medium(frequency, speed);
  const double k = 2.0 * std::numbers::pi * frequency / speed;
  CVector g(geometry.size());
  for (int i = 0; i < geometry.size(); ++i) {
    const double r = (geometry.position(i) - source).norm();
    if (r < kMinDistance) {
      std::ostringstream os;
      os << "source coincides with sensor " << i << " (r = " << r << " m)";
      fail(ErrorKind::kDegenerateGeometry, os.str());
    }
    g(i) = green(r, k);
  }
  return g;
}

SteeringMatrix steering_matrix(const ArrayGeometry& geometry,
                               const ImagingGrid& grid, double frequency,
                               double speed) {
  check_medium(frequency, speed);
  const double k = 2.0 * std::numbers::pi * frequency / speed;
  CMatrix g(geometry.size(), grid.size());
  for (int n = 0; n < grid.size(); ++n) {
    for (int i = 0; i < geometry.size(); ++i) {
      const double r = (geometry.position(i) - grid.point(n)).norm();
      if (r < kMinDistance) {
        std::ostringstream os;
        os << "grid point " << n << " coincides with sensor " << i;
        fail(ErrorKind::kDegenerateGeometry, os.str());
      }
      g(i, n) = green(r, k);
    }
  }
  return SteeringMatrix(std::move(g), frequency, speed);
}

LiftedMatrix lift_steering_matrix(const SteeringMatrix& steering) {
  const CMatrix& g = steering.entries();
  const int m = steering.sensors();
  CMatrix lifted(static_cast<Eigen::Index>(m) * m, g.cols());
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    for (int i = 0; i < m; ++i) {
      for (int l = 0; l < m; ++l) {
        lifted(lifted_row(i, l, m), k) = g(i, k) * std::conj(g(l, k));
      }
    }
    // Keep the autopower rows exactly real.
    for (int i = 0; i < m; ++i) {
      lifted(lifted_row(i, i, m), k) = std::norm(g(i, k));
    }
  }
  return LiftedMatrix(std::move(lifted), m);
}

}  // namespace csbeam
