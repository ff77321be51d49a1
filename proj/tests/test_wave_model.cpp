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

#include "csbeam/error.hpp"
#include "csbeam/geometry.hpp"
#include "csbeam/wave_model.hpp"

namespace csbeam {
namespace {

const double kPi = std::acos(-1.0);

TEST(SteeringVector, UnitDistanceMagnitude) {
  const ArrayGeometry g({Vec3::Zero()});
  const CVector v = steering_vector(g, Vec3(0, 0, 1), 1234.0);
  EXPECT_NEAR(std::abs(v(0)), 1.0 / (4.0 * kPi), 1e-15);
  EXPECT_NEAR(std::abs(v(0)), 0.079577, 1e-6);
}

TEST(SteeringVector, FullCyclePhaseIsZero) {
  const ArrayGeometry g({Vec3::Zero()});
  const CVector v = steering_vector(g, Vec3(0, 0, 1), 343.0, 343.0);
  EXPECT_GT(v(0).real(), 0.0);
  EXPECT_NEAR(v(0).imag(), 0.0, 1e-15);
}

TEST(SteeringVector, EquidistantSensorsMatch) {
  const ArrayGeometry g({Vec3(1, 0, 0), Vec3(0, 1, 0)});
  const CVector v = steering_vector(g, Vec3(0, 0, 2), 5000.0);
  EXPECT_EQ(v(0), v(1));
}

TEST(SteeringVector, MatchesGreensFunction) {
  const ArrayGeometry g({Vec3(0.1, -0.2, 0.0), Vec3(0.3, 0.05, 0.0)});
  const Vec3 src(0.2, 0.4, 1.0);
  const double f = 5000.0, c = 340.0;
  const CVector v = steering_vector(g, src, f, c);
  for (int i = 0; i < 2; ++i) {
    const double r = (g.position(i) - src).norm();
    const Complex expected = std::polar(1.0 / (4.0 * kPi * r), -2.0 * kPi * f * r / c);
    EXPECT_NEAR(std::abs(v(i) - expected), 0.0, 1e-13 * std::abs(expected));
  }
}

TEST(SteeringVector, SourceOnSensorIsDegenerate) {
  const ArrayGeometry g({Vec3(0, 0, 0)});
  try {
    steering_vector(g, Vec3(0, 0, 1e-12), 100.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateGeometry);
  }
}

TEST(SteeringMatrix, SingleSensorSinglePoint) {
  const ArrayGeometry g({Vec3(0.1, 0.0, 0.0)});
  const ImagingGrid grid = make_grid({-1, 1, -1, 1}, 1, 1, 1.0);
  const SteeringMatrix m = steering_matrix(g, grid, 2000.0);
  ASSERT_EQ(m.sensors(), 1);
  ASSERT_EQ(m.points(), 1);
  EXPECT_EQ(m.entries()(0, 0), steering_vector(g, grid.point(0), 2000.0)(0));
}

TEST(SteeringMatrix, MagnitudesFollowDistance) {
  const ArrayGeometry g = subsample_sensors(spiral_array(56, 7, 0.5), 10, 42);
  const ImagingGrid grid = make_grid({-1, 1, -1, 1}, 40, 40, 1.0);
  const SteeringMatrix m = steering_matrix(g, grid, 5000.0);
  ASSERT_EQ(m.sensors(), 10);
  ASSERT_EQ(m.points(), 1600);
  for (int k = 0; k < m.points(); ++k) {
    for (int i = 0; i < m.sensors(); ++i) {
      const double dx = g.position(i).x() - grid.point(k).x();
      const double dy = g.position(i).y() - grid.point(k).y();
      const double dz = g.position(i).z() - grid.point(k).z();
      const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
      ASSERT_NEAR(std::abs(m.entries()(i, k)) * 4.0 * kPi * r, 1.0, 1e-12);
    }
  }
}

TEST(SteeringMatrix, ColumnEqualsSourceSteeringVector) {
  const ArrayGeometry g = spiral_array(8, 4, 0.3);
  const ImagingGrid grid = make_grid({-1, 1, -1, 1}, 5, 5, 1.0);
  const SteeringMatrix m = steering_matrix(g, grid, 3000.0);
  const CVector v = steering_vector(g, Vec3(0, 0, 1), 3000.0);
  EXPECT_EQ(CVector(m.entries().col(12)), v);
}

TEST(SteeringMatrix, DoublingDistanceHalvesMagnitude) {
  const ArrayGeometry near_g({Vec3(0.1, 0.2, 0.0)});
  const ArrayGeometry far_g({Vec3(0.2, 0.4, 0.0)});
  const double f = 1500.0;
  const Vec3 src(0, 0, 0.5);
  const Complex a = steering_vector(near_g, src, f)(0);
  const Complex b = steering_vector(far_g, src * 2.0, f)(0);
  EXPECT_NEAR(std::abs(b) / std::abs(a), 0.5, 1e-14);
  const double dr = (far_g.position(0) - src * 2.0).norm() - (near_g.position(0) - src).norm();
  const Complex shift = std::polar(1.0, -2.0 * kPi * f * dr / kDefaultSpeed);
  EXPECT_NEAR(std::abs(b / a * 2.0 - shift), 0.0, 1e-12);
}

TEST(LiftedMatrix, SingleSensorIsSquaredMagnitude) {
  const ArrayGeometry g({Vec3(0.05, 0, 0)});
  const ImagingGrid grid = make_grid({-1, 1, -1, 1}, 3, 2, 1.0);
  const SteeringMatrix m = steering_matrix(g, grid, 4000.0);
  const LiftedMatrix l = lift_steering_matrix(m);
  ASSERT_EQ(l.entries().rows(), 1);
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(std::abs(l.entries()(0, k) - std::norm(m.entries()(0, k))), 0.0, 1e-18);
  }
}

TEST(LiftedMatrix, TwoByOneExpansion) {
  CMatrix g(2, 1);
  const Complex a(0.3, -0.4), b(-0.1, 0.7);
  g << a, b;
  const LiftedMatrix l = lift_steering_matrix(SteeringMatrix(g, 1.0, 343.0));
  ASSERT_EQ(l.entries().rows(), 4);
  EXPECT_NEAR(std::abs(l.entries()(0, 0) - a * std::conj(a)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(l.entries()(1, 0) - a * std::conj(b)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(l.entries()(2, 0) - b * std::conj(a)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(l.entries()(3, 0) - b * std::conj(b)), 0.0, 1e-15);
}

TEST(LiftedMatrix, OuterProductStructure) {
  const ArrayGeometry g = subsample_sensors(spiral_array(56, 7, 0.5), 10, 42);
  const ImagingGrid grid = make_grid({-1, 1, -1, 1}, 21, 21, 1.0);
  const SteeringMatrix m = steering_matrix(g, grid, 5000.0);
  const LiftedMatrix l = lift_steering_matrix(m);
  ASSERT_EQ(l.entries().rows(), 100);
  ASSERT_EQ(l.entries().cols(), 441);
  for (int k = 0; k < 441; ++k) {
    const CVector gk = m.entries().col(k);
    const CMatrix outer = gk * gk.adjoint();
    for (int i = 0; i < 10; ++i) {
      const Complex diag = l.entries()(lifted_row(i, i, 10), k);
      EXPECT_EQ(diag.imag(), 0.0);
      EXPECT_GT(diag.real(), 0.0);
      EXPECT_NEAR(diag.real(), std::norm(gk(i)), 1e-18);
      for (int j = 0; j < 10; ++j) {
        const Complex v = l.entries()(lifted_row(i, j, 10), k);
        EXPECT_EQ(v, std::conj(l.entries()(lifted_row(j, i, 10), k)));
        EXPECT_NEAR(std::abs(v - outer(i, j)), 0.0, 1e-18);
      }
    }
  }
}

}  // namespace
}  // namespace csbeam
