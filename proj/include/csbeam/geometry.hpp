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

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace csbeam {

using Vec3 = Eigen::Vector3d;

/// Ordered set of sensor positions (meters). Sensor i keeps dense index i;
/// `original_index(i)` remembers where a sensor came from when the geometry
/// was produced by subsampling a larger array.
class ArrayGeometry {
 public:
  explicit ArrayGeometry(std::vector<Vec3> sensors,
                         std::vector<int> original_indices = {});

  int size() const { return static_cast<int>(sensors_.size()); }
  const Vec3& position(int i) const { return sensors_.at(i); }
  const std::vector<Vec3>& positions() const { return sensors_; }
  int original_index(int i) const { return original_.at(i); }
  const std::vector<int>& original_indices() const { return original_; }

 private:
  std::vector<Vec3> sensors_;
  std::vector<int> original_;
};

struct GridExtent {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
};

/// Planar scan lattice parallel to the array plane at z = plane_offset.
/// Row-major: lattice cell (row i along y, column j along x) has linear
/// index i * nx + j.
class ImagingGrid {
 public:
  ImagingGrid(GridExtent extent, int nx, int ny, double plane_offset);

  int size() const { return nx_ * ny_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const GridExtent& extent() const { return extent_; }
  double plane_offset() const { return plane_offset_; }

  const Vec3& point(int k) const { return points_.at(k); }
  const std::vector<Vec3>& points() const { return points_; }

  int index(int row, int col) const { return row * nx_ + col; }
  int row_of(int k) const { return k / nx_; }
  int col_of(int k) const { return k % nx_; }

  double spacing_x() const;
  double spacing_y() const;

  /// Linear index of the lattice cell nearest to `p` (projected on the plane).
  int nearest_index(const Vec3& p) const;

 private:
  GridExtent extent_;
  int nx_;
  int ny_;
  double plane_offset_;
  std::vector<Vec3> points_;
};

/// Multi-arm logarithmic spiral in the z = 0 plane.
///
/// Each arm follows r(t) = r0 * exp(b * t), t in [0, kSpiralSweep], with
/// r0 = max_radius / 10 and b chosen so the outermost sensor of every arm sits
/// at max_radius. Arm k is rotated by 2*pi*k/num_arms. Sensors are spread over
/// the arms as evenly as possible; the first (num_sensors % num_arms) arms get
/// one extra sensor.
ArrayGeometry spiral_array(int num_sensors, int num_arms, double max_radius);

/// Angular sweep (radians) of one spiral arm.
inline constexpr double kSpiralSweep = 3.14159265358979323846;

ImagingGrid make_grid(const GridExtent& extent, int nx, int ny,
                      double plane_offset);

/// Draws `count` sensors uniformly without replacement. Pure function of
/// (geometry, count, seed).
ArrayGeometry subsample_sensors(const ArrayGeometry& geometry, int count,
                                std::uint64_t seed);

}  // namespace csbeam
