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

#include "csbeam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "csbeam/error.hpp"

namespace csbeam {

ArrayGeometry::ArrayGeometry(std::vector<Vec3> sensors,
                             std::vector<int> original_indices)
    : sensors_(std::move(sensors)), original_(std::move(original_indices)) {
  if (original_.empty()) {
    original_.resize(sensors_.size());
    std::iota(original_.begin(), original_.end(), 0);
  }
  require(!sensors_.empty(), "array geometry needs at least one sensor");
  require(original_.size() == sensors_.size(),
          "original index list does not match sensor count");
  for (std::size_t i = 0; i < sensors_.size(); ++i) {
    require(sensors_[i].allFinite(), "sensor position is not finite");
    for (std::size_t l = i + 1; l < sensors_.size(); ++l) {
      if ((sensors_[i] - sensors_[l]).norm() <= 0.0) {
        fail(ErrorKind::kDegenerateGeometry,
             "sensors " + std::to_string(i) + " and " + std::to_string(l) +
                 " share a position");
      }
    }
  }
}

ImagingGrid::ImagingGrid(GridExtent extent, int nx, int ny, double plane_offset)
    : extent_(extent), nx_(nx), ny_(ny), plane_offset_(plane_offset) {
  require(nx >= 1 && ny >= 1, "grid dimensions must be positive");
  require(extent.x_min < extent.x_max && extent.y_min < extent.y_max,
          "grid extent must satisfy min < max on both axes");
  require(plane_offset > 0.0, "grid plane offset must be positive");

  // A single-sample axis sits at the middle of its interval.
  auto coord = [](double lo, double hi, int n, int i) {
    if (n == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  points_.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      points_.emplace_back(coord(extent.x_min, extent.x_max, nx, j),
                           coord(extent.y_min, extent.y_max, ny, i),
                           plane_offset);
    }
  }
}

double ImagingGrid::spacing_x() const {
  if (nx_ == 1) return extent_.x_max - extent_.x_min;
  return (extent_.x_max - extent_.x_min) / (nx_ - 1);
}

double ImagingGrid::spacing_y() const {
  if (ny_ == 1) return extent_.y_max - extent_.y_min;
  return (extent_.y_max - extent_.y_min) / (ny_ - 1);
}

int ImagingGrid::nearest_index(const Vec3& p) const {
  auto snap = [](double v, double lo, double step, int n) {
    if (n == 1) return 0;
    const long i = std::lround((v - lo) / step);
    return static_cast<int>(std::clamp<long>(i, 0, n - 1));
  };
  const int col = snap(p.x(), extent_.x_min, spacing_x(), nx_);
  const int row = snap(p.y(), extent_.y_min, spacing_y(), ny_);
  return index(row, col);
}

ArrayGeometry spiral_array(int num_sensors, int num_arms, double max_radius) {
  require(num_arms >= 1, "spiral needs at least one arm");
  require(num_sensors >= num_arms, "spiral needs num_sensors >= num_arms");
  require(max_radius > 0.0, "spiral max_radius must be positive");

  const double r0 = max_radius / 10.0;
  const double growth = std::log(max_radius / r0) / kSpiralSweep;

  std::vector<Vec3> sensors;
  sensors.reserve(num_sensors);
  const int base = num_sensors / num_arms;
  const int extra = num_sensors % num_arms;
  for (int arm = 0; arm < num_arms; ++arm) {
    const int count = base + (arm < extra ? 1 : 0);
    const double rotation = 2.0 * std::numbers::pi * arm / num_arms;
    for (int s = 0; s < count; ++s) {
      // A lone sensor sits at the arm's outer end.
      const double t = count == 1 ? kSpiralSweep
                                  : kSpiralSweep * s / static_cast<double>(count - 1);
      const double r = r0 * std::exp(growth * t);
      const double angle = t + rotation;
      sensors.emplace_back(r * std::cos(angle), r * std::sin(angle), 0.0);
    }
  }
  return ArrayGeometry(std::move(sensors));
}

ImagingGrid make_grid(const GridExtent& extent, int nx, int ny,
                      double plane_offset) {
  return ImagingGrid(extent, nx, ny, plane_offset);
}

ArrayGeometry subsample_sensors(const ArrayGeometry& geometry, int count,
                                std::uint64_t seed) {
  const int m = geometry.size();
  require(count >= 1, "subsample count must be positive");
  require(count <= m, "subsample count " + std::to_string(count) +
                          " exceeds sensor count " + std::to_string(m));

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `count` slots are a uniform draw.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, m - 1);
    std::swap(order[i], order[pick(rng)]);
  }

  std::vector<Vec3> sensors;
  std::vector<int> original;
  for (int i = 0; i < count; ++i) {
    sensors.push_back(geometry.position(order[i]));
    original.push_back(geometry.original_index(order[i]));
  }
  return ArrayGeometry(std::move(sensors), std::move(original));
}

}  // namespace csbeam
