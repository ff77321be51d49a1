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

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "csbeam/beamformers.hpp"
#include "csbeam/geometry.hpp"

namespace csbeam {

inline constexpr double kDefaultFloorDb = -100.0;

/// 10*log10(v / max v), clamped below at floor_db; exact zeros map to floor_db.
Eigen::VectorXd normalize_db(const PowerMap& map, double floor_db = kDefaultFloorDb);

struct MapMetrics {
  int peak_index = 0;
  Vec3 peak_position = Vec3::Zero();
  /// Peak minus the smallest nonzero normalized value (floor-clamped).
  double dynamic_range_db = 0.0;
  /// Cells that are exactly zero (rendered at the floor).
  int count_zero = 0;
  /// -3 dB full width along x through the peak; at least the grid spacing.
  double mainlobe_width_m = 0.0;
  /// Largest normalized level outside the -3 dB region around the peak;
  /// floor_db when nothing lies outside it.
  double max_sidelobe_db = 0.0;
  std::optional<double> localization_error_m;
  /// The -3 dB crossing ran into the grid edge, so the width is truncated.
  bool peak_on_boundary = false;
  double floor_db = kDefaultFloorDb;
};

/// Peak ties break toward the lowest grid index. The mainlobe is the
/// 4-connected set of cells within 3 dB of the peak.
MapMetrics compute_metrics(const PowerMap& map, const ImagingGrid& grid,
                           std::optional<Vec3> truth = std::nullopt,
                           double floor_db = kDefaultFloorDb);

/// Cells of the 4-connected -3 dB region containing the peak.
std::vector<int> mainlobe_region(const Eigen::VectorXd& normalized_db,
                                 const ImagingGrid& grid, int peak_index);

enum class SliceAxis { kX, kY };

/// Normalized dB values along a grid row (axis x) or column (axis y) through
/// `through` (a grid index; the peak when empty), ordered by coordinate.
std::vector<std::pair<double, double>> axial_slice(
    const PowerMap& map, const ImagingGrid& grid, SliceAxis axis,
    std::optional<int> through = std::nullopt, double floor_db = kDefaultFloorDb);

int peak_index(const PowerMap& map);

}  // namespace csbeam
