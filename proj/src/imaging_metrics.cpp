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

#include "csbeam/imaging_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csbeam/error.hpp"

namespace csbeam {
namespace {

constexpr double kMainlobeDb = -3.0;

}  // namespace

int peak_index(const PowerMap& map) {
  require(map.size() >= 1, "empty power map");
  int best = 0;
  for (int k = 1; k < map.size(); ++k)
    if (map.values(k) > map.values(best)) best = k;
  return best;
}

Eigen::VectorXd normalize_db(const PowerMap& map, double floor_db) {
  require(floor_db < 0.0, "floor_db must be negative");
  require(map.size() >= 1 && map.values.allFinite(), "power map must be finite");
  const double peak = map.values.maxCoeff();
  if (!(peak > 0.0)) fail(ErrorKind::kAllZeroMap, "power map has no positive value");
  Eigen::VectorXd db(map.size());
  for (int k = 0; k < map.size(); ++k) {
    const double v = map.values(k);
    db(k) = v > 0.0 ? std::max(10.0 * std::log10(v / peak), floor_db) : floor_db;
  }
  // The peak itself is exactly 0 dB.
  db(peak_index(map)) = 0.0;
  return db;
}

std::vector<int> mainlobe_region(const Eigen::VectorXd& db, const ImagingGrid& grid,
                                 int peak) {
  std::vector<char> seen(db.size(), 0);
  std::vector<int> region;
  std::vector<int> stack = {peak};
  seen[peak] = 1;
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    region.push_back(k);
    const int row = grid.row_of(k), col = grid.col_of(k);
    const int nbr[4][2] = {{row - 1, col}, {row + 1, col}, {row, col - 1}, {row, col + 1}};
    for (const auto& rc : nbr) {
      if (rc[0] < 0 || rc[0] >= grid.ny() || rc[1] < 0 || rc[1] >= grid.nx()) continue;
      const int q = grid.index(rc[0], rc[1]);
      if (!seen[q] && db(q) >= kMainlobeDb) {
        seen[q] = 1;
        stack.push_back(q);
      }
    }
  }
  std::sort(region.begin(), region.end());
  return region;
}

MapMetrics compute_metrics(const PowerMap& map, const ImagingGrid& grid,
                           std::optional<Vec3> truth, double floor_db) {
  require(map.size() == grid.size(), "power map and grid sizes differ");
  const Eigen::VectorXd db = normalize_db(map, floor_db);

  MapMetrics m;
  m.floor_db = floor_db;
  m.peak_index = peak_index(map);
  m.peak_position = grid.point(m.peak_index);

  double lowest_nonzero = 0.0;
  for (int k = 0; k < map.size(); ++k) {
    if (map.values(k) > 0.0) {
      lowest_nonzero = std::min(lowest_nonzero, db(k));
    } else {
      ++m.count_zero;
    }
  }
  m.dynamic_range_db = 0.0 - lowest_nonzero;

  const std::vector<int> region = mainlobe_region(db, grid, m.peak_index);
  std::vector<char> in_region(map.size(), 0);
  for (int k : region) in_region[k] = 1;
  m.max_sidelobe_db = floor_db;
  for (int k = 0; k < map.size(); ++k)
    if (!in_region[k]) m.max_sidelobe_db = std::max(m.max_sidelobe_db, db(k));

  // -3 dB crossings along the row through the peak, linearly interpolated.
  const int row = grid.row_of(m.peak_index);
  const int col = grid.col_of(m.peak_index);
  const double dx = grid.spacing_x();
  auto x_at = [&](int c) { return grid.point(grid.index(row, c)).x(); };
  auto crossing = [&](int step) {
    int c = col;
    while (true) {
      const int next = c + step;
      if (next < 0 || next >= grid.nx()) {
        m.peak_on_boundary = true;
        return x_at(c);
      }
      const double v0 = db(grid.index(row, c));
      const double v1 = db(grid.index(row, next));
      if (v1 < kMainlobeDb) {
        const double t = (v0 - kMainlobeDb) / (v0 - v1);
        return x_at(c) + t * (x_at(next) - x_at(c));
      }
      c = next;
    }
  };
  const double width = crossing(+1) - crossing(-1);
  m.mainlobe_width_m = std::max(width, dx);

  if (truth) m.localization_error_m = (m.peak_position - *truth).norm();
  return m;
}

std::vector<std::pair<double, double>> axial_slice(const PowerMap& map,
                                                   const ImagingGrid& grid,
                                                   SliceAxis axis,
                                                   std::optional<int> through,
                                                   double floor_db) {
  require(map.size() == grid.size(), "power map and grid sizes differ");
  const int anchor = through.value_or(peak_index(map));
  if (anchor < 0 || anchor >= grid.size()) {
    fail(ErrorKind::kIndexOutOfRange,
         "slice index " + std::to_string(anchor) + " outside grid");
  }
  const Eigen::VectorXd db = normalize_db(map, floor_db);
  std::vector<std::pair<double, double>> out;
  if (axis == SliceAxis::kX) {
    const int row = grid.row_of(anchor);
    for (int c = 0; c < grid.nx(); ++c) {
      const int k = grid.index(row, c);
      out.emplace_back(grid.point(k).x(), db(k));
    }
  } else {
    const int col = grid.col_of(anchor);
    for (int r = 0; r < grid.ny(); ++r) {
      const int k = grid.index(r, col);
      out.emplace_back(grid.point(k).y(), db(k));
    }
  }
  return out;
}

}  // namespace csbeam
