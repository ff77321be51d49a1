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

#include <filesystem>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "csbeam/beamformers.hpp"
#include "csbeam/geometry.hpp"
#include "csbeam/imaging_metrics.hpp"
#include "csbeam/signal_sim.hpp"

namespace csbeam::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Geometry CSV: header `index,x,y,z`, one row per sensor, meters.
void write_geometry_csv(const fs::path& path, const ArrayGeometry& geometry);
ArrayGeometry read_geometry_csv(const fs::path& path);

// TimeSeries binary, little-endian:
//   "CSBT" | u32 version=1 | u32 M | u64 L | f64 sample_rate | M*L f64, channel-major.
inline constexpr std::uint32_t kTimeSeriesVersion = 1;
void write_time_series(const fs::path& path, const TimeSeries& ts);
TimeSeries read_time_series(const fs::path& path);

// CSM: CSV rows `i,l,re,im` plus a JSON sidecar.
void write_csm(const fs::path& csv_path, const CrossSpectralMatrix& csm, int block_size,
               Window window);

struct MapFile {
  PowerMap map;
  std::vector<Vec3> points;
};

// PowerMap: CSV `index,x,y,value` plus a JSON sidecar.
void write_power_map(const fs::path& csv_path, const PowerMap& map, const ImagingGrid& grid);
json power_map_sidecar(const PowerMap& map, const ImagingGrid& grid);
MapFile read_power_map_csv(const fs::path& csv_path);

/// Rebuilds the lattice from the coordinates stored in a map CSV.
ImagingGrid infer_grid(const std::vector<Vec3>& points, double plane_offset);

json metrics_json(const MapMetrics& metrics);

void write_slice_csv(const fs::path& path,
                     const std::vector<std::pair<double, double>>& slice);

/// 8-bit binary PGM (P5); [floor_db, 0] maps linearly onto [0, 255], rows in
/// grid order.
void write_pgm(const fs::path& path, const Eigen::VectorXd& normalized_db,
               const ImagingGrid& grid, double floor_db = kDefaultFloorDb);

void write_json(const fs::path& path, const json& value);
json read_json(const fs::path& path);

/// Writes through a temporary file and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& content);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace csbeam::io
