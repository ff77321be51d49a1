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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "csbeam/beamformers.hpp"
#include "csbeam/geometry.hpp"
#include "csbeam/signal_sim.hpp"
#include "csbeam/sparse_solver.hpp"

namespace csbeam {

inline constexpr int kConfigVersion = 1;

struct GeometryConfig {
  enum class Kind { kSpiral, kFile };
  Kind kind = Kind::kSpiral;
  int num_sensors = 56;
  int num_arms = 7;
  double max_radius = 0.5;
  /// CSV path for Kind::kFile, resolved against the config file's directory.
  std::string path;
  /// Keep a random subset of this many sensors.
  std::optional<int> subsample_count;
  std::uint64_t subsample_seed = 42;
};

struct GridConfig {
  GridExtent extent;
  int nx = 21;
  int ny = 21;
  double plane_offset = 1.0;
};

struct SamplingConfig {
  double sample_rate = 48000.0;
  double duration = 2.0;
  int block_size = 4800;
  Window window = Window::kRectangular;
  double overlap = 0.5;
};

// Where the SNR label is measured. kSnapshot: per-channel ratio of the clean
// signal power to the noise variance in the analysis bin. kTime: ratio of
// mean squares of the full-band time series.
enum class SnrReference { kSnapshot, kTime };
const char* to_string(SnrReference ref);

struct DeltaConfig {
  DeltaPolicy::Mode mode = DeltaPolicy::Mode::kFromNoisePower;
  double safety = 1.1;
  double csb1 = 0.0;  // explicit values
  double csb2 = 0.0;
};

struct RunConfig {
  int version = kConfigVersion;
  GeometryConfig geometry;
  GridConfig grid;
  SourceScene scene;
  SamplingConfig sampling;
  double speed = kDefaultSpeed;
  std::vector<double> frequencies;
  /// +inf means noiseless.
  std::vector<double> snr_db;
  SnrReference snr_reference = SnrReference::kSnapshot;
  /// Analysis frequency at which kSnapshot SNR is calibrated; defaults to the
  /// first entry of `frequencies`.
  std::optional<double> snr_reference_frequency;
  std::vector<Algorithm> algorithms;
  DeltaConfig delta;
  SolverTolerances solver;
  bool csb1_multi_block = false;
  bool csb2_remove_diagonal = false;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool record_timings = false;
  /// Directory that relative paths in the config are resolved against.
  std::filesystem::path base_dir;

  double reference_frequency() const {
    return snr_reference_frequency.value_or(frequencies.at(0));
  }
};

/// Throws Error(kConfig) naming the offending field, e.g. "grid.nx: must be >= 1".
RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// Checks cross-field constraints (Nyquist, on-bin frequencies, block length).
void validate(const RunConfig& config);

}  // namespace csbeam
