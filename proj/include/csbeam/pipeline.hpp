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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "csbeam/beamformers.hpp"
#include "csbeam/config.hpp"
#include "csbeam/error.hpp"
#include "csbeam/geometry.hpp"
#include "csbeam/imaging_metrics.hpp"
#include "csbeam/signal_sim.hpp"

namespace csbeam {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNotConverged = 3,
  kExitIo = 4,
};

int exit_code_for(ErrorKind kind);

std::uint64_t fnv1a64(std::string_view text);
/// master XOR fnv1a64(label).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
/// "inf" for +inf, otherwise the shortest decimal form ("-10", "2.5").
std::string snr_label(double snr_db);

ArrayGeometry build_geometry(const RunConfig& config);
ImagingGrid build_grid(const RunConfig& config);

TimeSeries simulate_clean(const RunConfig& config, const ArrayGeometry& geometry);

/// Mean over channels of the clean in-bin power divided by the in-bin
/// variance that unit-variance white noise would produce, in dB. Adding
/// time-domain noise at (snr - gain) yields in-bin SNR snr.
double snapshot_gain_db(const TimeSeries& clean, int block_size, double frequency,
                        Window window, double overlap);

struct NoisyRun {
  NoisyTimeSeries noisy;
  double snr_db = 0.0;
  /// SNR handed to add_noise (equals snr_db under the time reference).
  double time_snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// Noise for one SNR label under the config's SNR reference.
NoisyRun make_noisy(const RunConfig& config, const TimeSeries& clean, double snr_db);

/// Mean per-channel snapshot-domain variance of the realized noise.
double snapshot_noise_power(const NoisyTimeSeries& noisy, const SnapshotSet& snapshots);

struct CellOutcome {
  Algorithm algorithm = Algorithm::kCB;
  double frequency = 0.0;
  double snr_db = 0.0;
  /// ok, not-converged, infeasible-nonneg, all-zero-map or error.
  std::string status;
  std::string message;
  std::optional<PowerMap> map;
  std::optional<MapMetrics> metrics;
  double seconds = 0.0;
  std::vector<std::string> files;
};

struct CommandOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  bool trace = false;
};

struct RunManifest {
  nlohmann::json config;
  /// One entry per SNR label: seeds and realized noise power.
  nlohmann::json noise = nlohmann::json::array();
  std::vector<CellOutcome> cells;
  std::vector<std::string> files;
  std::optional<nlohmann::json> timings;
  nlohmann::json to_json() const;
};

int cmd_simulate(RunConfig config, const CommandOptions& options);
int cmd_beamform(RunConfig config, std::optional<Algorithm> algorithm,
                 std::optional<double> snr_db, std::optional<double> frequency,
                 const CommandOptions& options);
int cmd_sweep(RunConfig config, const CommandOptions& options,
              RunManifest* manifest_out = nullptr);
/// Prints the metrics of a stored power map as JSON.
int cmd_metrics(const std::filesystem::path& map_csv, std::optional<Vec3> truth,
                std::ostream& out);

/// Worker count from CSBEAM_PARALLELISM, else the hardware concurrency.
int parallelism_from_env();

}  // namespace csbeam
