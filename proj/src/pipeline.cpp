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

#include "csbeam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "csbeam/error.hpp"
#include "csbeam/io.hpp"

namespace csbeam {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path output_dir(const RunConfig& config, const CommandOptions& options) {
  return options.out_dir.value_or(fs::path(config.output_dir));
}

void apply_overrides(RunConfig& config, const CommandOptions& options) {
  if (options.seed) config.seed = *options.seed;
}

std::string cell_stem(Algorithm algorithm, double frequency, double snr_db) {
  return std::string(to_string(algorithm)) + "_f" + io::format_double(frequency) + "_snr" +
         snr_label(snr_db);
}

std::string noisy_stem(double snr_db) { return "noisy_snr" + snr_label(snr_db); }

template <typename F>
void parallel_for(std::size_t count, int workers, F&& body) {
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Everything one (SNR, frequency) pair shares across algorithms.
struct Analysis {
  double snr_db = 0.0;
  double frequency = 0.0;
  SnapshotSet snapshots;
  CrossSpectralMatrix csm;
  double noise_power = 0.0;
};

Analysis analyze(const RunConfig& config, const NoisyRun& run, double frequency) {
  Analysis a;
  a.snr_db = run.snr_db;
  a.frequency = frequency;
  a.snapshots = to_snapshots(run.noisy.series, config.sampling.block_size, frequency,
                             config.sampling.window, config.sampling.overlap);
  a.csm = estimate_csm(a.snapshots);
  a.noise_power = snapshot_noise_power(run.noisy, a.snapshots);
  return a;
}

struct Operators {
  SteeringMatrix steering;
  std::optional<LiftedMatrix> lifted;
};

std::optional<Vec3> nearest_source(const RunConfig& config, const Vec3& p) {
  std::optional<Vec3> best;
  for (const Source& s : config.scene.sources) {
    if (!best || (s.position - p).norm() < (*best - p).norm()) best = s.position;
  }
  return best;
}

json cell_json(const CellOutcome& c) {
  json j = {{"algorithm", to_string(c.algorithm)},
            {"frequency", c.frequency},
            {"snr_db", std::isinf(c.snr_db) ? json("inf") : json(c.snr_db)},
            {"status", c.status},
            {"message", c.message}};
  if (c.map) {
    j["delta"] = c.map->delta;
    j["converged"] = c.map->converged;
    j["iterations"] = c.map->iterations;
    j["block_count"] = c.map->block_count;
  }
  j["metrics"] = c.metrics ? io::metrics_json(*c.metrics) : json(nullptr);
  j["files"] = c.files;
  return j;
}

CellOutcome run_cell(const RunConfig& config, const ImagingGrid& grid, const Analysis& a,
                     const Operators& ops, Algorithm algorithm, const fs::path& out,
                     bool trace) {
  const auto start = Clock::now();
  CellOutcome cell;
  cell.algorithm = algorithm;
  cell.frequency = a.frequency;
  cell.snr_db = a.snr_db;
  const std::string stem = cell_stem(algorithm, a.frequency, a.snr_db);
  const int m = a.snapshots.sensors();

  DeltaPolicy policy;
  policy.mode = config.delta.mode;
  policy.noise_power = a.noise_power;
  policy.safety = config.delta.safety;
  policy.block_count = a.csm.block_count;

  try {
    PowerMap map;
    BpdnSolution raw;
    bool have_trace = false;
    SolveOptions solve_options;
    solve_options.record_trace = trace;
    switch (algorithm) {
      case Algorithm::kCB:
        map = cb(a.csm, ops.steering);
        break;
      case Algorithm::kCSB1: {
        policy.explicit_value = config.delta.csb1;
        const double delta = resolve_delta_csb1(policy, m);
        if (config.csb1_multi_block) {
          map = csb1_multi(a.snapshots, ops.steering, delta, config.solver);
        } else {
          BpdnProblem problem{ops.steering.entries(), a.snapshots.blocks.col(0), delta, false,
                              config.solver};
          raw = solve_bpdn(problem, solve_options);
          have_trace = trace;
          map.algorithm = Algorithm::kCSB1;
          map.frequency = a.frequency;
          map.values = raw.x.cwiseAbs2();
          map.delta = delta;
          map.iterations = raw.iterations;
          map.converged = raw.converged;
        }
        break;
      }
      case Algorithm::kCSB2: {
        policy.explicit_value = config.delta.csb2;
        const double delta = resolve_delta_csb2(policy, m);
        map = csb2(a.csm, *ops.lifted, delta, config.solver,
                   Csb2Options{config.csb2_remove_diagonal}, solve_options, &raw);
        have_trace = trace;
        break;
      }
    }

    const fs::path map_path = out / (stem + ".csv");
    io::write_power_map(map_path, map, grid);
    cell.files = {stem + ".csv", stem + ".json"};
    if (have_trace) {
      std::ostringstream os;
      write_trace_csv(os, raw.trace);
      io::write_text_atomic(out / (stem + "_trace.csv"), os.str());
      cell.files.push_back(stem + "_trace.csv");
    }

    json metrics_doc = {{"algorithm", to_string(algorithm)},
                        {"frequency", a.frequency},
                        {"snr_db", std::isinf(a.snr_db) ? json("inf") : json(a.snr_db)},
                        {"converged", map.converged},
                        {"iterations", map.iterations},
                        {"delta", map.delta}};
    if (map.values.maxCoeff() > 0.0) {
      const int peak = peak_index(map);
      const MapMetrics metrics =
          compute_metrics(map, grid, nearest_source(config, grid.point(peak)));
      const Eigen::VectorXd db = normalize_db(map);
      io::write_slice_csv(out / (stem + "_slice.csv"), axial_slice(map, grid, SliceAxis::kX));
      io::write_pgm(out / (stem + ".pgm"), db, grid);
      cell.files.push_back(stem + "_slice.csv");
      cell.files.push_back(stem + ".pgm");
      cell.metrics = metrics;
      cell.status = map.converged ? "ok" : "not-converged";
      metrics_doc["metrics"] = io::metrics_json(metrics);
    } else {
      cell.status = map.converged ? "all-zero-map" : "not-converged";
      cell.message = "every grid point is zero";
      metrics_doc["metrics"] = nullptr;
    }
    metrics_doc["status"] = cell.status;
    io::write_json(out / (stem + "_metrics.json"), metrics_doc);
    cell.files.push_back(stem + "_metrics.json");
    cell.map = std::move(map);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    cell.status = e.kind() == ErrorKind::kInfeasibleNonneg ? "infeasible-nonneg" : "error";
    cell.message = e.what();
  }
  cell.seconds = seconds_since(start);
  return cell;
}

void write_comparison_csv(const fs::path& path, const std::vector<CellOutcome>& cells) {
  std::ostringstream os;
  os << "algorithm,frequency,snr_db,status,converged,iterations,delta,peak_index,peak_x,"
        "peak_y,dynamic_range_db,count_zero,mainlobe_width_m,max_sidelobe_db,"
        "localization_error_m\n";
  for (const CellOutcome& c : cells) {
    os << to_string(c.algorithm) << ',' << io::format_double(c.frequency) << ','
       << snr_label(c.snr_db) << ',' << c.status << ',';
    if (c.map) {
      os << (c.map->converged ? "true" : "false") << ',' << c.map->iterations << ','
         << io::format_double(c.map->delta);
    } else {
      os << ",,";
    }
    os << ',';
    if (c.metrics) {
      const MapMetrics& m = *c.metrics;
      os << m.peak_index << ',' << io::format_double(m.peak_position.x()) << ','
         << io::format_double(m.peak_position.y()) << ','
         << io::format_double(m.dynamic_range_db) << ',' << m.count_zero << ','
         << io::format_double(m.mainlobe_width_m) << ','
         << io::format_double(m.max_sidelobe_db) << ','
         << (m.localization_error_m ? io::format_double(*m.localization_error_m) : "");
    } else {
      os << ",,,,,,,";
    }
    os << '\n';
  }
  io::write_text_atomic(path, os.str());
}

void write_noisy(const fs::path& out, const NoisyRun& run) {
  const std::string stem = noisy_stem(run.snr_db);
  io::write_time_series(out / (stem + ".csbt"), run.noisy.series);
  std::vector<double> power(run.noisy.noise_power.data(),
                            run.noisy.noise_power.data() + run.noisy.noise_power.size());
  io::write_json(out / (stem + ".json"),
                 {{"snr_db", std::isinf(run.snr_db) ? json("inf") : json(run.snr_db)},
                  {"time_snr_db",
                   std::isinf(run.time_snr_db) ? json("inf") : json(run.time_snr_db)},
                  {"seed", run.seed},
                  {"noise_power", power}});
}

// Reuses a stored noisy series when it matches the config, else simulates.
NoisyRun load_or_simulate(const RunConfig& config, const ArrayGeometry& geometry,
                          double snr_db, const fs::path& out) {
  const std::string stem = noisy_stem(snr_db);
  const fs::path series = out / (stem + ".csbt");
  const fs::path side = out / (stem + ".json");
  if (fs::exists(series) && fs::exists(side)) {
    NoisyRun run;
    run.noisy.series = io::read_time_series(series);
    const json meta = io::read_json(side);
    const auto expected_len =
        static_cast<Eigen::Index>(std::floor(config.sampling.duration * config.sampling.sample_rate));
    try {
      const auto power = meta.at("noise_power").get<std::vector<double>>();
      run.noisy.noise_power = Eigen::Map<const Eigen::VectorXd>(
          power.data(), static_cast<Eigen::Index>(power.size()));
      run.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      fail(ErrorKind::kIo, side.string() + ": " + e.what());
    }
    run.snr_db = snr_db;
    run.time_snr_db = snr_db;
    if (meta.at("time_snr_db").is_number()) run.time_snr_db = meta.at("time_snr_db").get<double>();
    if (run.noisy.series.channels() == geometry.size() &&
        run.noisy.series.length() == expected_len &&
        run.noisy.series.sample_rate == config.sampling.sample_rate &&
        run.noisy.noise_power.size() == geometry.size()) {
      return run;
    }
  }
  const TimeSeries clean = simulate_clean(config, geometry);
  NoisyRun run = make_noisy(config, clean, snr_db);
  io::write_time_series(out / "clean.csbt", clean);
  write_noisy(out, run);
  return run;
}

Operators make_operators(const RunConfig& config, const ArrayGeometry& geometry,
                         const ImagingGrid& grid, double frequency, bool need_lifted) {
  Operators ops{steering_matrix(geometry, grid, frequency, config.speed), std::nullopt};
  if (need_lifted) ops.lifted = lift_steering_matrix(ops.steering);
  return ops;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kInfeasible:
    case ErrorKind::kInfeasibleNonneg: return kExitNotConverged;
    default: return kExitConfig;
  }
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return master ^ fnv1a64(label);
}

std::string snr_label(double snr_db) {
  if (std::isinf(snr_db)) return snr_db > 0 ? "inf" : "-inf";
  return io::format_double(snr_db);
}

ArrayGeometry build_geometry(const RunConfig& config) {
  const GeometryConfig& g = config.geometry;
  ArrayGeometry full = g.kind == GeometryConfig::Kind::kSpiral
                           ? spiral_array(g.num_sensors, g.num_arms, g.max_radius)
                           : io::read_geometry_csv(config.base_dir / g.path);
  if (!g.subsample_count) return full;
  if (*g.subsample_count > full.size()) {
    fail(ErrorKind::kConfig, "geometry.subsample.count: exceeds the " +
                                 std::to_string(full.size()) + " available sensors");
  }
  return subsample_sensors(full, *g.subsample_count, g.subsample_seed);
}

ImagingGrid build_grid(const RunConfig& config) {
  return make_grid(config.grid.extent, config.grid.nx, config.grid.ny, config.grid.plane_offset);
}

TimeSeries simulate_clean(const RunConfig& config, const ArrayGeometry& geometry) {
  return synthesize(config.scene, geometry, config.sampling.sample_rate,
                    config.sampling.duration, config.speed, derive_seed(config.seed, "clean"));
}

double snapshot_gain_db(const TimeSeries& clean, int block_size, double frequency,
                        Window window, double overlap) {
  const SnapshotSet snaps = to_snapshots(clean, block_size, frequency, window, overlap);
  const double bin_power = snaps.blocks.cwiseAbs2().sum() / snaps.blocks.size();
  const double time_power = clean.samples.squaredNorm() / clean.samples.size();
  const double per_unit_noise = snapshot_noise_variance(1.0, window, block_size, snaps.bin);
  if (!(bin_power > 0.0) || !(time_power > 0.0)) {
    fail(ErrorKind::kConfig, "no signal power at the SNR reference frequency " +
                                 io::format_double(frequency) + " Hz");
  }
  return 10.0 * std::log10(bin_power / (per_unit_noise * time_power));
}

NoisyRun make_noisy(const RunConfig& config, const TimeSeries& clean, double snr_db) {
  NoisyRun run;
  run.snr_db = snr_db;
  run.time_snr_db = snr_db;
  run.seed = derive_seed(config.seed, "snr=" + snr_label(snr_db));
  if (std::isfinite(snr_db) && config.snr_reference == SnrReference::kSnapshot) {
    run.time_snr_db =
        snr_db - snapshot_gain_db(clean, config.sampling.block_size, config.reference_frequency(),
                                  config.sampling.window, config.sampling.overlap);
  }
  run.noisy = add_noise(clean, run.time_snr_db, run.seed);
  return run;
}

double snapshot_noise_power(const NoisyTimeSeries& noisy, const SnapshotSet& snapshots) {
  if (noisy.noise_power.size() == 0) return 0.0;
  return snapshot_noise_variance(noisy.noise_power.mean(), snapshots.window,
                                 snapshots.block_size, snapshots.bin);
}

json RunManifest::to_json() const {
  json cells_json = json::array();
  for (const CellOutcome& c : cells) cells_json.push_back(cell_json(c));
  json j = {{"version", kConfigVersion}, {"toolkit_version", kToolkitVersion},
            {"config", config}, {"noise", noise}, {"cells", cells_json},
            {"files", files}};
  if (timings) j["timings"] = *timings;
  return j;
}

int parallelism_from_env() {
  if (const char* env = std::getenv("CSBEAM_PARALLELISM")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_simulate(RunConfig config, const CommandOptions& options) {
  apply_overrides(config, options);
  const fs::path out = output_dir(config, options);
  const ArrayGeometry geometry = build_geometry(config);
  io::write_geometry_csv(out / "geometry.csv", geometry);
  const TimeSeries clean = simulate_clean(config, geometry);
  io::write_time_series(out / "clean.csbt", clean);
  for (double snr : config.snr_db) write_noisy(out, make_noisy(config, clean, snr));
  return kExitOk;
}

int cmd_beamform(RunConfig config, std::optional<Algorithm> algorithm,
                 std::optional<double> snr_db, std::optional<double> frequency,
                 const CommandOptions& options) {
  apply_overrides(config, options);
  if (algorithm) config.algorithms = {*algorithm};
  if (snr_db) config.snr_db = {*snr_db};
  if (frequency) config.frequencies = {*frequency};
  validate(config);
  const fs::path out = output_dir(config, options);
  const ArrayGeometry geometry = build_geometry(config);
  const ImagingGrid grid = build_grid(config);
  const NoisyRun run = load_or_simulate(config, geometry, config.snr_db.front(), out);
  const Analysis a = analyze(config, run, config.frequencies.front());
  const Algorithm algo = config.algorithms.front();
  const Operators ops =
      make_operators(config, geometry, grid, a.frequency, algo == Algorithm::kCSB2);
  const CellOutcome cell = run_cell(config, grid, a, ops, algo, out, options.trace);
  if (cell.status == "error" || cell.status == "infeasible-nonneg") {
    std::cerr << "csbeam: " << cell.message << '\n';
  }
  if (cell.status == "not-converged" || cell.status == "infeasible-nonneg") {
    return kExitNotConverged;
  }
  return cell.status == "error" ? kExitConfig : kExitOk;
}

int cmd_sweep(RunConfig config, const CommandOptions& options, RunManifest* manifest_out) {
  apply_overrides(config, options);
  const fs::path out = output_dir(config, options);
  const int workers = parallelism_from_env();
  json timings = json::object();

  auto stage = Clock::now();
  const ArrayGeometry geometry = build_geometry(config);
  const ImagingGrid grid = build_grid(config);
  io::write_geometry_csv(out / "geometry.csv", geometry);
  const TimeSeries clean = simulate_clean(config, geometry);
  io::write_time_series(out / "clean.csbt", clean);
  std::vector<NoisyRun> runs(config.snr_db.size());
  parallel_for(runs.size(), workers,
               [&](std::size_t i) { runs[i] = make_noisy(config, clean, config.snr_db[i]); });
  for (const NoisyRun& run : runs) write_noisy(out, run);
  timings["simulate_s"] = seconds_since(stage);

  stage = Clock::now();
  const bool need_lifted = std::count(config.algorithms.begin(), config.algorithms.end(),
                                      Algorithm::kCSB2) > 0;
  std::vector<Operators> ops;
  for (double f : config.frequencies)
    ops.push_back(make_operators(config, geometry, grid, f, need_lifted));
  const std::size_t nf = config.frequencies.size();
  std::vector<Analysis> analyses(runs.size() * nf);
  parallel_for(analyses.size(), workers, [&](std::size_t i) {
    analyses[i] = analyze(config, runs[i / nf], config.frequencies[i % nf]);
  });
  timings["analysis_s"] = seconds_since(stage);

  // Cells in (snr, frequency, algorithm) order.
  stage = Clock::now();
  const std::size_t na = config.algorithms.size();
  std::vector<CellOutcome> cells(analyses.size() * na);
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    const std::size_t ai = i / na;
    cells[i] = run_cell(config, grid, analyses[ai], ops[ai % nf], config.algorithms[i % na],
                        out, options.trace);
  });
  timings["cells_s"] = seconds_since(stage);

  write_comparison_csv(out / "metrics.csv", cells);

  RunManifest manifest;
  manifest.config = to_json(config);
  manifest.files = {"geometry.csv", "clean.csbt", "metrics.csv"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const NoisyRun& run = runs[i];
    json per_freq = json::array();
    for (std::size_t f = 0; f < nf; ++f) {
      per_freq.push_back({{"frequency", config.frequencies[f]},
                          {"snapshot_noise_power", analyses[i * nf + f].noise_power}});
    }
    manifest.noise.push_back(
        {{"snr_db", std::isinf(run.snr_db) ? json("inf") : json(run.snr_db)},
         {"time_snr_db", std::isinf(run.time_snr_db) ? json("inf") : json(run.time_snr_db)},
         {"seed", run.seed},
         {"noise_power", std::vector<double>(run.noisy.noise_power.data(),
                                             run.noisy.noise_power.data() +
                                                 run.noisy.noise_power.size())},
         {"analysis", per_freq}});
    manifest.files.push_back(noisy_stem(run.snr_db) + ".csbt");
    manifest.files.push_back(noisy_stem(run.snr_db) + ".json");
  }
  for (const CellOutcome& c : cells)
    manifest.files.insert(manifest.files.end(), c.files.begin(), c.files.end());
  if (config.record_timings) {
    json per_cell = json::array();
    for (const CellOutcome& c : cells)
      per_cell.push_back({{"cell", cell_stem(c.algorithm, c.frequency, c.snr_db)},
                          {"seconds", c.seconds}});
    timings["cells"] = per_cell;
    manifest.timings = timings;
  }
  manifest.cells = std::move(cells);
  io::write_text_atomic(out / "manifest.json", manifest.to_json().dump(2) + "\n");

  bool failed = false;
  for (const CellOutcome& c : manifest.cells) {
    if (c.status == "not-converged" || c.status == "infeasible-nonneg" || c.status == "error") {
      std::cerr << "csbeam: " << cell_stem(c.algorithm, c.frequency, c.snr_db) << ": "
                << c.status << (c.message.empty() ? "" : ": " + c.message) << '\n';
      failed = true;
    }
  }
  if (manifest_out) *manifest_out = std::move(manifest);
  return failed ? kExitNotConverged : kExitOk;
}

int cmd_metrics(const fs::path& map_csv, std::optional<Vec3> truth, std::ostream& out) {
  io::MapFile file = io::read_power_map_csv(map_csv);
  fs::path side = map_csv;
  side.replace_extension(".json");
  std::optional<ImagingGrid> grid;
  if (fs::exists(side)) {
    const json meta = io::read_json(side);
    if (meta.contains("grid")) {
      try {
        const json& g = meta.at("grid");
        const auto e = g.at("extent").get<std::vector<double>>();
        if (e.size() != 4) fail(ErrorKind::kIo, side.string() + ": grid.extent needs 4 values");
        grid.emplace(GridExtent{e[0], e[1], e[2], e[3]}, g.at("nx").get<int>(),
                     g.at("ny").get<int>(), g.at("plane_offset").get<double>());
      } catch (const json::exception& ex) {
        fail(ErrorKind::kIo, side.string() + ": " + ex.what());
      }
    }
  }
  if (!grid) grid.emplace(io::infer_grid(file.points, truth ? truth->z() : 1.0));
  if (grid->size() != file.map.size()) {
    fail(ErrorKind::kIo, map_csv.string() + ": map size does not match its grid");
  }
  const MapMetrics m = compute_metrics(file.map, *grid, truth);
  out << io::metrics_json(m).dump(2) << '\n';
  return kExitOk;
}

}  // namespace csbeam
