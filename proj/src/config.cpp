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

#include "csbeam/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "csbeam/error.hpp"

namespace csbeam {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::kConfig, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Typed access to one JSON object; every failure names the full field path,
// and keys nobody asked for are reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) config_error(join(path_, key), "missing required field");
    return obj_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) config_error(join(path_, key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (seen_.insert(key), fallback);
  }

  long long integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) config_error(join(path_, key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : (seen_.insert(key), fallback);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    // Documents built in code store small literals as signed integers.
    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() >= 0)
      return static_cast<std::uint64_t>(v.get<long long>());
    if (!v.is_number_unsigned()) config_error(join(path_, key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) config_error(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) config_error(join(path_, key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  const json& array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) config_error(join(path_, key), "expected an array");
    return v;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void done() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) config_error(join(path_, key), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> numbers(const json& arr, const std::string& path, std::size_t expect = 0) {
  if (expect && arr.size() != expect) {
    config_error(path, "expected " + std::to_string(expect) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) config_error(index_path(path, i), "expected a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

GeometryConfig parse_geometry(const json& j, const std::string& path) {
  Fields f(j, path);
  GeometryConfig g;
  const std::string kind = f.string("kind", "spiral");
  if (kind == "spiral") {
    g.kind = GeometryConfig::Kind::kSpiral;
    g.num_sensors = static_cast<int>(f.integer("num_sensors", g.num_sensors));
    g.num_arms = static_cast<int>(f.integer("num_arms", g.num_arms));
    g.max_radius = f.number("max_radius", g.max_radius);
  } else if (kind == "file") {
    g.kind = GeometryConfig::Kind::kFile;
    g.path = f.string("path");
  } else {
    config_error(f.path("kind"), "expected \"spiral\" or \"file\"");
  }
  if (f.has("subsample")) {
    Fields s(f.at("subsample"), f.path("subsample"));
    g.subsample_count = static_cast<int>(s.integer("count"));
    g.subsample_seed = s.seed("seed", g.subsample_seed);
    s.done();
  }
  f.done();
  return g;
}

GridConfig parse_grid(const json& j, const std::string& path) {
  Fields f(j, path);
  GridConfig g;
  if (f.has("extent")) {
    const auto e = numbers(f.array("extent"), f.path("extent"), 4);
    g.extent = GridExtent{e[0], e[1], e[2], e[3]};
  }
  g.nx = static_cast<int>(f.integer("nx", g.nx));
  g.ny = static_cast<int>(f.integer("ny", g.ny));
  g.plane_offset = f.number("plane_offset", g.plane_offset);
  f.done();
  return g;
}

Source parse_source(const json& j, const std::string& path) {
  Fields f(j, path);
  Source s;
  const auto p = numbers(f.array("position"), f.path("position"), 3);
  s.position = Vec3(p[0], p[1], p[2]);
  const std::string kind = f.string("kind", "tone");
  if (kind == "tone") {
    s.kind = WaveformKind::kTone;
    s.frequency = f.number("frequency");
  } else if (kind == "broadband") {
    s.kind = WaveformKind::kBroadband;
    const auto band = numbers(f.array("band"), f.path("band"), 2);
    s.band_low = band[0];
    s.band_high = band[1];
  } else {
    config_error(f.path("kind"), "expected \"tone\" or \"broadband\"");
  }
  s.amplitude = f.number("amplitude", s.amplitude);
  s.phase = f.number("phase", s.phase);
  s.seed = f.seed("seed", s.seed);
  f.done();
  return s;
}

SamplingConfig parse_sampling(const json& j, const std::string& path) {
  Fields f(j, path);
  SamplingConfig s;
  s.sample_rate = f.number("sample_rate", s.sample_rate);
  s.duration = f.number("duration", s.duration);
  s.block_size = static_cast<int>(f.integer("block_size", s.block_size));
  if (f.has("window")) {
    try {
      s.window = window_from_string(f.string("window"));
    } catch (const Error&) {
      config_error(f.path("window"), "expected \"rectangular\" or \"hann\"");
    }
  }
  s.overlap = f.number("overlap", s.overlap);
  f.done();
  return s;
}

double parse_snr(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  config_error(path, "expected a number or \"inf\"");
}

DeltaConfig parse_delta(const json& j, const std::string& path) {
  Fields f(j, path);
  DeltaConfig d;
  const std::string mode = f.string("mode", "from-noise-power");
  if (mode == "from-noise-power") {
    d.mode = DeltaPolicy::Mode::kFromNoisePower;
  } else if (mode == "explicit") {
    d.mode = DeltaPolicy::Mode::kExplicit;
  } else {
    config_error(f.path("mode"), "expected \"from-noise-power\" or \"explicit\"");
  }
  d.safety = f.number("safety", d.safety);
  d.csb1 = f.number("csb1", d.csb1);
  d.csb2 = f.number("csb2", d.csb2);
  f.done();
  return d;
}

SolverTolerances parse_solver(const json& j, const std::string& path) {
  Fields f(j, path);
  SolverTolerances t;
  t.abs_tol = f.number("abs_tol", t.abs_tol);
  t.rel_tol = f.number("rel_tol", t.rel_tol);
  t.max_iters = static_cast<int>(f.integer("max_iters", t.max_iters));
  f.done();
  return t;
}

bool on_bin(double frequency, int block_size, double sample_rate) {
  const double bin = frequency * block_size / sample_rate;
  return std::abs(bin - std::round(bin)) <= 1e-9 * std::max(1.0, bin);
}

}  // namespace

const char* to_string(SnrReference ref) {
  return ref == SnrReference::kSnapshot ? "snapshot" : "time";
}

RunConfig parse_config(const json& doc) {
  Fields f(doc, "");
  RunConfig c;
  c.version = static_cast<int>(f.integer("version"));
  if (c.version != kConfigVersion) {
    config_error("version", "unsupported version " + std::to_string(c.version) +
                                " (expected " + std::to_string(kConfigVersion) + ")");
  }
  if (f.has("geometry")) c.geometry = parse_geometry(f.at("geometry"), "geometry");
  if (f.has("grid")) c.grid = parse_grid(f.at("grid"), "grid");
  {
    const json& sources = f.array("sources");
    for (std::size_t i = 0; i < sources.size(); ++i)
      c.scene.sources.push_back(parse_source(sources[i], index_path("sources", i)));
  }
  if (f.has("sampling")) c.sampling = parse_sampling(f.at("sampling"), "sampling");
  c.speed = f.number("speed", c.speed);
  c.frequencies = numbers(f.array("frequencies"), "frequencies");
  {
    const json& snrs = f.array("snr_db");
    for (std::size_t i = 0; i < snrs.size(); ++i)
      c.snr_db.push_back(parse_snr(snrs[i], index_path("snr_db", i)));
  }
  const std::string ref = f.string("snr_reference", "snapshot");
  if (ref == "snapshot") {
    c.snr_reference = SnrReference::kSnapshot;
  } else if (ref == "time") {
    c.snr_reference = SnrReference::kTime;
  } else {
    config_error("snr_reference", "expected \"snapshot\" or \"time\"");
  }
  if (f.has("snr_reference_frequency")) {
    c.snr_reference_frequency = f.number("snr_reference_frequency");
  }
  {
    const json& algos = f.array("algorithms");
    for (std::size_t i = 0; i < algos.size(); ++i) {
      const std::string p = index_path("algorithms", i);
      if (!algos[i].is_string()) config_error(p, "expected a string");
      try {
        c.algorithms.push_back(algorithm_from_string(algos[i].get<std::string>()));
      } catch (const Error&) {
        config_error(p, "expected \"cb\", \"csb1\" or \"csb2\"");
      }
    }
  }
  if (f.has("delta")) c.delta = parse_delta(f.at("delta"), "delta");
  if (f.has("solver")) c.solver = parse_solver(f.at("solver"), "solver");
  c.csb1_multi_block = f.boolean("csb1_multi_block", c.csb1_multi_block);
  c.csb2_remove_diagonal = f.boolean("csb2_remove_diagonal", c.csb2_remove_diagonal);
  c.seed = f.seed("seed", c.seed);
  c.output_dir = f.string("output_dir", c.output_dir);
  c.record_timings = f.boolean("record_timings", c.record_timings);
  f.done();
  validate(c);
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["version"] = c.version;
  json geo;
  if (c.geometry.kind == GeometryConfig::Kind::kSpiral) {
    geo = {{"kind", "spiral"},
           {"num_sensors", c.geometry.num_sensors},
           {"num_arms", c.geometry.num_arms},
           {"max_radius", c.geometry.max_radius}};
  } else {
    geo = {{"kind", "file"}, {"path", c.geometry.path}};
  }
  if (c.geometry.subsample_count) {
    geo["subsample"] = {{"count", *c.geometry.subsample_count},
                        {"seed", c.geometry.subsample_seed}};
  }
  j["geometry"] = geo;
  const GridExtent& e = c.grid.extent;
  j["grid"] = {{"extent", {e.x_min, e.x_max, e.y_min, e.y_max}},
               {"nx", c.grid.nx},
               {"ny", c.grid.ny},
               {"plane_offset", c.grid.plane_offset}};
  json sources = json::array();
  for (const Source& s : c.scene.sources) {
    json js = {{"position", {s.position.x(), s.position.y(), s.position.z()}}};
    if (s.kind == WaveformKind::kTone) {
      js["kind"] = "tone";
      js["frequency"] = s.frequency;
    } else {
      js["kind"] = "broadband";
      js["band"] = {s.band_low, s.band_high};
    }
    js["amplitude"] = s.amplitude;
    js["phase"] = s.phase;
    js["seed"] = s.seed;
    sources.push_back(js);
  }
  j["sources"] = sources;
  j["sampling"] = {{"sample_rate", c.sampling.sample_rate},
                   {"duration", c.sampling.duration},
                   {"block_size", c.sampling.block_size},
                   {"window", to_string(c.sampling.window)},
                   {"overlap", c.sampling.overlap}};
  j["speed"] = c.speed;
  j["frequencies"] = c.frequencies;
  json snrs = json::array();
  for (double s : c.snr_db) snrs.push_back(std::isinf(s) ? json("inf") : json(s));
  j["snr_db"] = snrs;
  j["snr_reference"] = to_string(c.snr_reference);
  if (c.snr_reference_frequency) j["snr_reference_frequency"] = *c.snr_reference_frequency;
  json algos = json::array();
  for (Algorithm a : c.algorithms) algos.push_back(to_string(a));
  j["algorithms"] = algos;
  j["delta"] = {
      {"mode", c.delta.mode == DeltaPolicy::Mode::kExplicit ? "explicit" : "from-noise-power"},
      {"safety", c.delta.safety},
      {"csb1", c.delta.csb1},
      {"csb2", c.delta.csb2}};
  j["solver"] = {{"abs_tol", c.solver.abs_tol},
                 {"rel_tol", c.solver.rel_tol},
                 {"max_iters", c.solver.max_iters}};
  j["csb1_multi_block"] = c.csb1_multi_block;
  j["csb2_remove_diagonal"] = c.csb2_remove_diagonal;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["record_timings"] = c.record_timings;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  RunConfig c = parse_config(doc);
  c.base_dir = path.parent_path();
  return c;
}

void validate(const RunConfig& c) {
  const GeometryConfig& g = c.geometry;
  if (g.kind == GeometryConfig::Kind::kSpiral) {
    if (g.num_sensors < 1) config_error("geometry.num_sensors", "must be >= 1");
    if (g.num_arms < 1) config_error("geometry.num_arms", "must be >= 1");
    if (g.num_sensors < g.num_arms) {
      config_error("geometry.num_sensors", "must be >= geometry.num_arms");
    }
    if (!(g.max_radius > 0.0)) config_error("geometry.max_radius", "must be positive");
    if (g.subsample_count && *g.subsample_count > g.num_sensors) {
      config_error("geometry.subsample.count", "exceeds geometry.num_sensors");
    }
  } else if (g.path.empty()) {
    config_error("geometry.path", "must not be empty");
  }
  if (g.subsample_count && *g.subsample_count < 1) {
    config_error("geometry.subsample.count", "must be >= 1");
  }

  const GridExtent& e = c.grid.extent;
  if (!(e.x_min < e.x_max)) config_error("grid.extent", "x_min must be below x_max");
  if (!(e.y_min < e.y_max)) config_error("grid.extent", "y_min must be below y_max");
  if (c.grid.nx < 1) config_error("grid.nx", "must be >= 1");
  if (c.grid.ny < 1) config_error("grid.ny", "must be >= 1");
  if (!(c.grid.plane_offset > 0.0)) config_error("grid.plane_offset", "must be positive");

  const SamplingConfig& s = c.sampling;
  if (!(s.sample_rate > 0.0)) config_error("sampling.sample_rate", "must be positive");
  if (!(s.duration > 0.0)) config_error("sampling.duration", "must be positive");
  if (s.block_size < 2) config_error("sampling.block_size", "must be >= 2");
  if (!(s.overlap >= 0.0 && s.overlap < 1.0)) config_error("sampling.overlap", "must be in [0, 1)");
  const double length = std::floor(s.duration * s.sample_rate);
  if (s.block_size > length) {
    config_error("sampling.block_size", "longer than the record (" +
                                            std::to_string(static_cast<long long>(length)) +
                                            " samples)");
  }
  if (!(c.speed > 0.0)) config_error("speed", "must be positive");

  if (c.scene.sources.empty()) config_error("sources", "need at least one source");
  for (std::size_t i = 0; i < c.scene.sources.size(); ++i) {
    const Source& src = c.scene.sources[i];
    const std::string p = index_path("sources", i);
    if (!(src.amplitude > 0.0)) config_error(p + ".amplitude", "must be positive");
    if (src.kind == WaveformKind::kTone) {
      if (!(src.frequency > 0.0)) config_error(p + ".frequency", "must be positive");
    } else if (!(src.band_low > 0.0 && src.band_low < src.band_high)) {
      config_error(p + ".band", "need 0 < low < high");
    }
    if (src.highest_frequency() >= 0.5 * s.sample_rate) {
      config_error(p, "content at or above the Nyquist frequency");
    }
  }

  if (c.frequencies.empty()) config_error("frequencies", "need at least one frequency");
  for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
    const double f = c.frequencies[i];
    const std::string p = index_path("frequencies", i);
    if (!(f > 0.0 && f < 0.5 * s.sample_rate)) {
      config_error(p, "must lie strictly between 0 and the Nyquist frequency");
    }
    if (!on_bin(f, s.block_size, s.sample_rate)) {
      config_error(p, "not an exact bin of the block size at this sample rate (bin spacing " +
                          std::to_string(s.sample_rate / s.block_size) + " Hz)");
    }
  }
  if (c.snr_reference_frequency) {
    const double f = *c.snr_reference_frequency;
    if (!(f > 0.0 && f < 0.5 * s.sample_rate) || !on_bin(f, s.block_size, s.sample_rate)) {
      config_error("snr_reference_frequency", "must be an exact analysis bin below Nyquist");
    }
  }
  if (c.snr_db.empty()) config_error("snr_db", "need at least one SNR");
  for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
    const double v = c.snr_db[i];
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
      config_error(index_path("snr_db", i), "must be finite or \"inf\"");
    }
  }
  if (c.algorithms.empty()) config_error("algorithms", "need at least one algorithm");

  if (c.delta.mode == DeltaPolicy::Mode::kFromNoisePower) {
    if (!(c.delta.safety >= 1.0)) config_error("delta.safety", "must be >= 1");
  }
  if (!(c.delta.csb1 >= 0.0)) config_error("delta.csb1", "must be nonnegative");
  if (!(c.delta.csb2 >= 0.0)) config_error("delta.csb2", "must be nonnegative");
  if (!(c.solver.abs_tol > 0.0)) config_error("solver.abs_tol", "must be positive");
  if (!(c.solver.rel_tol > 0.0)) config_error("solver.rel_tol", "must be positive");
  if (c.solver.max_iters < 1) config_error("solver.max_iters", "must be >= 1");
  if (c.output_dir.empty()) config_error("output_dir", "must not be empty");
}

}  // namespace csbeam
