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

#include "csbeam/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "csbeam/error.hpp"

namespace csbeam::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary time series I/O assumes a little-endian host");

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const fs::path& path, int line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    fail(ErrorKind::kIo, path.string() + ":" + std::to_string(line) +
                             ": not a number: '" + text + "'");
  }
  return v;
}

// Reads a CSV with the expected header and a fixed number of numeric columns.
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path,
                                                  const std::string& header) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    fail(ErrorKind::kIo, path.string() + ": expected header '" + header + "'");
  }
  const std::size_t columns = split_csv(header).size();
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) {
      fail(ErrorKind::kIo, path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(columns) + " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, path, lineno));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
void put(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) fail(ErrorKind::kIo, path.string() + ": truncated file");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_geometry_csv(const fs::path& path, const ArrayGeometry& geometry) {
  std::ofstream out = open_out(path);
  out << "index,x,y,z\n";
  for (int i = 0; i < geometry.size(); ++i) {
    const Vec3& p = geometry.position(i);
    out << i << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
        << format_double(p.z()) << '\n';
  }
  finish(out, path);
}

ArrayGeometry read_geometry_csv(const fs::path& path) {
  const auto rows = read_numeric_csv(path, "index,x,y,z");
  std::vector<Vec3> sensors;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r][0] != static_cast<double>(r)) {
      fail(ErrorKind::kIo, path.string() + ": indices must run 0,1,2,...");
    }
    sensors.emplace_back(rows[r][1], rows[r][2], rows[r][3]);
  }
  if (sensors.empty()) fail(ErrorKind::kIo, path.string() + ": no sensors");
  return ArrayGeometry(std::move(sensors));
}

void write_time_series(const fs::path& path, const TimeSeries& ts) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out.write("CSBT", 4);
  put<std::uint32_t>(out, kTimeSeriesVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ts.channels()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(ts.length()));
  put<double>(out, ts.sample_rate);
  for (int i = 0; i < ts.channels(); ++i)
    for (Eigen::Index n = 0; n < ts.length(); ++n) put<double>(out, ts.samples(i, n));
  finish(out, path);
}

TimeSeries read_time_series(const fs::path& path) {
  std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "CSBT", 4) != 0) {
    fail(ErrorKind::kIo, path.string() + ": not a time series file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kTimeSeriesVersion) {
    fail(ErrorKind::kIo, path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto m = get<std::uint32_t>(in, path);
  const auto len = get<std::uint64_t>(in, path);
  TimeSeries ts;
  ts.sample_rate = get<double>(in, path);
  ts.samples.resize(m, static_cast<Eigen::Index>(len));
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint64_t n = 0; n < len; ++n)
      ts.samples(i, static_cast<Eigen::Index>(n)) = get<double>(in, path);
  return ts;
}

void write_csm(const fs::path& csv_path, const CrossSpectralMatrix& csm, int block_size,
               Window window) {
  std::ofstream out = open_out(csv_path);
  out << "i,l,re,im\n";
  for (int i = 0; i < csm.sensors(); ++i) {
    for (int l = 0; l < csm.sensors(); ++l) {
      const Complex v = csm.entries(i, l);
      out << i << ',' << l << ',' << format_double(v.real()) << ','
          << format_double(v.imag()) << '\n';
    }
  }
  finish(out, csv_path);
  json side = {{"frequency", csm.frequency},
               {"block_count", csm.block_count},
               {"block_size", block_size},
               {"window", to_string(window)}};
  fs::path side_path = csv_path;
  write_json(side_path.replace_extension(".json"), side);
}

json power_map_sidecar(const PowerMap& map, const ImagingGrid& grid) {
  const GridExtent& e = grid.extent();
  return {{"algorithm", to_string(map.algorithm)},
          {"frequency", map.frequency},
          {"delta", map.delta},
          {"converged", map.converged},
          {"iterations", map.iterations},
          {"block_count", map.block_count},
          {"multi_block", map.multi_block},
          {"grid",
           {{"extent", {e.x_min, e.x_max, e.y_min, e.y_max}},
            {"nx", grid.nx()},
            {"ny", grid.ny()},
            {"plane_offset", grid.plane_offset()}}}};
}

void write_power_map(const fs::path& csv_path, const PowerMap& map, const ImagingGrid& grid) {
  require(map.size() == grid.size(), "power map and grid sizes differ");
  std::ofstream out = open_out(csv_path);
  out << "index,x,y,value\n";
  for (int k = 0; k < map.size(); ++k) {
    const Vec3& p = grid.point(k);
    out << k << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
        << format_double(map.values(k)) << '\n';
  }
  finish(out, csv_path);
  fs::path side_path = csv_path;
  write_json(side_path.replace_extension(".json"), power_map_sidecar(map, grid));
}

MapFile read_power_map_csv(const fs::path& csv_path) {
  const auto rows = read_numeric_csv(csv_path, "index,x,y,value");
  if (rows.empty()) fail(ErrorKind::kIo, csv_path.string() + ": empty power map");
  MapFile file;
  file.map.values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r][0] != static_cast<double>(r)) {
      fail(ErrorKind::kIo, csv_path.string() + ": indices must run 0,1,2,...");
    }
    file.points.emplace_back(rows[r][1], rows[r][2], 0.0);
    file.map.values(static_cast<Eigen::Index>(r)) = rows[r][3];
  }
  if (!file.map.values.allFinite() || file.map.values.minCoeff() < 0.0) {
    fail(ErrorKind::kIo, csv_path.string() + ": map values must be finite and nonnegative");
  }
  return file;
}

ImagingGrid infer_grid(const std::vector<Vec3>& points, double plane_offset) {
  require(!points.empty(), "no grid points");
  // The first row fixes nx: it ends where y first changes.
  int nx = 1;
  while (nx < static_cast<int>(points.size()) && points[nx].y() == points[0].y()) ++nx;
  if (points.size() % nx != 0) {
    fail(ErrorKind::kIo, "map coordinates do not form a row-major lattice");
  }
  const int ny = static_cast<int>(points.size()) / nx;
  if (nx < 2 || ny < 2) {
    fail(ErrorKind::kIo, "a single-row or single-column map needs its JSON sidecar");
  }
  const GridExtent e{points.front().x(), points[nx - 1].x(), points.front().y(),
                     points.back().y()};
  ImagingGrid grid(e, nx, ny, plane_offset);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3& q = grid.point(static_cast<int>(k));
    const double tol = 1e-9 * (1.0 + q.head<2>().norm());
    if ((q.head<2>() - points[k].head<2>()).norm() > tol) {
      fail(ErrorKind::kIo, "map coordinates do not form a uniform lattice");
    }
  }
  return grid;
}

json metrics_json(const MapMetrics& m) {
  json j = {{"peak_index", m.peak_index},
            {"peak_position", {m.peak_position.x(), m.peak_position.y(), m.peak_position.z()}},
            {"dynamic_range_db", m.dynamic_range_db},
            {"count_zero", m.count_zero},
            {"mainlobe_width_m", m.mainlobe_width_m},
            {"max_sidelobe_db", m.max_sidelobe_db},
            {"peak_on_boundary", m.peak_on_boundary},
            {"floor_db", m.floor_db}};
  j["localization_error_m"] =
      m.localization_error_m ? json(*m.localization_error_m) : json(nullptr);
  return j;
}

void write_slice_csv(const fs::path& path,
                     const std::vector<std::pair<double, double>>& slice) {
  std::ofstream out = open_out(path);
  out << "coordinate,level_db\n";
  for (const auto& [c, v] : slice) out << format_double(c) << ',' << format_double(v) << '\n';
  finish(out, path);
}

void write_pgm(const fs::path& path, const Eigen::VectorXd& db, const ImagingGrid& grid,
               double floor_db) {
  require(db.size() == grid.size(), "image and grid sizes differ");
  require(floor_db < 0.0, "floor_db must be negative");
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
  for (int k = 0; k < grid.size(); ++k) {
    const double t = std::clamp((db(k) - floor_db) / -floor_db, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
  }
  finish(out, path);
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream out = open_out(path);
  out << value.dump(2) << '\n';
  finish(out, path);
}

json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kIo, path.string() + ": " + e.what());
  }
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out = open_out(tmp);
    out << content;
    finish(out, tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIo, "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

}  // namespace csbeam::io
