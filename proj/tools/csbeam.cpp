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

// csbeam command-line front end: simulate, beamform, sweep, metrics.

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "csbeam/config.hpp"
#include "csbeam/error.hpp"
#include "csbeam/pipeline.hpp"

namespace {

using namespace csbeam;

double parse_snr_option(const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    fail(ErrorKind::kConfig, "--snr: expected a number or 'inf', got '" + text + "'");
  }
  return v;
}

Vec3 parse_truth(const std::string& text) {
  Vec3 p;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> p.x() >> c1 >> p.y() >> c2 >> p.z()) || c1 != ',' || c2 != ',' ||
      !is.eof()) {
    fail(ErrorKind::kConfig, "--truth: expected x,y,z");
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive-sensing acoustic beamforming"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool trace = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "master seed (overrides seed)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize clean and noisy array data");
  add_common(simulate);

  CLI::App* beamform = app.add_subcommand("beamform", "image one (algorithm, SNR, frequency)");
  add_common(beamform);
  std::string algo_text, snr_text;
  double freq = 0.0;
  beamform->add_option("--algo", algo_text, "cb, csb1 or csb2 (default: first in config)")
      ->check(CLI::IsMember({"cb", "csb1", "csb2"}));
  beamform->add_option("--snr", snr_text, "SNR in dB or 'inf' (default: first in config)");
  beamform->add_option("--freq", freq, "analysis frequency in Hz (default: first in config)");
  beamform->add_flag("--trace", trace, "write the solver trace CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "run every (algorithm, SNR, frequency) cell");
  add_common(sweep);
  sweep->add_flag("--trace", trace, "write solver trace CSVs");

  CLI::App* metrics = app.add_subcommand("metrics", "print metrics of a stored power map");
  std::string map_path, truth_text;
  metrics->add_option("map", map_path, "power map CSV")->required();
  metrics->add_option("--truth", truth_text, "true source position x,y,z");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (metrics->parsed()) {
      std::optional<Vec3> truth;
      if (!truth_text.empty()) truth = parse_truth(truth_text);
      return cmd_metrics(map_path, truth, std::cout);
    }

    RunConfig config = load_config(config_path);
    CommandOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    CLI::App* active = simulate->parsed() ? simulate : beamform->parsed() ? beamform : sweep;
    if (active->count("--seed")) options.seed = seed;
    options.trace = trace;

    if (simulate->parsed()) return cmd_simulate(config, options);
    if (beamform->parsed()) {
      std::optional<Algorithm> algo;
      std::optional<double> snr, frequency;
      if (!algo_text.empty()) algo = algorithm_from_string(algo_text);
      if (!snr_text.empty()) snr = parse_snr_option(snr_text);
      if (beamform->count("--freq")) frequency = freq;
      return cmd_beamform(config, algo, snr, frequency, options);
    }
    return cmd_sweep(config, options);
  } catch (const Error& e) {
    std::cerr << "csbeam: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "csbeam: " << e.what() << '\n';
    return kExitIo;
  }
}
