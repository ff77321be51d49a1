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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "csbeam/geometry.hpp"
#include "csbeam/wave_model.hpp"

namespace csbeam {

enum class WaveformKind { kTone, kBroadband };

/// One monopole. `amplitude` is the source strength s in s/(4*pi*r); tones
/// are s*cos(2*pi*f*t + phase), broadband sources are band-limited Gaussian
/// noise scaled to the same mean power as a tone of equal amplitude.
struct Source {
  Vec3 position = Vec3::Zero();
  WaveformKind kind = WaveformKind::kTone;
  double frequency = 0.0;
  double band_low = 0.0;
  double band_high = 0.0;
  double amplitude = 1.0;
  double phase = 0.0;
  std::uint64_t seed = 0;

  double highest_frequency() const {
    return kind == WaveformKind::kTone ? frequency : band_high;
  }
};

struct SourceScene {
  std::vector<Source> sources;
};

/// M x L real samples (Pa), channel i aligned with sensor i.
struct TimeSeries {
  Eigen::MatrixXd samples;
  double sample_rate = 0.0;

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index length() const { return samples.cols(); }
};

struct NoisyTimeSeries {
  TimeSeries series;
  /// Realized mean-square of the added noise per channel (Pa^2).
  Eigen::VectorXd noise_power;
};

enum class Window { kRectangular, kHann };

const char* to_string(Window window);
Window window_from_string(const std::string& name);

/// Frequency-domain snapshots at one analysis bin: column b is block b.
struct SnapshotSet {
  CMatrix blocks;
  double frequency = 0.0;
  double sample_rate = 0.0;
  int block_size = 0;
  int bin = 0;
  int hop = 0;
  Window window = Window::kRectangular;

  int sensors() const { return static_cast<int>(blocks.rows()); }
  int block_count() const { return static_cast<int>(blocks.cols()); }
};

struct CrossSpectralMatrix {
  CMatrix entries;
  int block_count = 0;
  double frequency = 0.0;

  int sensors() const { return static_cast<int>(entries.rows()); }
};

/// Taps of the windowed-sinc fractional-delay interpolator.
inline constexpr int kFractionalDelayTaps = 65;

/// Renders the array time series of a source scene in free field.
/// Tones are evaluated in closed form at the retarded time; broadband
/// waveforms are generated once per source (order-8 Butterworth band-pass on
/// white Gaussian noise) and delayed per sensor by windowed-sinc interpolation.
TimeSeries synthesize(const SourceScene& scene, const ArrayGeometry& geometry,
                      double sample_rate, double duration,
                      double speed = kDefaultSpeed, std::uint64_t seed = 0);

/// Adds white Gaussian noise per channel at `snr_db` relative to the measured
/// mean-square of that clean channel. +inf returns the input untouched.
NoisyTimeSeries add_noise(const TimeSeries& clean, double snr_db,
                          std::uint64_t seed);

/// Samples of the analysis window (periodic Hann).
Eigen::VectorXd window_samples(Window window, int size);

/// Unnormalized N-point DFT of the windowed block.
CVector windowed_dft(std::span<const double> block, Window window);

/// Scale that maps a DFT bin of a windowed block to the complex amplitude of
/// an on-bin sinusoid.
double amplitude_scale(Window window, int block_size, int bin);

/// Splits into (possibly overlapping) blocks and extracts the DFT bin at
/// `frequency`, which must be an exact bin of block_size at the sample rate.
SnapshotSet to_snapshots(const TimeSeries& ts, int block_size, double frequency,
                         Window window = Window::kRectangular,
                         double overlap_fraction = 0.5);

/// Expected |Y|^2 in a snapshot bin for white time-domain noise of the given
/// variance, under the same amplitude scaling as `to_snapshots`.
double snapshot_noise_variance(double time_noise_power, Window window,
                               int block_size, int bin);

/// R = (1/K) * sum_k Y_k Y_k^H.
CrossSpectralMatrix estimate_csm(const SnapshotSet& snapshots);

/// Element (i, l) goes to position i*M + l.
CVector vectorize_csm(const CrossSpectralMatrix& csm);
CMatrix devectorize_csm(const CVector& vec);

}  // namespace csbeam
