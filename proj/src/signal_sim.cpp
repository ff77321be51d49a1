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

#include "csbeam/signal_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "csbeam/error.hpp"

namespace csbeam {
namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

Biquad make_section(double cutoff, double sample_rate, double q, bool highpass) {
  const double w0 = 2.0 * kPi * cutoff / sample_rate;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s{};
  if (highpass) {
    s.b0 = (1.0 + c) / 2.0 / a0;
    s.b1 = -(1.0 + c) / a0;
    s.b2 = s.b0;
  } else {
    s.b0 = (1.0 - c) / 2.0 / a0;
    s.b1 = (1.0 - c) / a0;
    s.b2 = s.b0;
  }
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

// Order-8 Butterworth band-pass as a 4th-order high-pass cascaded with a
// 4th-order low-pass; an edge at 0 or Nyquist drops that half.
std::vector<double> bandpass_noise(std::size_t length, double low, double high,
                                   double sample_rate, std::uint64_t seed) {
  constexpr std::array<double, 2> kButterworthQ = {0.54119610014619701,
                                                  1.3065629648763766};
  constexpr std::size_t kWarmup = 4096;

  std::vector<Biquad> sections;
  for (double q : kButterworthQ) {
    if (low > 0.0) sections.push_back(make_section(low, sample_rate, q, true));
    if (high < 0.5 * sample_rate)
      sections.push_back(make_section(high, sample_rate, q, false));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(length);
  for (std::size_t n = 0; n < length + kWarmup; ++n) {
    double v = normal(rng);
    for (auto& s : sections) v = s.step(v);
    if (n >= kWarmup) out[n - kWarmup] = v;
  }

  double power = 0.0;
  for (double v : out) power += v * v;
  power /= static_cast<double>(length);
  // Same mean power as a unit-amplitude sinusoid.
  const double scale = power > 0.0 ? std::sqrt(0.5 / power) : 0.0;
  for (double& v : out) v *= scale;
  return out;
}

double blackman(double u, double half_width) {
  if (std::abs(u) >= half_width) return 0.0;
  const double a = kPi * u / half_width;
  return 0.42 + 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Band-limited value of `w` at fractional index p.
double interpolate(const std::vector<double>& w, double p) {
  constexpr int kHalf = kFractionalDelayTaps / 2;
  const double base = std::floor(p);
  const double frac = p - base;
  const auto ip = static_cast<long>(base);
  double acc = 0.0;
  for (int k = -kHalf; k <= kHalf; ++k) {
    const double u = frac - k;
    acc += w[static_cast<std::size_t>(ip + k)] * sinc(u) * blackman(u, kHalf + 1);
  }
  return acc;
}

}  // namespace

const char* to_string(Window window) {
  return window == Window::kHann ? "hann" : "rectangular";
}

Window window_from_string(const std::string& name) {
  if (name == "rectangular" || name == "rect") return Window::kRectangular;
  if (name == "hann") return Window::kHann;
  fail(ErrorKind::kInvalidArgument, "unknown window '" + name + "'");
}

TimeSeries synthesize(const SourceScene& scene, const ArrayGeometry& geometry,
                      double sample_rate, double duration, double speed,
                      std::uint64_t seed) {
  require(!scene.sources.empty(), "scene has no sources");
  require(sample_rate > 0.0 && duration > 0.0 && speed > 0.0,
          "sample rate, duration and speed must be positive");
  const auto length = static_cast<Eigen::Index>(std::floor(duration * sample_rate));
  require(length >= 1, "duration * sample_rate must cover at least one sample");

  for (const auto& src : scene.sources) {
    require(src.amplitude > 0.0, "source amplitude must be positive");
    if (src.kind == WaveformKind::kTone) {
      require(src.frequency > 0.0, "tone frequency must be positive");
    } else {
      require(src.band_low >= 0.0 && src.band_high > src.band_low,
              "broadband band edges must satisfy 0 <= low < high");
    }
    if (!(sample_rate > 2.0 * src.highest_frequency())) {
      std::ostringstream os;
      os << "sample rate " << sample_rate << " Hz does not exceed twice the "
         << "source frequency " << src.highest_frequency() << " Hz";
      fail(ErrorKind::kNyquistViolation, os.str());
    }
  }

  const int m = geometry.size();
  TimeSeries ts;
  ts.sample_rate = sample_rate;
  ts.samples = Eigen::MatrixXd::Zero(m, length);

  for (std::size_t s = 0; s < scene.sources.size(); ++s) {
    const Source& src = scene.sources[s];
    std::vector<double> distance(m);
    double max_delay = 0.0;
    for (int i = 0; i < m; ++i) {
      distance[i] = (geometry.position(i) - src.position).norm();
      if (distance[i] < kMinDistance) {
        fail(ErrorKind::kDegenerateGeometry,
             "source " + std::to_string(s) + " coincides with sensor " +
                 std::to_string(i));
      }
      max_delay = std::max(max_delay, distance[i] / speed * sample_rate);
    }

    if (src.kind == WaveformKind::kTone) {
      const double w = 2.0 * kPi * src.frequency;
      for (int i = 0; i < m; ++i) {
        const double gain = src.amplitude / (4.0 * kPi * distance[i]);
        const double tau = distance[i] / speed;
        for (Eigen::Index n = 0; n < length; ++n) {
          const double t = static_cast<double>(n) / sample_rate;
          ts.samples(i, n) += gain * std::cos(w * (t - tau) + src.phase);
        }
      }
      continue;
    }

    constexpr int kPad = kFractionalDelayTaps / 2 + 8;
    const auto offset = static_cast<long>(std::ceil(max_delay)) + kPad;
    const auto total = static_cast<std::size_t>(length + offset + kPad);
    const auto wave = bandpass_noise(total, src.band_low, src.band_high,
                                     sample_rate, mix_seed(src.seed, seed));
    for (int i = 0; i < m; ++i) {
      const double gain = src.amplitude / (4.0 * kPi * distance[i]);
      const double delay = distance[i] / speed * sample_rate;
      for (Eigen::Index n = 0; n < length; ++n) {
        const double p = static_cast<double>(n + offset) - delay;
        ts.samples(i, n) += gain * interpolate(wave, p);
      }
    }
  }
  return ts;
}

NoisyTimeSeries add_noise(const TimeSeries& clean, double snr_db,
                          std::uint64_t seed) {
  require(!std::isnan(snr_db), "snr_db is NaN");
  NoisyTimeSeries out{clean, Eigen::VectorXd::Zero(clean.channels())};
  if (std::isinf(snr_db) && snr_db > 0) return out;
  require(std::isfinite(snr_db), "snr_db must be finite or +inf");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto length = static_cast<double>(clean.length());
  for (int i = 0; i < clean.channels(); ++i) {
    const double signal_power = clean.samples.row(i).squaredNorm() / length;
    if (!(signal_power > 0.0)) {
      fail(ErrorKind::kInvalidArgument,
           "channel " + std::to_string(i) + " has zero power; finite SNR undefined");
    }
    const double sigma = std::sqrt(signal_power * std::pow(10.0, -snr_db / 10.0));
    double added = 0.0;
    for (Eigen::Index n = 0; n < clean.length(); ++n) {
      const double v = sigma * normal(rng);
      out.series.samples(i, n) += v;
      added += v * v;
    }
    out.noise_power(i) = added / length;
  }
  return out;
}

Eigen::VectorXd window_samples(Window window, int size) {
  require(size >= 1, "window size must be positive");
  if (window == Window::kRectangular) return Eigen::VectorXd::Ones(size);
  Eigen::VectorXd w(size);
  for (int n = 0; n < size; ++n) w(n) = 0.5 - 0.5 * std::cos(2.0 * kPi * n / size);
  return w;
}

CVector windowed_dft(std::span<const double> block, Window window) {
  const int n = static_cast<int>(block.size());
  const Eigen::VectorXd w = window_samples(window, n);
  std::vector<double> in(n);
  for (int i = 0; i < n; ++i) in[i] = block[i] * w(i);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<Complex> half;
  fft.fwd(half, in);
  // Rebuild the full spectrum from Hermitian symmetry.
  CVector full(n);
  for (int k = 0; k < n; ++k) {
    full(k) = k < static_cast<int>(half.size()) ? half[k] : std::conj(half[n - k]);
  }
  return full;
}

double amplitude_scale(Window window, int block_size, int bin) {
  const double gain = window_samples(window, block_size).sum();
  const bool edge = bin == 0 || 2 * bin == block_size;
  return (edge ? 1.0 : 2.0) / gain;
}

SnapshotSet to_snapshots(const TimeSeries& ts, int block_size, double frequency,
                         Window window, double overlap_fraction) {
  require(block_size >= 1, "block size must be positive");
  require(overlap_fraction >= 0.0 && overlap_fraction < 1.0,
          "overlap fraction must lie in [0, 1)");
  if (block_size > ts.length()) {
    fail(ErrorKind::kBlockTooLong,
         "block size " + std::to_string(block_size) + " exceeds series length " +
             std::to_string(ts.length()));
  }
  const double exact_bin = frequency * block_size / ts.sample_rate;
  const double nearest = std::round(exact_bin);
  if (!(frequency >= 0.0) || std::abs(exact_bin - nearest) > 1e-9 * std::max(1.0, exact_bin) ||
      2 * nearest > block_size) {
    std::ostringstream os;
    const double df = ts.sample_rate / block_size;
    os << "frequency " << frequency << " Hz is not a DFT bin of block " << block_size
       << " at " << ts.sample_rate << " Hz; nearest bins are "
       << std::floor(exact_bin) * df << " Hz and " << std::ceil(exact_bin) * df << " Hz";
    fail(ErrorKind::kOffBinFrequency, os.str());
  }

  SnapshotSet out;
  out.frequency = frequency;
  out.sample_rate = ts.sample_rate;
  out.block_size = block_size;
  out.bin = static_cast<int>(nearest);
  out.window = window;
  out.hop = std::max(1, static_cast<int>(std::lround(block_size * (1.0 - overlap_fraction))));

  const auto count = static_cast<int>((ts.length() - block_size) / out.hop + 1);
  const double scale = amplitude_scale(window, block_size, out.bin);
  out.blocks.resize(ts.channels(), count);

  std::vector<double> block(block_size);
  for (int b = 0; b < count; ++b) {
    const Eigen::Index start = static_cast<Eigen::Index>(b) * out.hop;
    for (int i = 0; i < ts.channels(); ++i) {
      for (int n = 0; n < block_size; ++n) block[n] = ts.samples(i, start + n);
      out.blocks(i, b) = scale * windowed_dft(block, window)(out.bin);
    }
  }
  return out;
}

double snapshot_noise_variance(double time_noise_power, Window window,
                               int block_size, int bin) {
  const double scale = amplitude_scale(window, block_size, bin);
  return scale * scale * time_noise_power *
         window_samples(window, block_size).squaredNorm();
}

CrossSpectralMatrix estimate_csm(const SnapshotSet& snapshots) {
  require(snapshots.block_count() >= 1, "CSM needs at least one block");
  CrossSpectralMatrix csm;
  csm.block_count = snapshots.block_count();
  csm.frequency = snapshots.frequency;
  const CMatrix& y = snapshots.blocks;
  CMatrix r = (y * y.adjoint()) / static_cast<double>(csm.block_count);
  csm.entries = 0.5 * (r + r.adjoint());
  for (Eigen::Index i = 0; i < csm.entries.rows(); ++i)
    csm.entries(i, i) = csm.entries(i, i).real();
  return csm;
}

CVector vectorize_csm(const CrossSpectralMatrix& csm) {
  const int m = csm.sensors();
  CVector v(static_cast<Eigen::Index>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) v(lifted_row(i, l, m)) = csm.entries(i, l);
  return v;
}

CMatrix devectorize_csm(const CVector& vec) {
  const auto m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(vec.size()))));
  require(static_cast<Eigen::Index>(m) * m == vec.size(),
          "vectorized CSM length is not a perfect square");
  CMatrix r(m, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) r(i, l) = vec(lifted_row(i, l, m));
  return r;
}

}  // namespace csbeam
