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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "csbeam/beamformers.hpp"
#include "csbeam/error.hpp"
#include "csbeam/geometry.hpp"
#include "csbeam/imaging_metrics.hpp"
#include "csbeam/signal_sim.hpp"
#include "csbeam/wave_model.hpp"

namespace csbeam {
namespace {

struct Scene {
  ArrayGeometry geometry = subsample_sensors(spiral_array(56, 7, 0.5), 10, 42);
  ImagingGrid grid = make_grid({-1, 1, -1, 1}, 21, 21, 1.0);
  SteeringMatrix steering = steering_matrix(geometry, grid, 5000.0);
  LiftedMatrix lifted = lift_steering_matrix(steering);
};

const Scene& setup() {
  static const Scene s;
  return s;
}

CrossSpectralMatrix outer(const CVector& g, double scale = 1.0) {
  CrossSpectralMatrix r;
  r.entries = scale * g * g.adjoint();
  r.block_count = 1;
  r.frequency = 5000.0;
  return r;
}

DeltaPolicy from_noise(double sigma2, double safety, int blocks = 1) {
  DeltaPolicy p;
  p.noise_power = sigma2;
  p.safety = safety;
  p.block_count = blocks;
  return p;
}

TEST(ResolveDelta, Csb1) {
  EXPECT_EQ(resolve_delta_csb1(from_noise(0.0, 1.3), 10), 0.0);
  EXPECT_DOUBLE_EQ(resolve_delta_csb1(from_noise(1.0, 1.0), 16), 4.0);
  DeltaPolicy explicit_policy;
  explicit_policy.mode = DeltaPolicy::Mode::kExplicit;
  explicit_policy.explicit_value = 0.37;
  EXPECT_EQ(resolve_delta_csb1(explicit_policy, 10), 0.37);
  EXPECT_THROW(resolve_delta_csb1(from_noise(-1.0, 1.0), 4), Error);
}

TEST(ResolveDelta, Csb2) {
  EXPECT_EQ(resolve_delta_csb2(from_noise(0.0, 1.0, 7), 10), 0.0);
  EXPECT_DOUBLE_EQ(resolve_delta_csb2(from_noise(1.0, 1.0, 16), 4), 3.0);
  EXPECT_DOUBLE_EQ(resolve_delta_csb2(from_noise(2.0, 1.5, 100), 100), 60.0);
  try {
    resolve_delta_csb2(from_noise(1.0, 1.0, 0), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(Csb1, NoiselessOnGridSourceIsOneSparse) {
  const Scene& s = setup();
  const int k = s.grid.nearest_index(Vec3(0.2, -0.4, 1.0));
  const PowerMap map = csb1(s.steering.entries().col(k), s.steering, 0.0);
  EXPECT_TRUE(map.converged);
  EXPECT_EQ(map.algorithm, Algorithm::kCSB1);
  EXPECT_NEAR(map.values(k), 1.0, 1e-8);
  for (int j = 0; j < map.size(); ++j) {
    if (j != k) EXPECT_LT(map.values(j), 1e-8) << j;
  }
}

TEST(Csb1, ZeroSnapshotGivesZeroMap) {
  const Scene& s = setup();
  const PowerMap map = csb1(CVector::Zero(10), s.steering, 0.0);
  EXPECT_EQ(map.values, Eigen::VectorXd::Zero(441));
}

TEST(Csb1, PowerIsQuadraticInAmplitude) {
  const Scene& s = setup();
  const int k = s.grid.nearest_index(Vec3(0, 0, 1));
  const Complex c(1.5, -2.0);
  const PowerMap map = csb1(c * s.steering.entries().col(k), s.steering, 0.0);
  EXPECT_NEAR(map.values(k), std::norm(c), 1e-8 * std::norm(c));
}

TEST(Csb1Multi, SingleAndRepeatedBlocksMatchCsb1) {
  const Scene& s = setup();
  const int k = s.grid.nearest_index(Vec3(-0.3, 0.1, 1.0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1e-4);
  CVector y = s.steering.entries().col(k);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += Complex(normal(rng), normal(rng));
  const double delta = 3e-4;
  const PowerMap one = csb1(y, s.steering, delta);

  SnapshotSet single;
  single.blocks = y;
  const PowerMap m1 = csb1_multi(single, s.steering, delta);
  EXPECT_EQ(m1.values, one.values);
  EXPECT_TRUE(m1.multi_block);

  SnapshotSet repeated;
  repeated.blocks = y.replicate(1, 4);
  const PowerMap m4 = csb1_multi(repeated, s.steering, delta);
  EXPECT_LT((m4.values - one.values).norm(), 1e-12 * one.values.norm());
  EXPECT_EQ(m4.block_count, 4);
}

TEST(Csb1Multi, AveragingStabilizesPeak) {
  // 20 noise seeds at 0 dB in-bin SNR: the peak of the 50-block average
  // scatters less than the single-block peak.
  const Scene& s = setup();
  const int k = s.grid.nearest_index(Vec3(0, 0, 1));
  const CVector g = s.steering.entries().col(k);
  const double sigma2 = g.squaredNorm() / g.size();
  const double delta = 1.1 * std::sqrt(sigma2 * g.size());
  std::normal_distribution<double> normal(0.0, std::sqrt(sigma2 / 2.0));
  double var_one = 0.0, var_multi = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    SnapshotSet snaps;
    snaps.blocks.resize(g.size(), 50);
    for (int b = 0; b < 50; ++b) {
      const Complex phase = std::polar(1.0, 0.1 * b);
      for (Eigen::Index i = 0; i < g.size(); ++i)
        snaps.blocks(i, b) = phase * g(i) + Complex(normal(rng), normal(rng));
    }
    auto err2 = [&](const PowerMap& m) {
      if (m.values.maxCoeff() <= 0.0) return 8.0;  // empty map: grid diagonal squared
      return (s.grid.point(peak_index(m)) - s.grid.point(k)).squaredNorm();
    };
    var_one += err2(csb1(snaps.blocks.col(0), s.steering, delta));
    var_multi += err2(csb1_multi(snaps, s.steering, delta));
  }
  EXPECT_LT(var_multi, var_one);
}

TEST(Csb2, ExactCsmIsOneSparse) {
  const Scene& s = setup();
  const int k = s.grid.nearest_index(Vec3(0.5, 0.3, 1.0));
  const PowerMap map = csb2(outer(s.steering.entries().col(k)), s.lifted, 0.0);
  EXPECT_TRUE(map.converged);
  EXPECT_NEAR(map.values(k), 1.0, 1e-8);
  for (int j = 0; j < map.size(); ++j) {
    if (j != k) EXPECT_LT(map.values(j), 1e-8) << j;
    EXPECT_GE(map.values(j), 0.0);
  }
}

TEST(Csb2, LinearInCsmScale) {
  const Scene& s = setup();
  const CVector g1 = s.steering.entries().col(s.grid.nearest_index(Vec3(0.3, 0, 1)));
  const CVector g2 = s.steering.entries().col(s.grid.nearest_index(Vec3(-0.4, 0.2, 1)));
  CrossSpectralMatrix r = outer(g1);
  r.entries += 0.5 * g2 * g2.adjoint();
  const double delta = 0.05 * vectorize_csm(r).norm();
  const PowerMap base = csb2(r, s.lifted, delta);
  for (double c : {0.1, 7.0}) {
    CrossSpectralMatrix rc = r;
    rc.entries *= c;
    const PowerMap scaled = csb2(rc, s.lifted, delta * c);
    EXPECT_LT((scaled.values - c * base.values).norm(), 1e-6 * c * base.values.norm());
  }
}

TEST(Csb2, DiagonalRemovalIgnoresWhiteNoise) {
  const Scene& s = setup();
  const int k = s.grid.nearest_index(Vec3(0, 0.2, 1));
  CrossSpectralMatrix r = outer(s.steering.entries().col(k));
  r.entries += 0.3 * r.entries.diagonal().real().mean() * CMatrix::Identity(10, 10);
  const PowerMap map = csb2(r, s.lifted, 0.0, {}, Csb2Options{true});
  EXPECT_NEAR(map.values(k), 1.0, 1e-8);
  EXPECT_LT(map.values.sum() - map.values(k), 1e-8);
}

TEST(Csb2, InfeasibleNonnegIsReported) {
  const Scene& s = setup();
  const CrossSpectralMatrix r = outer(s.steering.entries().col(100), -1.0);
  try {
    csb2(r, s.lifted, 0.1 * vectorize_csm(r).norm());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleNonneg);
  }
}

TEST(Cb, UnitSourceGivesUnitPower) {
  const Scene& s = setup();
  const int k = 137;
  const PowerMap map = cb(outer(s.steering.entries().col(k)), s.steering);
  EXPECT_NEAR(map.values(k), 1.0, 1e-12);
  EXPECT_EQ(peak_index(map), k);
}

TEST(Cb, WhiteNoiseResponse) {
  const Scene& s = setup();
  CrossSpectralMatrix r;
  r.entries = 2.5 * CMatrix::Identity(10, 10);
  const PowerMap map = cb(r, s.steering);
  for (int k = 0; k < map.size(); ++k) {
    EXPECT_NEAR(map.values(k), 2.5 / s.steering.entries().col(k).squaredNorm(),
                1e-12 * map.values(k));
  }
}

TEST(Beamformers, NoiselessPeaksAgree) {
  const Scene& s = setup();
  Source src;
  src.position = s.grid.point(s.grid.nearest_index(Vec3(0.2, 0.1, 1.0)));
  src.frequency = 5000.0;
  const TimeSeries ts = synthesize(SourceScene{{src}}, s.geometry, 48000.0, 0.5);
  const SnapshotSet snaps = to_snapshots(ts, 4800, 5000.0);
  const CrossSpectralMatrix r = estimate_csm(snaps);
  const int k = s.grid.nearest_index(src.position);
  // With w = g/|g|^2 a distant grating lobe can outweigh the source cell
  // (|g| shrinks with range), so CB is checked through Cauchy-Schwarz:
  // |g_j^H g_s|^2 / |g_j|^2 peaks only where g_j is parallel to g_s.
  PowerMap scaled = cb(r, s.steering);
  for (int j = 0; j < scaled.size(); ++j)
    scaled.values(j) *= s.steering.entries().col(j).squaredNorm();
  EXPECT_EQ(peak_index(scaled), k);
  EXPECT_EQ(peak_index(csb1(snaps.blocks.col(0), s.steering, 0.0)), k);
  EXPECT_EQ(peak_index(csb2(r, s.lifted, 1e-6 * vectorize_csm(r).norm())), k);
}

TEST(Beamformers, AmplitudeScalingIsQuadratic) {
  const Scene& s = setup();
  const CVector g = s.steering.entries().col(s.grid.nearest_index(Vec3(-0.2, -0.2, 1)));
  const double c = 3.0;
  const PowerMap a1 = csb1(g, s.steering, 0.0);
  const PowerMap ac = csb1(c * g, s.steering, 0.0);
  EXPECT_LT((ac.values - c * c * a1.values).norm(), 1e-8 * c * c * a1.values.norm());
  const PowerMap b1 = csb2(outer(g), s.lifted, 0.0);
  const PowerMap bc = csb2(outer(c * g), s.lifted, 0.0);
  EXPECT_LT((bc.values - c * c * b1.values).norm(), 1e-8 * c * c * b1.values.norm());
}

TEST(Beamformers, PermutationEquivariance) {
  const Scene& s = setup();
  std::vector<int> perm(441);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
  CMatrix permuted(10, 441);
  for (int j = 0; j < 441; ++j) permuted.col(j) = s.steering.entries().col(perm[j]);
  const SteeringMatrix sp(permuted, 5000.0, kDefaultSpeed);
  const LiftedMatrix lp = lift_steering_matrix(sp);

  const CVector g1 = s.steering.entries().col(200);
  const CVector g2 = s.steering.entries().col(310);
  CrossSpectralMatrix r = outer(g1);
  r.entries += 0.7 * g2 * g2.adjoint();
  const CVector y = g1 + Complex(0.0, 0.8) * g2;

  auto check = [&](const PowerMap& base, const PowerMap& moved) {
    const double tol = 1e-6 * base.values.maxCoeff();
    for (int j = 0; j < 441; ++j) EXPECT_NEAR(moved.values(j), base.values(perm[j]), tol);
  };
  check(cb(r, s.steering), cb(r, sp));
  check(csb1(y, s.steering, 0.01 * y.norm()), csb1(y, sp, 0.01 * y.norm()));
  const double d2 = 0.01 * vectorize_csm(r).norm();
  check(csb2(r, s.lifted, d2), csb2(r, lp, d2));
}

TEST(Cb, NonnegativeOnRandomPsdCsm) {
  const Scene& s = setup();
  const CMatrix x = CMatrix::Random(10, 3);
  CrossSpectralMatrix r;
  r.entries = x * x.adjoint();
  const PowerMap map = cb(r, s.steering);
  EXPECT_GE(map.values.minCoeff(), 0.0);
}

}  // namespace
}  // namespace csbeam
