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

#include "csbeam/sparse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "csbeam/error.hpp"

namespace csbeam {
namespace {

using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Relative duality gap at which a feasible point is accepted as optimal.
constexpr double kGapTol = 1e-7;
constexpr int kPolishEvery = 10;
constexpr int kAdaptEvery = 10;
constexpr int kMaxGrow = 6;

double spectral_norm(const CMatrix& a) {
  const CMatrix gram = a.rows() <= a.cols() ? CMatrix(a * a.adjoint())
                                            : CMatrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));
}

double l1(const CVector& v) { return v.cwiseAbs().sum(); }

CVector project_ball(const CVector& v, double radius) {
  const double n = v.norm();
  if (n <= radius) return v;
  return v * (radius / n);
}

void shrink(const CVector& v, double t, bool nonneg, CVector& out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (nonneg) {
      out(i) = std::max(v(i).real() - t, 0.0);
    } else {
      const double mag = std::abs(v(i));
      out(i) = mag > t ? v(i) * ((mag - t) / mag) : Complex(0.0, 0.0);
    }
  }
}

// x-update system (I + A^H A) x = rhs, factored once.
class RidgeSolve {
 public:
  explicit RidgeSolve(const CMatrix& a) : a_(a), dual_(a.rows() < a.cols()) {
    if (dual_) {
      llt_.compute(CMatrix::Identity(a.rows(), a.rows()) + a * a.adjoint());
    } else {
      llt_.compute(CMatrix::Identity(a.cols(), a.cols()) + a.adjoint() * a);
    }
  }

  CVector solve(const CVector& rhs) const {
    if (dual_) return rhs - a_.adjoint() * llt_.solve(a_ * rhs);
    return llt_.solve(rhs);
  }

 private:
  const CMatrix& a_;
  bool dual_;
  Eigen::LLT<CMatrix> llt_;
};

struct Polished {
  CVector x;
  /// Dual vector lambda with A_S^H lambda equal to the phase pattern of x
  /// (real part equal to one when nonneg); only set when delta > 0.
  CVector lambda;
  bool ok = false;
};

using Support = std::vector<Eigen::Index>;

// Newton iteration on the stationarity system of the support-restricted
// complex program: x_j/|x_j| = mu * [B^H r]_j and ||r||^2 = delta^2, with
// r = y - Bx, in 2p + 1 real unknowns. Started from a fixed-phase estimate.
bool newton_refine(const CMatrix& b, const CVector& y, double delta, CVector& x, double& mu) {
  const Eigen::Index p = b.cols();
  const CMatrix h = b.adjoint() * b;
  auto residual = [&](const CVector& xv, double m, RVector& f) {
    const CVector g = b.adjoint() * (y - b * xv);
    f.resize(2 * p + 1);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mag = std::abs(xv(j));
      if (!(mag > 0.0)) return false;
      const Complex e = xv(j) / mag - m * g(j);
      f(j) = e.real();
      f(p + j) = e.imag();
    }
    f(2 * p) = ((y - b * xv).squaredNorm() - delta * delta) / (2.0 * delta);
    return f.allFinite();
  };
  RVector f;
  if (!residual(x, mu, f)) return false;
  double fnorm = f.norm();
  for (int step = 0; step < 50 && fnorm > 1e-13; ++step) {
    const CVector r = y - b * x;
    const CVector g = b.adjoint() * r;
    RMatrix jac = RMatrix::Zero(2 * p + 1, 2 * p + 1);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mag = std::abs(x(j));
      const double c = x(j).real() / mag, s = x(j).imag() / mag;
      jac(j, j) += (1.0 - c * c) / mag;
      jac(j, p + j) += -c * s / mag;
      jac(p + j, j) += -c * s / mag;
      jac(p + j, p + j) += (1.0 - s * s) / mag;
      jac(j, 2 * p) = -g(j).real();
      jac(p + j, 2 * p) = -g(j).imag();
      jac(2 * p, j) = -g(j).real() / delta;
      jac(2 * p, p + j) = -g(j).imag() / delta;
    }
    jac.block(0, 0, p, p) += mu * h.real();
    jac.block(0, p, p, p) += -mu * h.imag();
    jac.block(p, 0, p, p) += mu * h.imag();
    jac.block(p, p, p, p) += mu * h.real();
    const RVector dir = jac.colPivHouseholderQr().solve(-f);
    if (!dir.allFinite()) return false;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      CVector xn = x;
      for (Eigen::Index j = 0; j < p; ++j) xn(j) += t * Complex(dir(j), dir(p + j));
      const double mn = mu + t * dir(2 * p);
      RVector fn;
      if (mn > 0.0 && residual(xn, mn, fn) && fn.norm() < fnorm) {
        x = xn;
        mu = mn;
        f = fn;
        fnorm = fn.norm();
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return fnorm <= 1e-9;
}

// Optimum of the program restricted to `support`, starting from the given
// phase pattern.
//
// delta > 0: with the phase pattern s held fixed the stationarity condition
// B^H B x = B^H y - s / mu has a closed form, mu being set by ||y - Bx|| = delta.
// The phases are iterated until they agree with the answer.
// delta == 0: least squares on the support, which must fit y exactly.
Polished polish(const CMatrix& a, const CVector& y, double delta, bool nonneg,
                const Support& support, CVector phase) {
  Polished out;
  const auto p = static_cast<Eigen::Index>(support.size());
  if (p == 0 || p > a.rows() * (nonneg ? 2 : 1)) return out;

  CMatrix b(a.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j) b.col(j) = a.col(support[j]);

  CVector xs;
  if (nonneg) {
    const RMatrix h = (b.adjoint() * b).real();
    Eigen::LDLT<RMatrix> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return out;
    const RVector ls = ldlt.solve((b.adjoint() * y).real());
    RVector x = ls;
    if (delta > 0.0) {
      const RVector d = ldlt.solve(RVector::Ones(p));
      const CVector r_ls = y - b * ls.cast<Complex>();
      const double gap = delta * delta - r_ls.squaredNorm();
      const double q = (b * d.cast<Complex>()).norm();
      if (gap < 0.0 || !(q > 0.0)) return out;
      x = ls - (std::sqrt(gap) / q) * d;
      out.lambda = (q / std::sqrt(gap)) * (y - b * x.cast<Complex>());
    }
    if ((x.array() <= 0.0).any()) return out;
    xs = x.cast<Complex>();
  } else {
    const CMatrix h = b.adjoint() * b;
    Eigen::LDLT<CMatrix> ldlt(h);
    if (ldlt.info() != Eigen::Success) return out;
    const CVector ls = ldlt.solve(b.adjoint() * y);
    xs = ls;
    if (delta > 0.0) {
      const CVector r_ls = y - b * ls;
      const double gap = delta * delta - r_ls.squaredNorm();
      if (gap < 0.0) return out;
      double mu = 0.0;
      for (int sweep = 0; sweep < 50; ++sweep) {
        const CVector d = ldlt.solve(phase);
        const double q = (b * d).norm();
        if (!(q > 0.0)) return out;
        xs = ls - (std::sqrt(gap) / q) * d;
        mu = q / std::sqrt(gap);
        double change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          const double mag = std::abs(xs(j));
          if (!(mag > 0.0)) return out;
          const Complex next = xs(j) / mag;
          change = std::max(change, std::abs(next - phase(j)));
          phase(j) = next;
        }
        if (change < 1e-13) break;
      }
      if (!newton_refine(b, y, delta, xs, mu)) return out;
      out.lambda = mu * (y - b * xs);
    }
    for (Eigen::Index j = 0; j < p; ++j)
      if (!(std::abs(xs(j)) > 0.0)) return out;
  }

  out.x = CVector::Zero(a.cols());
  for (Eigen::Index j = 0; j < p; ++j) out.x(support[j]) = xs(j);
  out.ok = out.x.allFinite();
  return out;
}

// Smallest change to lambda that makes a_j^H lambda equal the phase of x_j
// (real part equal to one when nonneg) on the support of x.
CVector corrected_dual(const CMatrix& a, bool nonneg, const CVector& x, CVector lambda) {
  Support support;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) != Complex(0.0, 0.0)) support.push_back(j);
  const auto p = static_cast<Eigen::Index>(support.size());
  if (p == 0) return lambda;
  CMatrix b(a.rows(), p);
  CVector target(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    b.col(j) = a.col(support[j]);
    const Complex xj = x(support[j]);
    target(j) = nonneg ? Complex(1.0, 0.0) : xj / std::abs(xj);
  }
  if (nonneg) {
    const RMatrix h = (b.adjoint() * b).real();
    const RVector miss = target.real() - (b.adjoint() * lambda).real();
    lambda += b * Eigen::LDLT<RMatrix>(h).solve(miss).cast<Complex>();
  } else {
    const CMatrix h = b.adjoint() * b;
    lambda += b * Eigen::LDLT<CMatrix>(h).solve(target - b.adjoint() * lambda);
  }
  return lambda;
}

// Lower bound on the optimal objective from any lambda: scaled into the dual
// feasible set (|a_j^H lambda| <= 1, or Re(.) <= 1 when nonneg), the dual
// function Re(lambda^H y) - delta * ||lambda|| is a valid bound.
double dual_bound(const CMatrix& a, const CVector& y, double delta, bool nonneg,
                  const CVector& lambda) {
  const CVector corr = a.adjoint() * lambda;
  const double level = nonneg ? corr.real().maxCoeff() : corr.cwiseAbs().maxCoeff();
  const double scale = level > 1.0 ? 1.0 / level : 1.0;
  if (!std::isfinite(level)) return -std::numeric_limits<double>::infinity();
  return scale * (lambda.dot(y).real() - delta * lambda.norm());
}

// Supports worth polishing: that of the iterate, and the sets where the
// subgradient estimate rho*u is (nearly) saturated.
std::vector<Support> candidate_supports(const CVector& z, const CVector& subgradient,
                                        bool nonneg, Eigen::Index max_size) {
  std::vector<Support> out;
  auto add = [&](Support s) {
    if (s.empty() || static_cast<Eigen::Index>(s.size()) > max_size) return;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  };
  const double peak = z.cwiseAbs().maxCoeff();
  Support from_z;
  if (peak > 0.0) {
    for (Eigen::Index j = 0; j < z.size(); ++j)
      if (std::abs(z(j)) > 1e-12 * peak) from_z.push_back(j);
  }
  add(from_z);
  for (double tol : {1e-2, 1e-3, 1e-4}) {
    Support s;
    for (Eigen::Index j = 0; j < subgradient.size(); ++j) {
      const double level = nonneg ? subgradient(j).real() : std::abs(subgradient(j));
      if (level >= 1.0 - tol) s.push_back(j);
    }
    add(s);
  }
  return out;
}

CVector phases_for(const Support& support, const CVector& z, const CVector& subgradient) {
  CVector phase(static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    const Complex src = z(support[j]) != Complex(0.0, 0.0) ? z(support[j])
                                                           : subgradient(support[j]);
    phase(static_cast<Eigen::Index>(j)) =
        std::abs(src) > 0.0 ? src / std::abs(src) : Complex(1.0, 0.0);
  }
  return phase;
}

// Moves x along the least-squares correction on its own support just far
// enough to bring the residual down to `radius`. Empty if that is impossible.
std::optional<CVector> restore_feasibility(const CMatrix& a, const CVector& y, bool nonneg,
                                           const CVector& x, double radius) {
  const CVector r = y - a * x;
  const double r2 = r.squaredNorm();
  if (r2 <= radius * radius) return x;
  Support support;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) != Complex(0.0, 0.0)) support.push_back(j);
  if (support.empty()) return std::nullopt;
  const auto p = static_cast<Eigen::Index>(support.size());
  CMatrix b(a.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j) b.col(j) = a.col(support[j]);

  CVector c;
  if (nonneg) {
    RMatrix stacked(2 * a.rows(), p);
    stacked << b.real(), b.imag();
    RVector rhs(2 * a.rows());
    rhs << r.real(), r.imag();
    c = Eigen::CompleteOrthogonalDecomposition<RMatrix>(stacked).solve(rhs).cast<Complex>();
  } else {
    c = Eigen::CompleteOrthogonalDecomposition<CMatrix>(b).solve(r);
  }
  // ||r - t P r||^2 = ||r||^2 - (2t - t^2) ||P r||^2 for the projection P r = B c.
  const double pr2 = (b * c).squaredNorm();
  const double need = (r2 - radius * radius) / pr2;
  if (!(pr2 > 0.0) || need > 1.0) return std::nullopt;
  const double t = std::min(1.0, 1.0 - std::sqrt(std::max(0.0, 1.0 - need)) + 1e-12);
  CVector out = x;
  for (Eigen::Index j = 0; j < p; ++j) {
    out(support[j]) += t * c(j);
    if (nonneg) {
      if (out(support[j]).real() < 0.0) return std::nullopt;
      out(support[j]) = out(support[j]).real();
    }
  }
  return out;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxItersExceeded: return "max-iters-exceeded";
    case SolveStatus::kInfeasibleNonneg: return "infeasible-nonneg";
  }
  return "unknown";
}

bool delta_zero_feasibility(const CMatrix& A, const CVector& y) {
  require(A.rows() == y.size(), "A and y dimensions disagree");
  const double ny = y.norm();
  if (ny == 0.0) return true;
  Eigen::BDCSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CVector x = svd.solve(y);
  return (y - A * x).norm() <= 1e-9 * ny;
}

double nonneg_residual_floor(const CMatrix& A, const CVector& y, CVector* minimizer) {
  require(A.rows() == y.size(), "A and y dimensions disagree");
  const RMatrix h = (A.adjoint() * A).real();
  const RVector c = (A.adjoint() * y).real();
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(h, Eigen::EigenvaluesOnly);
  const double lip = std::max(eig.eigenvalues().maxCoeff(), 1e-300);

  // FISTA with gradient restart.
  RVector x = RVector::Zero(h.cols());
  RVector v = x;
  double t = 1.0;
  for (int it = 0; it < 20000; ++it) {
    const RVector grad = h * v - c;
    const RVector next = (v - grad / lip).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const RVector step = next - x;
    if (grad.dot(next - x) > 0.0) {
      v = next;
      t = 1.0;
    } else {
      v = next + ((t - 1.0) / t_next) * step;
      t = t_next;
    }
    x = next;
    if (step.norm() <= 1e-14 * std::max(1.0, x.norm())) break;
  }
  if (minimizer) *minimizer = x.cast<Complex>();
  return (y - A * x.cast<Complex>()).norm();
}

int min_measurements(int sparsity, double n, double c_k) {
  require(sparsity >= 1, "sparsity must be positive");
  require(c_k > 0.0, "c_k must be positive");
  require(static_cast<double>(sparsity) < n, "sparsity must be smaller than n");
  const double bound = c_k * sparsity * std::log(n / sparsity);
  // Absorb rounding so that exact integers are not bumped up.
  return std::max(1, static_cast<int>(std::ceil(bound - 1e-12 * std::abs(bound))));
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iter,objective,primal_res,dual_res\n";
  os.precision(17);
  for (const auto& row : trace)
    os << row.iter << ',' << row.objective << ',' << row.primal_res << ','
       << row.dual_res << '\n';
}

BpdnSolution solve_bpdn(const BpdnProblem& problem, const SolveOptions& options) {
  const CMatrix& A = problem.A;
  const CVector& y = problem.y;
  const Eigen::Index k = A.rows();
  const Eigen::Index n = A.cols();
  require(k >= 1 && n >= 1, "empty measurement matrix");
  require(y.size() == k, "y length does not match A rows");
  require(problem.delta >= 0.0 && std::isfinite(problem.delta),
          "delta must be finite and nonnegative");
  require(A.allFinite() && y.allFinite(), "A and y must be finite");
  require(problem.tolerances.max_iters >= 1, "max_iters must be positive");
  for (Eigen::Index j = 0; j < n; ++j)
    require(A.col(j).squaredNorm() > 0.0, "A has an all-zero column");

  BpdnSolution sol;
  const double y_norm = y.norm();
  if (y_norm <= problem.delta) {
    sol.x = CVector::Zero(n);
    sol.residual_norm = y_norm;
    sol.converged = true;
    sol.status = SolveStatus::kConverged;
    return sol;
  }

  // Rescaled problem: ||A_s||_2 = 1, ||y_s|| = 1, x = (y_norm / a_norm) x_s.
  const double a_norm = spectral_norm(A);
  const CMatrix as = A / a_norm;
  const CVector ys = y / y_norm;
  const double unscale = y_norm / a_norm;
  const double delta = problem.delta / y_norm;

  const bool exact = problem.delta == 0.0;
  if (exact) {
    if (problem.nonneg) {
      CVector nnls;
      const double floor = nonneg_residual_floor(as, ys, &nnls);
      if (floor > 1e-9) {
        sol.x = nnls * unscale;
        sol.residual_norm = (y - A * sol.x).norm();
        sol.objective = l1(sol.x);
        sol.status = SolveStatus::kInfeasibleNonneg;
        return sol;
      }
    } else if (!delta_zero_feasibility(as, ys)) {
      fail(ErrorKind::kInfeasible, "delta = 0 but y is outside the range of A");
    }
  }

  const bool nonneg = problem.nonneg;
  const auto& tol = problem.tolerances;
  const RidgeSolve ridge(as);

  CVector x = CVector::Zero(n), z = x, u = x, z_old(n);
  CVector w = CVector::Zero(k), v = w, w_old(k), ax(k);
  double rho = 1.0;
  const double sqrt_p = std::sqrt(static_cast<double>(n + k));
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  // delta == 0 is accepted at a residual of kZeroDeltaRadius * ||y||.
  const double limit = exact ? kZeroDeltaRadius : delta * (1.0 + kFeasibilitySlack);
  const Eigen::Index max_support = k * (nonneg ? 2 : 1);
  // Best feasible point reachable from the current iterate, and whether the
  // duality gap proves it optimal.
  struct Candidate {
    CVector x;
    bool optimal = false;
  };
  auto try_polish = [&]() -> std::optional<Candidate> {
    const CVector subgradient = rho * u;
    const CVector admm_dual = -rho * v;
    std::optional<CVector> best;
    double bound = dual_bound(as, ys, delta, nonneg, admm_dual);
    auto offer = [&](const CVector& cand) {
      if ((ys - as * cand).norm() > limit) return;
      if (!best || l1(cand) < l1(*best)) best = cand;
    };
    for (Support s : candidate_supports(z, subgradient, nonneg, max_support)) {
      // Active-set refinement: add the worst dual violator; if the enlarged
      // support has no stationary point, drop whichever old atom works best.
      Polished p = polish(as, ys, delta, nonneg, s, phases_for(s, z, subgradient));
      for (int grow = 0; p.ok; ++grow) {
        offer(p.x);
        const CVector lambda =
            p.lambda.size() > 0 ? p.lambda : corrected_dual(as, nonneg, p.x, admm_dual);
        bound = std::max(bound, dual_bound(as, ys, delta, nonneg, lambda));
        if (grow == kMaxGrow) break;
        const CVector corr = as.adjoint() * lambda;
        Eigen::Index worst = -1;
        double level_max = 1.0 + 1e-12;
        for (Eigen::Index j = 0; j < corr.size(); ++j) {
          if (p.x(j) != Complex(0.0, 0.0)) continue;
          const double level = nonneg ? corr(j).real() : std::abs(corr(j));
          if (level > level_max) {
            level_max = level;
            worst = j;
          }
        }
        if (worst < 0) break;
        // Phase of the new atom follows its correlation with the dual.
        CVector hint = subgradient;
        hint(worst) = corr(worst);
        Support grown = s;
        grown.insert(std::upper_bound(grown.begin(), grown.end(), worst), worst);
        Polished next;
        if (static_cast<Eigen::Index>(grown.size()) <= max_support) {
          next = polish(as, ys, delta, nonneg, grown, phases_for(grown, p.x, hint));
        }
        if (!next.ok) {
          for (Eigen::Index drop : s) {
            Support swapped = grown;
            swapped.erase(std::find(swapped.begin(), swapped.end(), drop));
            Polished trial =
                polish(as, ys, delta, nonneg, swapped, phases_for(swapped, p.x, hint));
            if (trial.ok && (!next.ok || l1(trial.x) < l1(next.x))) {
              next = std::move(trial);
              grown = swapped;
            }
          }
        }
        if (!next.ok) break;
        s = std::move(grown);
        p = std::move(next);
      }
    }
    CVector zr = z;
    if (nonneg) zr = z.real().cwiseMax(0.0).cast<Complex>();
    if (auto restored = restore_feasibility(as, ys, nonneg, zr, exact ? 0.0 : delta)) {
      offer(*restored);
    }
    if (!best) return std::nullopt;
    const double primal = l1(*best);
    return Candidate{*best, primal - bound <= kGapTol * primal + 1e-14};
  };

  int it = 0;
  bool converged = false;
  std::optional<CVector> optimal;
  for (it = 1; it <= tol.max_iters; ++it) {
    x = ridge.solve((z - u) + as.adjoint() * (ys - w - v));
    ax = as * x;

    z_old = z;
    w_old = w;
    shrink(x + u, 1.0 / rho, nonneg, z);
    w = exact ? CVector::Zero(k) : project_ball(ys - ax - v, delta);

    const CVector r_x = x - z;
    const CVector r_y = ax + w - ys;
    u += r_x;
    v += r_y;

    const double r_norm = std::sqrt(r_x.squaredNorm() + r_y.squaredNorm());
    const double s_norm = rho * ((z - z_old) + as.adjoint() * (w - w_old)).norm();
    const double eps_pri =
        sqrt_p * tol.abs_tol +
        tol.rel_tol * std::max({std::sqrt(x.squaredNorm() + ax.squaredNorm()),
                                std::sqrt(z.squaredNorm() + w.squaredNorm()), 1.0});
    const double eps_dual =
        sqrt_n * tol.abs_tol + tol.rel_tol * rho * (u + as.adjoint() * v).norm();

    if (options.record_trace)
      sol.trace.push_back({it, unscale * l1(z), r_norm, s_norm});

    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      converged = true;
      break;
    }
    if (it % kPolishEvery == 0) {
      if (auto c = try_polish(); c && c->optimal) {
        optimal = c->x;
        converged = true;
        break;
      }
    }
    if (it % kAdaptEvery != 0) {
      // Penalty held fixed between balancing steps.
    } else if (r_norm > 10.0 * s_norm) {
      rho *= 2.0;
      u /= 2.0;
      v /= 2.0;
    } else if (s_norm > 10.0 * r_norm) {
      rho /= 2.0;
      u *= 2.0;
      v *= 2.0;
    }
  }
  sol.iterations = std::min(it, tol.max_iters);

  if (!optimal) {
    if (auto c = try_polish()) {
      optimal = c->x;
      converged = converged || c->optimal;
    }
  }
  const CVector best = optimal ? *optimal : z;
  const bool feasible = (ys - as * best).norm() <= limit;

  sol.x = best * unscale;
  if (nonneg) sol.x = sol.x.real().cwiseMax(0.0).cast<Complex>();
  sol.residual_norm = (y - A * sol.x).norm();
  sol.objective = l1(sol.x);
  sol.converged = converged && feasible;
  sol.status = sol.converged ? SolveStatus::kConverged : SolveStatus::kMaxItersExceeded;

  if (!sol.converged && nonneg && !exact) {
    if (nonneg_residual_floor(as, ys) > limit) sol.status = SolveStatus::kInfeasibleNonneg;
  }
  return sol;
}

}  // namespace csbeam
