#pragma once

#include <cmath>
#include <functional>

#include "eigo/common.hpp"
#include "eigo/kernel.hpp"

namespace eigo {

/// Finite combination of kernel translates, mu + sum_i lambda_i K_theta(. - c_i),
/// with exact squared norm lambda^T V lambda.
struct RkhsSpanFunction {
  KernelSpec spec;
  std::vector<Vec> centers;
  Vec weights;
  double offset = 0.0;
  double norm = 0.0;

  RkhsSpanFunction(KernelSpec spec_, std::vector<Vec> centers_, Vec weights_,
                   double offset_ = 0.0)
      : spec(std::move(spec_)),
        centers(std::move(centers_)),
        weights(std::move(weights_)),
        offset(offset_) {
    if (static_cast<Eigen::Index>(centers.size()) != weights.size())
      throw dimension_error("RkhsSpanFunction: centers/weights size mismatch");
    const Mat V = gram(spec, centers);
    norm = std::sqrt(std::max(0.0, double(weights.dot(V * weights))));
  }

  double operator()(const Vec& x) const {
    double acc = offset;
    for (size_t i = 0; i < centers.size(); ++i)
      acc += weights[static_cast<Eigen::Index>(i)] * eval_scaled(spec, x - centers[i]);
    return acc;
  }
};

inline double eval_span(const RkhsSpanFunction& f, const Vec& x) { return f(x); }

/// Mollifier bump: depth * exp(1 - 1/(1 - r^2)) inside the open ball of the
/// given radius, identically zero outside; infinitely differentiable.
struct BumpFunction {
  Vec center;
  double radius;
  double depth;

  BumpFunction(Vec center_, double radius_, double depth_)
      : center(std::move(center_)), radius(radius_), depth(depth_) {
    if (!(radius > 0.0)) throw config_error("BumpFunction: radius must be positive");
  }

  double operator()(const Vec& x) const {
    const double r2 = (x - center).squaredNorm() / (radius * radius);
    if (r2 >= 1.0) return 0.0;
    return depth * std::exp(1.0 - 1.0 / (1.0 - r2));
  }
};

inline double eval_bump(const BumpFunction& b, const Vec& x) { return b(x); }

namespace detail {
/// C-infinity step: exactly 0 for t <= 0, exactly 1 for t >= 1.
inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}
}  // namespace detail

/// The divergence counterexample: a smooth plateau function f (0 on the outer
/// region V0, 1 on the inner region V1) and g = f plus a depth -2 spike
/// supported in a ball W inside V1, so min f = 0 and min g = -1 while f and g
/// agree everywhere outside W.
///
/// Geometry is radial about the domain center: V1 is the ball of radius r1,
/// V0 the complement of the ball of radius r0 (intersected with the domain),
/// with a smooth transition between. In one dimension with the defaults this
/// reproduces V0 = [0, 0.3] u [0.7, 1], V1 = [0.45, 0.55] and W centered at
/// 0.5 with radius 0.03.
struct CounterexamplePair {
  Box domain;
  Vec plateau_center;
  double r0 = 0.2;   // outside this radius: f = 0
  double r1 = 0.05;  // inside this radius: f = 1
  Vec spike_center;
  double w_radius = 0.03;
  BumpFunction spike;

  CounterexamplePair(Box domain_, Vec plateau_center_, double r0_, double r1_,
                     Vec spike_center_, double w_radius_)
      : domain(std::move(domain_)),
        plateau_center(std::move(plateau_center_)),
        r0(r0_),
        r1(r1_),
        spike_center(std::move(spike_center_)),
        w_radius(w_radius_),
        spike(spike_center, w_radius, -2.0) {
    if (!(r1 < r0)) throw config_error("CounterexamplePair: need r1 < r0");
    if ((spike_center - plateau_center).norm() + w_radius > r1)
      throw config_error("CounterexamplePair: spike ball W must lie inside V1");
  }

  double f_plateau(const Vec& x) const {
    const double r = (x - plateau_center).norm();
    return detail::smoothstep((r0 - r) / (r0 - r1));
  }

  double g_spiked(const Vec& x) const { return f_plateau(x) + spike(x); }

  bool in_v0(const Vec& x) const { return (x - plateau_center).norm() >= r0; }
  bool in_v1(const Vec& x) const { return (x - plateau_center).norm() <= r1; }
  bool in_w(const Vec& x) const { return (x - spike_center).norm() < w_radius; }

  double min_f() const { return 0.0; }
  double min_g() const { return -1.0; }
};

/// Construct the counterexample on the given domain. v0_fraction is the
/// fraction of the shortest domain width lying outside V0's defining ball on
/// each side (0.3 reproduces the default geometry on [0,1]); the spike center
/// is placed at the plateau center for seed 0 and jittered uniformly within
/// V1 (keeping W inside) otherwise.
inline CounterexamplePair make_counterexample(const Box& domain,
                                              double v0_fraction = 0.3,
                                              double w_radius = 0.03,
                                              std::uint64_t seed = 0) {
  const Vec center = 0.5 * (domain.lower + domain.upper);
  const double wmin = domain.width().minCoeff();
  const double r0 = (0.5 - v0_fraction) * wmin;
  const double r1 = 0.25 * r0;
  if (!(w_radius < r1))
    throw config_error("make_counterexample: w_radius must be below r1");
  Vec spike_center = center;
  if (seed != 0) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double slack = r1 - w_radius;
    Vec offset(domain.dim());
    do {
      for (int i = 0; i < domain.dim(); ++i) offset[i] = slack * unif(rng);
    } while (offset.norm() > slack);
    spike_center = center + offset;
  }
  return CounterexamplePair(domain, center, r0, r1, spike_center, w_radius);
}

/// The adversarial family: (2k)^d bumps with pairwise disjoint supports, one
/// per open subcube of the 2k-grid on [0,1]^d, each attaining minimum
/// -C (2k)^{-nu} at its subcube center.
struct BumpFamily {
  int k = 1;
  int d = 1;
  double nu = 0.5;
  double amplitude = 1.0;  // C
  std::vector<BumpFunction> members;

  int size() const { return static_cast<int>(members.size()); }
  double member_min() const { return -amplitude * std::pow(2.0 * k, -nu); }
};

inline BumpFamily make_bump_family(int k, int d, double nu, double amplitude) {
  if (k < 1) throw config_error("make_bump_family: k must be >= 1");
  if (d < 1 || d > 3) throw config_error("make_bump_family: d must be in 1..3");
  BumpFamily fam;
  fam.k = k;
  fam.d = d;
  fam.nu = nu;
  fam.amplitude = amplitude;
  const int cells = 2 * k;
  const double side = 1.0 / cells;
  const double depth = -amplitude * std::pow(2.0 * k, -nu);
  std::vector<int> idx(d, 0);
  while (true) {
    Vec center(d);
    for (int j = 0; j < d; ++j) center[j] = (idx[j] + 0.5) * side;
    fam.members.emplace_back(center, 0.5 * side, depth);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < cells) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  return fam;
}

}  // namespace eigo
