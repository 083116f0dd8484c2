#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "eigo/common.hpp"

namespace eigo {

enum class KernelFamily { Matern, Gaussian };

/// Stationary correlation kernel: an isotropic base kernel K with K(0) = 1,
/// rescaled per coordinate by length-scales theta.
///
/// Matern smoothness is restricted to the half-integers 1/2, 3/2, 5/2, 7/2,
/// which have closed forms; the Gaussian kernel is the nu = infinity limit.
struct KernelSpec {
  KernelFamily family;
  double nu;  // smoothness; infinity for Gaussian
  Vec theta;  // per-coordinate length-scales, all > 0

  KernelSpec(KernelFamily fam, double nu_, Vec theta_)
      : family(fam), nu(nu_), theta(std::move(theta_)) {
    if (family == KernelFamily::Gaussian) {
      nu = std::numeric_limits<double>::infinity();
    } else {
      if (!(nu == 0.5 || nu == 1.5 || nu == 2.5 || nu == 3.5))
        throw config_error("KernelSpec: Matern nu must be one of 1/2, 3/2, 5/2, 7/2");
    }
    if (theta.size() == 0) throw config_error("KernelSpec: theta must be non-empty");
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      if (!(theta[i] > 0.0)) throw config_error("KernelSpec: theta must be positive");
  }

  static KernelSpec matern(double nu, Vec theta) {
    return KernelSpec(KernelFamily::Matern, nu, std::move(theta));
  }
  static KernelSpec gaussian(Vec theta) {
    return KernelSpec(KernelFamily::Gaussian,
                      std::numeric_limits<double>::infinity(), std::move(theta));
  }

  KernelSpec with_theta(Vec t) const { return KernelSpec(family, nu, std::move(t)); }

  int dim() const { return static_cast<int>(theta.size()); }

  /// Log-factor exponent: 1/2 for integer-nu Matern, else 0.
  double alpha() const {
    if (family == KernelFamily::Matern && nu == std::floor(nu)) return 0.5;
    return 0.0;
  }
};

/// Base correlation at radial distance r >= 0; K(0) = 1, non-increasing.
inline double eval_base(const KernelSpec& spec, double r) {
  if (r < 0.0) throw std::invalid_argument("eval_base: r must be non-negative");
  if (spec.family == KernelFamily::Gaussian) return std::exp(-0.5 * r * r);
  const double u = std::sqrt(2.0 * spec.nu) * r;
  if (spec.nu == 0.5) return std::exp(-u);
  if (spec.nu == 1.5) return (1.0 + u) * std::exp(-u);
  if (spec.nu == 2.5) return (1.0 + u + u * u / 3.0) * std::exp(-u);
  // nu == 3.5
  return (1.0 + u + 0.4 * u * u + u * u * u / 15.0) * std::exp(-u);
}

/// Correlation at lag t, after per-coordinate rescaling by theta.
inline double eval_scaled(const KernelSpec& spec, const Vec& t) {
  if (t.size() != spec.theta.size())
    throw dimension_error("eval_scaled: lag dimension does not match theta");
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double s = t[i] / spec.theta[i];
    r2 += s * s;
  }
  return eval_base(spec, std::sqrt(r2));
}

namespace detail {
inline bool duplicate_after_scaling(const KernelSpec& spec, const Vec& a,
                                    const Vec& b, double tol) {
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (std::abs((a[k] - b[k]) / spec.theta[k]) > tol) return false;
  return true;
}
}  // namespace detail

/// Gram matrix V = (K_theta(x_i - x_j)). Rejects duplicate points: they carry
/// no information under noiseless observation and make V singular.
inline Mat gram(const KernelSpec& spec, const std::vector<Vec>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 1) throw std::invalid_argument("gram: need at least one point");
  for (const auto& p : points)
    if (p.size() != spec.theta.size())
      throw dimension_error("gram: point dimension does not match theta");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (detail::duplicate_after_scaling(spec, points[i], points[j], 1e-10))
        throw std::invalid_argument("gram: duplicate points at indices " +
                                    std::to_string(i) + " and " + std::to_string(j));
  Mat V(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    V(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = eval_scaled(spec, points[i] - points[j]);
      V(i, j) = k;
      V(j, i) = k;
    }
  }
  return V;
}

/// Cross-covariance vector v = (K_theta(x - x_i)).
inline Vec cross(const KernelSpec& spec, const std::vector<Vec>& points, const Vec& x) {
  if (x.size() != spec.theta.size())
    throw dimension_error("cross: point dimension does not match theta");
  Vec v(static_cast<Eigen::Index>(points.size()));
  for (size_t i = 0; i < points.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = eval_scaled(spec, x - points[i]);
  return v;
}

}  // namespace eigo
