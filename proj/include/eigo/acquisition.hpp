#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "eigo/common.hpp"
#include "eigo/posterior.hpp"
#include "eigo/sampling.hpp"

namespace eigo {

inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779399461;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  static const double inv_sqrt_2 = 0.7071067811865475244008444;
  return 0.5 * std::erfc(-x * inv_sqrt_2);
}

/// tau(x) = x Phi(x) + phi(x). For x < -8 the direct form cancels
/// catastrophically, so the left tail uses the Mills-ratio expansion
/// tau(x) = phi(x) (x^-2 - 3 x^-4 + 15 x^-6 - ...).
inline double tau(double x) {
  if (x < -8.0) {
    const double x2 = x * x;
    double term = 1.0 / x2, sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
      sum += term;
      term *= -(2.0 * k + 1.0) / x2;
      if (std::abs(term) < std::abs(sum) * 1e-18) break;
    }
    return normal_pdf(x) * sum;
  }
  return x * normal_cdf(x) + normal_pdf(x);
}

/// rho(y, s) = y Phi(y/s) + s phi(y/s) for s > 0, and max(y, 0) at s = 0.
inline double rho(double y, double s) {
  if (s < 0.0) throw std::invalid_argument("rho: s must be non-negative");
  if (s == 0.0) return std::max(y, 0.0);
  return s * tau(y / s);
}

/// Prior scale: global standard deviation sigma plus the kernel (theta).
/// sigma = 0 is allowed: it arises from the robust scale estimate on constant
/// data and makes EI degenerate to max(z* - mean, 0).
struct PriorParams {
  double sigma;
  KernelSpec spec;

  PriorParams(double sigma_, KernelSpec spec_) : sigma(sigma_), spec(std::move(spec_)) {
    if (!(sigma >= 0.0)) throw config_error("PriorParams: sigma must be non-negative");
  }
};

/// Closed-form expected improvement at x over the current best observation.
inline double expected_improvement(const PosteriorModel& model,
                                   const PriorParams& params, const Vec& x) {
  const double s = model.predict_sd(x);
  const double mean = model.predict_mean(x);
  return rho(model.design().best_value() - mean, params.sigma * s);
}

namespace detail {

/// Coordinate-wise golden-section ascent of f around x, bracketing each
/// coordinate by +-h and clipping to the box. At most max_iter section
/// steps per coordinate.
inline Vec golden_refine(const std::function<double(const Vec&)>& f, Vec x,
                         const Box& box, const Vec& h, int max_iter) {
  static const double invphi = 0.6180339887498948482;
  const int d = box.dim();
  const int passes = d == 1 ? 1 : 2;
  for (int pass = 0; pass < passes; ++pass) {
    for (int j = 0; j < d; ++j) {
      double a = std::max(box.lower[j], x[j] - h[j]);
      double b = std::min(box.upper[j], x[j] + h[j]);
      const double tol = 1e-6 * (box.upper[j] - box.lower[j]);
      double c = b - invphi * (b - a);
      double e = a + invphi * (b - a);
      Vec xc = x, xe = x;
      xc[j] = c;
      xe[j] = e;
      double fc = f(xc), fe = f(xe);
      for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc > fe) {
          b = e;
          e = c;
          fe = fc;
          c = b - invphi * (b - a);
          xc[j] = c;
          fc = f(xc);
        } else {
          a = c;
          c = e;
          fc = fe;
          e = a + invphi * (b - a);
          xe[j] = e;
          fe = f(xe);
        }
      }
      // compare the midpoint, both interior probes, and the bracket
      // endpoints (maxima at the domain boundary sit exactly on an endpoint)
      Vec xm = x, xa = x, xb = x;
      xm[j] = 0.5 * (a + b);
      xa[j] = a;
      xb[j] = b;
      Vec best = xc;
      double fbest = fc;
      for (const Vec* cand : {&xe, &xm, &xa, &xb}) {
        const double fv = f(*cand);
        if (fv > fbest) {
          fbest = fv;
          best = *cand;
        }
      }
      x = best;
    }
  }
  return x;
}

}  // namespace detail

/// Candidate-set maximization of an arbitrary surface over the box: a
/// scrambled low-discrepancy set of size `budget`, plus midpoints between the
/// incumbent best design point and its nearest neighbours, with
/// golden-section refinement of the leading candidates. Ties break to the
/// lowest candidate index. Deterministic given the rng state.
inline Vec argmax_over_box(const std::function<double(const Vec&)>& f,
                           const DesignSet& design, const Box& box, int budget,
                           Rng& rng, double* out_value = nullptr) {
  if (budget < 1) throw std::invalid_argument("argmax_over_box: budget must be >= 1");
  const int d = box.dim();
  ScrambledHalton halton(d, rng);

  std::vector<Vec> cands;
  cands.reserve(static_cast<size_t>(budget) + 2 * static_cast<size_t>(d));
  for (int i = 1; i <= budget; ++i) cands.push_back(halton.point_in(box, i));

  const Vec& best = design.best_point();
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < design.size(); ++i) {
    if (i == design.best_index) continue;
    dist.emplace_back((design.points[i] - best).norm(), i);
  }
  std::stable_sort(dist.begin(), dist.end());
  const int n_mid = std::min<int>(2 * d, static_cast<int>(dist.size()));
  for (int i = 0; i < n_mid; ++i)
    cands.push_back(0.5 * (best + design.points[dist[i].second]));

  std::vector<double> vals(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) vals[i] = f(cands[i]);

  size_t argmax = 0;
  for (size_t i = 1; i < cands.size(); ++i)
    if (vals[i] > vals[argmax]) argmax = i;

  if (!(vals[argmax] > 0.0)) {
    // Nothing to refine against; let the caller decide on the fallback.
    if (out_value) *out_value = vals[argmax];
    if (vals[argmax] == 0.0) return cands[argmax];
  }

  std::vector<size_t> order(cands.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return vals[a] > vals[b]; });

  Vec h = box.width() * std::max(2.0 / budget, 0.004);
  Vec best_x = cands[argmax];
  double best_v = vals[argmax];
  const size_t n_refine = std::min<size_t>(3, order.size());
  for (size_t r = 0; r < n_refine; ++r) {
    Vec x = detail::golden_refine(f, cands[order[r]], box, h, 50);
    const double v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  if (out_value) *out_value = best_v;
  return best_x;
}

/// Global maximization of EI over the box. Deterministic given the rng
/// state. If EI vanishes on every candidate, falls back to a uniform random
/// point (the density requirement of the robust strategy needs this). The
/// same fallback applies when the maximizer converges onto an existing
/// design point (EI is 0 there, so the surface is numerically flat):
/// re-observing a point carries no information in the noiseless model and
/// would make the Gram matrix singular.
inline Vec maximize_ei(const PosteriorModel& model, const PriorParams& params,
                       const Box& box, int budget, Rng& rng) {
  auto ei = [&](const Vec& x) { return expected_improvement(model, params, x); };
  double best_v = 0.0;
  Vec x = argmax_over_box(ei, model.design(), box, budget, rng, &best_v);
  auto duplicates_design = [&](const Vec& y) {
    for (const Vec& p : model.design().points)
      if (((y - p).array() / params.spec.theta.array()).abs().maxCoeff() <= 1e-10)
        return true;
    return false;
  };
  if (!(best_v > 0.0) || duplicates_design(x)) {
    do {
      x = uniform_in_box(box, rng);
    } while (duplicates_design(x));
  }
  return x;
}

}  // namespace eigo
