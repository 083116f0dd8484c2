#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <optional>

#include "eigo/common.hpp"
#include "eigo/kernel.hpp"

namespace eigo {

/// Observed design: points, values and the index of the running best
/// (lowest value, earliest index on ties).
struct DesignSet {
  std::vector<Vec> points;
  std::vector<double> values;
  int best_index = -1;

  DesignSet() = default;
  DesignSet(std::vector<Vec> pts, std::vector<double> vals)
      : points(std::move(pts)), values(std::move(vals)) {
    if (points.size() != values.size() || points.empty())
      throw std::invalid_argument("DesignSet: need equally many points and values");
    best_index = 0;
    for (size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[best_index]) best_index = static_cast<int>(i);
  }

  void add(Vec x, double z) {
    points.push_back(std::move(x));
    values.push_back(z);
    if (best_index < 0 || z < values[best_index])
      best_index = static_cast<int>(values.size()) - 1;
  }

  int size() const { return static_cast<int>(points.size()); }
  double best_value() const { return values[best_index]; }
  const Vec& best_point() const { return points[best_index]; }
};

/// Flat-mean GP posterior: the BLUP predictor, its variance, and the reduced
/// sum of squares, computed from a cached Cholesky factor of the Gram matrix.
///
/// If the first factorization fails, one retry is made with 1e-10 jitter on
/// the diagonal; near-duplicate designs arise during EI maximization.
class PosteriorModel {
 public:
  PosteriorModel(KernelSpec spec, DesignSet design)
      : spec_(std::move(spec)), design_(std::move(design)) {
    Mat V = gram(spec_, design_.points);
    Eigen::LLT<Mat> llt(V);
    if (llt.info() != Eigen::Success) {
      V.diagonal().array() += 1e-10;
      llt.compute(V);
      if (llt.info() != Eigen::Success)
        throw singular_design_error("fit: Gram matrix not factorizable under jitter policy");
      jitter_used_ = true;
    }
    L_ = llt.matrixL();
    finish();
  }

  /// Extend a fitted model with one appended observation, reusing the
  /// Cholesky factor (O(n^2) instead of O(n^3)). Returns nullopt when the
  /// previous factor was jittered or the new pivot is not safely positive;
  /// the caller falls back to a full fit.
  static std::optional<PosteriorModel> extended(const PosteriorModel& prev,
                                                const Vec& x, double z) {
    if (prev.jitter_used_) return std::nullopt;
    const auto n = static_cast<Eigen::Index>(prev.design_.points.size());
    const Vec v = cross(prev.spec_, prev.design_.points, x);
    const Vec l = prev.L_.triangularView<Eigen::Lower>().solve(v);
    const double d2 = 1.0 - l.squaredNorm();
    if (!(d2 > 1e-14)) return std::nullopt;
    PosteriorModel out(prev.spec_);
    out.design_ = prev.design_;
    out.design_.add(x, z);
    out.L_ = Mat::Zero(n + 1, n + 1);
    out.L_.topLeftCorner(n, n) = prev.L_;
    out.L_.row(n).head(n) = l.transpose();
    out.L_(n, n) = std::sqrt(d2);
    out.finish();
    return out;
  }

  const KernelSpec& spec() const { return spec_; }
  const DesignSet& design() const { return design_; }
  double mu_hat() const { return mu_hat_; }
  double reduced_ss() const { return rss_; }
  double log_det() const { return log_det_; }
  bool jitter_used() const { return jitter_used_; }
  const Vec& weights() const { return weights_; }

  /// Count of variance evaluations below -1e-8 before clamping.
  long negative_variance_warnings() const { return neg_var_warnings_->load(); }

  double predict_mean(const Vec& x) const {
    const Vec v = cross(spec_, design_.points, x);
    return mu_hat_ + v.dot(weights_);
  }

  double predict_sd(const Vec& x) const {
    const Vec v = cross(spec_, design_.points, x);
    const Vec li_v = L_.triangularView<Eigen::Lower>().solve(v);
    const double a = 1.0 - li_ones_.dot(li_v);
    double s2 = 1.0 - li_v.squaredNorm() + a * a / ones_Vinv_ones_;
    if (s2 < -1e-8) neg_var_warnings_->fetch_add(1);
    return std::sqrt(std::max(0.0, s2));
  }

 private:
  explicit PosteriorModel(KernelSpec spec) : spec_(std::move(spec)) {}

  void finish() {
    const auto n = static_cast<Eigen::Index>(design_.points.size());
    log_det_ = 2.0 * L_.diagonal().array().log().sum();
    Vec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = design_.values[i];
    li_ones_ = L_.triangularView<Eigen::Lower>().solve(Vec::Ones(n));
    const Vec li_z = L_.triangularView<Eigen::Lower>().solve(z);
    ones_Vinv_ones_ = li_ones_.squaredNorm();
    mu_hat_ = li_ones_.dot(li_z) / ones_Vinv_ones_;
    const Vec li_r = li_z - mu_hat_ * li_ones_;
    rss_ = li_r.squaredNorm();
    weights_ = L_.transpose().triangularView<Eigen::Upper>().solve(li_r);
  }

  KernelSpec spec_;
  DesignSet design_;
  Mat L_;  // lower Cholesky factor of V (plus jitter when flagged)
  Vec weights_;
  Vec li_ones_;  // L^{-1} 1
  double ones_Vinv_ones_ = 0.0;
  double mu_hat_ = 0.0;
  double rss_ = 0.0;
  double log_det_ = 0.0;
  bool jitter_used_ = false;
  std::shared_ptr<std::atomic<long>> neg_var_warnings_ =
      std::make_shared<std::atomic<long>>(0);
};

inline PosteriorModel fit(KernelSpec spec, DesignSet design) {
  return PosteriorModel(std::move(spec), std::move(design));
}

inline double reduced_ss(const PosteriorModel& model) { return model.reduced_ss(); }

}  // namespace eigo
