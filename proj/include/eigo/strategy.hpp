#pragma once

#include <cmath>
#include <optional>

#include "eigo/acquisition.hpp"
#include "eigo/common.hpp"
#include "eigo/posterior.hpp"

namespace eigo {

enum class StrategyVariant { Naive, EIFixed, EIMle, EIRobust };

enum class CnRule {
  InvNLogN,  // c_n = 1/(n max(1, log n))
  InvN,      // c_n = 1/n (the plain MLE of sigma^2)
};

inline double cn_value(CnRule rule, int n) {
  const double nn = std::max(n, 2);
  switch (rule) {
    case CnRule::InvNLogN:
      return 1.0 / (nn * std::max(1.0, std::log(nn)));
    case CnRule::InvN:
      return 1.0 / nn;
  }
  return 1.0 / nn;
}

inline const char* to_string(StrategyVariant v) {
  switch (v) {
    case StrategyVariant::Naive: return "naive";
    case StrategyVariant::EIFixed: return "ei_fixed";
    case StrategyVariant::EIMle: return "ei_mle";
    case StrategyVariant::EIRobust: return "ei_robust";
  }
  return "?";
}

struct StrategyConfig {
  StrategyVariant variant = StrategyVariant::EIFixed;
  double epsilon = 0.0;    // 0 disables the wrapper; 1 is the degenerate
                           // always-uniform wrapper
  int k_init = 0;          // 0 means the default 5 * d
  double sigma = 1.0;      // EIFixed only
  CnRule cn_rule = CnRule::InvNLogN;  // EIMle only
  Vec theta_lower;         // bounds on estimated length-scales
  Vec theta_upper;
  int mle_grid = 15;       // grid points per dimension for the theta search
  int ei_budget = 512;     // candidate budget for EI maximization

  void validate(int d) const {
    if (epsilon < 0.0 || epsilon > 1.0)
      throw config_error("StrategyConfig: epsilon must lie in [0, 1]");
    if (k_init < 0) throw config_error("StrategyConfig: k_init must be positive");
    const bool estimating =
        variant == StrategyVariant::EIMle || variant == StrategyVariant::EIRobust;
    if (estimating) {
      const int k = k_init == 0 ? 5 * d : k_init;
      if (k < 2)
        throw config_error("StrategyConfig: estimating variants need k_init >= 2");
      if (theta_lower.size() != d || theta_upper.size() != d)
        throw config_error("StrategyConfig: theta bounds must match the dimension");
      for (int i = 0; i < d; ++i)
        if (!(theta_lower[i] > 0.0) || theta_lower[i] > theta_upper[i])
          throw config_error("StrategyConfig: need 0 < theta_lower <= theta_upper");
      if (mle_grid < 1) throw config_error("StrategyConfig: mle_grid must be >= 1");
    }
    if (variant == StrategyVariant::EIFixed && !(sigma > 0.0))
      throw config_error("StrategyConfig: EIFixed needs sigma > 0");
    if (ei_budget < 1) throw config_error("StrategyConfig: ei_budget must be >= 1");
  }
};

/// Maximizer of the concentrated log-likelihood
///   -n log Rhat_n^2(theta) - log det V_theta
/// over a log-uniform grid within [theta_lower, theta_upper]. Ties resolve to
/// the largest theta (last visited in ascending grid order). Grid points with
/// unfactorizable Gram matrices are skipped. Constant data returns the upper
/// bound.
inline Vec estimate_theta_mle(const DesignSet& design, const KernelSpec& family,
                              const Vec& theta_lower, const Vec& theta_upper,
                              int grid) {
  const int n = design.size();
  if (n < 2) throw std::invalid_argument("estimate_theta_mle: need n >= 2");
  const int d = static_cast<int>(theta_lower.size());
  if (theta_upper.size() != d)
    throw dimension_error("estimate_theta_mle: bound dimension mismatch");
  if (grid < 1) throw std::invalid_argument("estimate_theta_mle: grid must be >= 1");

  bool constant = true;
  for (int i = 1; i < n; ++i)
    if (design.values[i] != design.values[0]) constant = false;
  if (constant) return theta_upper;

  std::vector<std::vector<double>> axes(d);
  for (int j = 0; j < d; ++j) {
    const double lo = std::log(theta_lower[j]), hi = std::log(theta_upper[j]);
    if (lo == hi || grid == 1) {
      axes[j] = {theta_lower[j]};
    } else {
      for (int g = 0; g < grid; ++g)
        axes[j].push_back(std::exp(lo + (hi - lo) * g / (grid - 1)));
    }
  }

  bool found = false;
  double best_ll = -std::numeric_limits<double>::infinity();
  Vec best_theta = theta_upper;
  std::vector<size_t> idx(d, 0);
  while (true) {
    Vec theta(d);
    for (int j = 0; j < d; ++j) theta[j] = axes[j][idx[j]];
    try {
      PosteriorModel m = fit(family.with_theta(theta), design);
      const double rss = std::max(m.reduced_ss(), 1e-300);
      const double ll = -n * std::log(rss) - m.log_det();
      if (!found || ll >= best_ll) {
        found = true;
        best_ll = ll;
        best_theta = theta;
      }
    } catch (const singular_design_error&) {
      // skip this grid point
    }
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < axes[j].size()) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  if (!found)
    throw singular_design_error("estimate_theta_mle: every grid point failed to factorize");
  return best_theta;
}

/// Robust scale estimate: sigma_hat = Rhat_n(theta_hat).
inline double robust_sigma(const DesignSet& design, const KernelSpec& family,
                           const Vec& theta_hat) {
  PosteriorModel m = fit(family.with_theta(theta_hat), design);
  return std::sqrt(m.reduced_ss());
}

/// Recommendation of the fixed-design strategy: the candidate-scheme
/// minimizer of the interpolant mean over the box. Unlike the EI strategies'
/// recommendation, this may be an unobserved point.
inline Vec naive_recommend(const DesignSet& design, const KernelSpec& spec,
                           const Box& box, int budget, Rng& rng) {
  PosteriorModel model = fit(spec, design);
  auto neg_mean = [&](const Vec& x) { return -model.predict_mean(x); };
  return argmax_over_box(neg_mean, design, box, budget, rng);
}

/// A sequential design strategy: one of Naive, EI(pi), EI(pi-hat),
/// EI(pi-tilde), optionally wrapped epsilon-greedy. Owns its design, rng
/// stream and estimated parameters; single-owner mutable state.
///
/// The scale-adaptive variants (EIMle, EIRobust) standardize observations to
/// [0, 1] internally before estimating parameters and maximizing EI; the
/// chosen points are invariant to affine transformations z -> a z + b of the
/// observations, and the reported sigma_hat is on the raw scale.
class Strategy {
 public:
  Strategy(StrategyConfig config, KernelSpec spec, Box domain, std::uint64_t seed,
           std::optional<std::vector<Vec>> initial_points = std::nullopt)
      : config_(std::move(config)),
        spec_(std::move(spec)),
        domain_(std::move(domain)),
        rng_(seed),
        init_seq_(domain_.dim(), rng_) {
    config_.validate(domain_.dim());
    if (spec_.dim() != domain_.dim())
      throw dimension_error("Strategy: kernel and domain dimension mismatch");
    k_init_ = config_.k_init == 0 ? 5 * domain_.dim() : config_.k_init;
    if (initial_points) {
      if (static_cast<int>(initial_points->size()) < k_init_)
        throw config_error("Strategy: fewer explicit initial points than k_init");
      explicit_init_ = std::move(*initial_points);
    }
  }

  const StrategyConfig& config() const { return config_; }
  const Box& domain() const { return domain_; }
  const DesignSet& design() const { return design_; }
  int step() const { return design_.size(); }
  int k_init() const { return k_init_; }
  const std::optional<Vec>& theta_hat() const { return theta_hat_; }
  std::optional<double> sigma_hat() const { return sigma_hat_; }

  /// Propose the next design point. Must be followed by observe() before the
  /// next proposal.
  Vec next_design_point() {
    if (pending_)
      throw protocol_error("next_design_point: previous proposal not yet observed");
    const int n = design_.size();
    Vec x;
    if (n < k_init_) {
      x = initial_point(n);
    } else if (config_.variant == StrategyVariant::Naive) {
      x = initial_point(n);
    } else if (config_.epsilon > 0.0 &&
               std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.epsilon) {
      x = uniform_in_box(domain_, rng_);
    } else {
      x = propose_ei();
    }
    pending_ = x;
    return x;
  }

  /// Record the observation at the point returned by the preceding
  /// next_design_point call.
  void observe(const Vec& x, double z) {
    if (!pending_) throw protocol_error("observe: no outstanding proposal");
    if (x.size() != pending_->size() || (x.array() != pending_->array()).any())
      throw protocol_error("observe: point does not match the outstanding proposal");
    design_.add(x, z);
    pending_.reset();
  }

  /// The design point with the lowest observed value (earliest on ties).
  Vec recommend() const {
    if (design_.size() == 0) throw protocol_error("recommend: empty design");
    return design_.best_point();
  }

 private:
  Vec initial_point(int n) {
    if (!explicit_init_.empty()) {
      if (n < static_cast<int>(explicit_init_.size())) return explicit_init_[n];
      return init_seq_.point_in(domain_, n + 1);
    }
    return init_seq_.point_in(domain_, n + 1);
  }

  Vec propose_ei() {
    switch (config_.variant) {
      case StrategyVariant::EIFixed: {
        // the kernel is fixed, so the factor extends incrementally as
        // observations arrive (full refit only when the extension degenerates)
        while (fixed_model_ && fixed_model_->design().size() < design_.size()) {
          const int m = fixed_model_->design().size();
          auto ext = PosteriorModel::extended(*fixed_model_, design_.points[m],
                                              design_.values[m]);
          if (!ext) {
            fixed_model_.reset();
            break;
          }
          fixed_model_ = std::move(*ext);
        }
        if (!fixed_model_) fixed_model_ = fit(spec_, design_);
        return maximize_ei(*fixed_model_, PriorParams(config_.sigma, spec_),
                           domain_, config_.ei_budget, rng_);
      }
      case StrategyVariant::EIMle:
      case StrategyVariant::EIRobust: {
        double zmin = design_.values[0], zmax = design_.values[0];
        for (double z : design_.values) {
          zmin = std::min(zmin, z);
          zmax = std::max(zmax, z);
        }
        if (zmax == zmin) {
          // EI is identically zero; explore uniformly to stay dense.
          theta_hat_ = config_.theta_upper;
          sigma_hat_ = 0.0;
          return uniform_in_box(domain_, rng_);
        }
        DesignSet std_design = design_;
        for (double& z : std_design.values) z = (z - zmin) / (zmax - zmin);
        const Vec theta = estimate_theta_mle(std_design, spec_, config_.theta_lower,
                                             config_.theta_upper, config_.mle_grid);
        PosteriorModel model = fit(spec_.with_theta(theta), std_design);
        double sigma2 = model.reduced_ss();
        if (config_.variant == StrategyVariant::EIMle)
          sigma2 *= cn_value(config_.cn_rule, design_.size());
        const double sigma = std::sqrt(std::max(sigma2, 1e-300));
        theta_hat_ = theta;
        sigma_hat_ = sigma * (zmax - zmin);
        return maximize_ei(model, PriorParams(sigma, spec_.with_theta(theta)),
                           domain_, config_.ei_budget, rng_);
      }
      default:
        throw protocol_error("propose_ei: not an EI variant");
    }
  }

  StrategyConfig config_;
  KernelSpec spec_;
  Box domain_;
  Rng rng_;
  ScrambledHalton init_seq_;
  std::vector<Vec> explicit_init_;
  int k_init_ = 0;
  DesignSet design_;
  std::optional<PosteriorModel> fixed_model_;
  std::optional<Vec> pending_;
  std::optional<Vec> theta_hat_;
  std::optional<double> sigma_hat_;
};

}  // namespace eigo
