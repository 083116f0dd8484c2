#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "eigo/acquisition.hpp"
#include "eigo/common.hpp"
#include "eigo/funcspace.hpp"
#include "eigo/sampling.hpp"
#include "eigo/strategy.hpp"

namespace eigo {

/// A test objective: evaluator, its (exact or grid-estimated) minimum, and a
/// replayable descriptor.
struct Objective {
  std::function<double(const Vec&)> eval;
  double min_value = 0.0;
  bool min_exact = true;
  std::string descriptor;
};

/// Estimate the minimum of f over the box by a dense grid plus golden-section
/// refinement around the best node.
inline double grid_min(const std::function<double(const Vec&)>& f, const Box& box,
                       int nodes_per_dim = 10000) {
  const int d = box.dim();
  std::vector<int> idx(d, 0);
  Vec best_x = box.lower;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    Vec x(d);
    for (int j = 0; j < d; ++j)
      x[j] = box.lower[j] + box.width()[j] * idx[j] / (nodes_per_dim - 1);
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < nodes_per_dim) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  auto neg = [&](const Vec& x) { return -f(x); };
  Vec h = box.width() * (2.0 / nodes_per_dim);
  const Vec refined = detail::golden_refine(neg, best_x, box, h, 80);
  return std::min(best, f(refined));
}

/// Uniform random objective suite: RKHS-span functions with unit norm.
/// min_grid = 0 picks a dimension-aware grid resolution for the minimum
/// estimate (the node count is min_grid^d, so per-dimension density must
/// shrink with the dimension).
inline Objective make_span_objective(const KernelSpec& spec, const Box& box,
                                     int n_centers, std::uint64_t seed,
                                     int min_grid = 0) {
  if (min_grid == 0) min_grid = box.dim() == 1 ? 20000 : (box.dim() == 2 ? 300 : 40);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> centers;
  for (int i = 0; i < n_centers; ++i) centers.push_back(uniform_in_box(box, rng));
  Vec w(n_centers);
  for (int i = 0; i < n_centers; ++i) w[i] = gauss(rng);
  RkhsSpanFunction f(spec, std::move(centers), w);
  if (f.norm > 0.0) {
    // rescale to unit RKHS norm
    f = RkhsSpanFunction(f.spec, f.centers, f.weights / f.norm);
  }
  Objective obj;
  obj.eval = f;
  obj.min_value = grid_min(obj.eval, box, min_grid);
  obj.min_exact = false;
  std::ostringstream desc;
  desc << "{\"type\":\"span\",\"seed\":" << seed << ",\"centers\":" << n_centers
       << ",\"norm\":1}";
  obj.descriptor = desc.str();
  return obj;
}

/// Per-step record of one optimization run.
struct RegretRecord {
  std::vector<Vec> points;        // chosen x_n
  std::vector<double> observed;   // z_n
  std::vector<double> best;       // running best z*_n
  std::vector<double> rec_value;  // f(x*_n)
  std::vector<double> regret;     // f(x*_n) - min f
  std::string strategy_descriptor;
  std::string objective_descriptor;
  std::uint64_t seed = 0;

  int steps() const { return static_cast<int>(points.size()); }

  void write_csv(std::ostream& os) const {
    if (points.empty()) return;
    const int d = static_cast<int>(points[0].size());
    os << "step";
    for (int j = 0; j < d; ++j) os << ",x" << j;
    os << ",z,z_star,rec_value,regret\n";
    os.precision(17);
    for (size_t i = 0; i < points.size(); ++i) {
      os << (i + 1);
      for (int j = 0; j < d; ++j) os << "," << points[i][j];
      os << "," << observed[i] << "," << best[i] << "," << rec_value[i] << ","
         << regret[i] << "\n";
    }
  }
};

inline std::string describe_strategy(const StrategyConfig& cfg, const KernelSpec& spec,
                                     std::uint64_t seed) {
  std::ostringstream os;
  os << "{\"variant\":\"" << to_string(cfg.variant) << "\",\"seed\":" << seed
     << ",\"k_init\":" << cfg.k_init << ",\"epsilon\":" << cfg.epsilon
     << ",\"sigma\":" << cfg.sigma << ",\"ei_budget\":" << cfg.ei_budget
     << ",\"mle_grid\":" << cfg.mle_grid << ",\"cn\":\""
     << (cfg.cn_rule == CnRule::InvN ? "1/n" : "1/(n log n)") << "\"";
  if (cfg.theta_lower.size() > 0) {
    os << ",\"theta_lower\":[";
    for (int i = 0; i < cfg.theta_lower.size(); ++i)
      os << (i ? "," : "") << cfg.theta_lower[i];
    os << "],\"theta_upper\":[";
    for (int i = 0; i < cfg.theta_upper.size(); ++i)
      os << (i ? "," : "") << cfg.theta_upper[i];
    os << "]";
  }
  os << ",\"kernel\":{\"family\":\""
     << (spec.family == KernelFamily::Gaussian ? "gaussian" : "matern")
     << "\",\"nu\":" << spec.nu << ",\"theta\":[";
  for (int i = 0; i < spec.theta.size(); ++i) os << (i ? "," : "") << spec.theta[i];
  os << "]}}";
  return os.str();
}

/// Drive one strategy on one objective for n_steps observations. Fully
/// reproducible from (config, objective descriptor, seed).
inline RegretRecord run_trial(const StrategyConfig& cfg, const KernelSpec& spec,
                              const Box& box, const Objective& obj, int n_steps,
                              std::uint64_t seed,
                              std::optional<std::vector<Vec>> initial_points =
                                  std::nullopt) {
  Strategy strat(cfg, spec, box, seed, std::move(initial_points));
  if (n_steps < strat.k_init())
    throw std::invalid_argument("run_trial: n_steps must be >= k_init");
  RegretRecord rec;
  rec.strategy_descriptor = describe_strategy(cfg, spec, seed);
  rec.objective_descriptor = obj.descriptor;
  rec.seed = seed;
  for (int n = 1; n <= n_steps; ++n) {
    Vec x;
    try {
      x = strat.next_design_point();
      strat.observe(x, obj.eval(x));
    } catch (const std::exception& e) {
      throw std::runtime_error("run_trial: step " + std::to_string(n) + ": " + e.what());
    }
    Vec rec_point;
    if (cfg.variant == StrategyVariant::Naive) {
      Rng local(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n)));
      rec_point = naive_recommend(strat.design(), spec, box, cfg.ei_budget, local);
    } else {
      rec_point = strat.recommend();
    }
    const double rv = obj.eval(rec_point);
    rec.points.push_back(x);
    rec.observed.push_back(strat.design().values.back());
    rec.best.push_back(strat.design().best_value());
    rec.rec_value.push_back(rv);
    rec.regret.push_back(rv - obj.min_value);
  }
  return rec;
}

/// Mesh norm h_n = sup_x min_i ||x - x_i||, estimated on a regular grid of
/// nodes_per_dim^d nodes; off by at most the grid spacing.
inline double mesh_norm(const std::vector<Vec>& points, const Box& box,
                        int nodes_per_dim = 1000) {
  if (points.empty()) throw std::invalid_argument("mesh_norm: no points");
  const int d = box.dim();
  if (nodes_per_dim < 2) throw std::invalid_argument("mesh_norm: resolution too low");

  // Bucket the design points for nearest-neighbour queries.
  const int cells = std::max(1, static_cast<int>(std::floor(
                                    std::pow(double(points.size()), 1.0 / d))));
  std::vector<std::vector<int>> buckets(
      static_cast<size_t>(std::pow(double(cells), d)) + 1);
  auto cell_of = [&](const Vec& x) {
    long long c = 0;
    for (int j = 0; j < d; ++j) {
      int cj = static_cast<int>((x[j] - box.lower[j]) / box.width()[j] * cells);
      cj = std::clamp(cj, 0, cells - 1);
      c = c * cells + cj;
    }
    return c;
  };
  for (size_t i = 0; i < points.size(); ++i)
    buckets[cell_of(points[i])].push_back(static_cast<int>(i));

  const double cell_w = box.width().maxCoeff() / cells;
  auto nearest_dist = [&](const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> base(d);
    for (int j = 0; j < d; ++j) {
      int cj = static_cast<int>((x[j] - box.lower[j]) / box.width()[j] * cells);
      base[j] = std::clamp(cj, 0, cells - 1);
    }
    for (int ring = 0; ring < cells; ++ring) {
      // scan all cells within Chebyshev distance `ring` of the base cell
      std::vector<int> lo(d), hi(d), it(d);
      for (int j = 0; j < d; ++j) {
        lo[j] = std::max(0, base[j] - ring);
        hi[j] = std::min(cells - 1, base[j] + ring);
        it[j] = lo[j];
      }
      while (true) {
        int cheb = 0;
        for (int j = 0; j < d; ++j) cheb = std::max(cheb, std::abs(it[j] - base[j]));
        if (cheb == ring) {
          long long c = 0;
          for (int j = 0; j < d; ++j) c = c * cells + it[j];
          for (int i : buckets[c]) best = std::min(best, (x - points[i]).norm());
        }
        int j = d - 1;
        for (; j >= 0; --j) {
          if (++it[j] <= hi[j]) break;
          it[j] = lo[j];
        }
        if (j < 0) break;
      }
      if (best < ring * cell_w) break;  // no closer point can exist outside
    }
    return best;
  };

  double h = 0.0;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec x(d);
    for (int j = 0; j < d; ++j)
      x[j] = box.lower[j] + box.width()[j] * idx[j] / (nodes_per_dim - 1);
    h = std::max(h, nearest_dist(x));
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < nodes_per_dim) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  return h;
}

/// Least-squares slope of log(regret) against log(n) over steps in
/// [n_lo, n_hi]; regret is floored at the grid-min tolerance.
inline double fit_rate(const RegretRecord& rec, int n_lo, int n_hi,
                       double floor_value = 1e-6) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = n_lo; n <= std::min(n_hi, rec.steps()); ++n) {
    const double x = std::log(double(n));
    const double y = std::log(std::max(rec.regret[n - 1], floor_value));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("fit_rate: window too small");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// One-sided Mann-Kendall p-value for an increasing trend (normal
/// approximation with continuity correction). Large p means no evidence of
/// an upward trend.
inline double mann_kendall_p_increasing(const std::vector<double>& v) {
  const int m = static_cast<int>(v.size());
  if (m < 3) throw std::invalid_argument("mann_kendall: need at least 3 values");
  long s = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      s += (v[j] > v[i]) - (v[j] < v[i]);
  const double var = m * (m - 1.0) * (2.0 * m + 5.0) / 18.0;
  double z = 0.0;
  if (s > 0) z = (s - 1.0) / std::sqrt(var);
  else if (s < 0) z = (s + 1.0) / std::sqrt(var);
  return 1.0 - normal_cdf(z);
}

struct DivergenceResult {
  double stuck_fraction_mle = 0.0;
  double stuck_fraction_robust = 0.0;
  int n_seeds = 0;
  double delta = 1.0;  // the regret threshold; min g = -1
  std::vector<bool> stuck_mle;
  std::vector<bool> stuck_robust;
};

namespace detail {
inline std::vector<Vec> points_in_v0(const CounterexamplePair& pair, int count,
                                     Rng& rng) {
  std::vector<Vec> pts;
  while (static_cast<int>(pts.size()) < count) {
    Vec x = uniform_in_box(pair.domain, rng);
    if (pair.in_v0(x)) pts.push_back(x);
  }
  return pts;
}
}  // namespace detail

/// The divergence experiment: the MLE-scaled strategy (sigma^2 = R^2/n) on
/// the spiked counterexample, with initial designs biased into the outer
/// plateau V0, against the robust strategy on the same instances. A run is
/// stuck when no design point enters the spike ball W and the final regret
/// stays at or above delta = 1.
inline DivergenceResult divergence_experiment(int n_steps, int n_seeds,
                                              const StrategyConfig& base_cfg,
                                              const KernelSpec& spec,
                                              std::uint64_t base_seed = 1) {
  const Box box = Box::unit(spec.dim());
  const CounterexamplePair pair = make_counterexample(box);
  Objective obj;
  obj.eval = [pair](const Vec& x) { return pair.g_spiked(x); };
  obj.min_value = pair.min_g();
  obj.descriptor = "{\"type\":\"counterexample\",\"geometry\":\"default\"}";

  DivergenceResult out;
  out.n_seeds = n_seeds;
  const int k = base_cfg.k_init == 0 ? 5 * spec.dim() : base_cfg.k_init;
  for (int s = 0; s < n_seeds; ++s) {
    const std::uint64_t seed = base_seed + s;
    Rng init_rng(seed ^ 0xD1B54A32D192ED03ULL);
    const auto inits = detail::points_in_v0(pair, k, init_rng);
    for (int variant = 0; variant < 2; ++variant) {
      StrategyConfig cfg = base_cfg;
      if (variant == 0) {
        cfg.variant = StrategyVariant::EIMle;
        cfg.cn_rule = CnRule::InvN;
      } else {
        cfg.variant = StrategyVariant::EIRobust;
      }
      RegretRecord rec = run_trial(cfg, spec, box, obj, n_steps, seed, inits);
      bool visited_w = false;
      for (const auto& x : rec.points)
        if (pair.in_w(x)) visited_w = true;
      const bool stuck = !visited_w && rec.regret.back() >= out.delta - 1e-9;
      if (variant == 0) {
        out.stuck_mle.push_back(stuck);
      } else {
        out.stuck_robust.push_back(stuck);
      }
    }
  }
  const auto frac = [](const std::vector<bool>& v) {
    return v.empty() ? 0.0
                     : double(std::count(v.begin(), v.end(), true)) / v.size();
  };
  out.stuck_fraction_mle = frac(out.stuck_mle);
  out.stuck_fraction_robust = frac(out.stuck_robust);
  return out;
}

struct AdversaryResult {
  double loss = 0.0;
  double expected_loss = 0.0;  // C (2k)^{-nu}
  bool replay_identical = false;
  int member_index = -1;
  int steps = 0;
};

/// The indistinguishability lower bound: run the strategy on f = 0, find a
/// bump-family member untouched by the visited points and the
/// recommendation, replay the same seed on that member, and verify the run
/// is identical. The achieved loss is then exactly C (2k)^{-nu}.
inline AdversaryResult adversarial_lower_bound(const StrategyConfig& cfg,
                                               const KernelSpec& spec, int k,
                                               double nu, double amplitude,
                                               std::uint64_t seed) {
  const int d = spec.dim();
  const Box box = Box::unit(d);
  const BumpFamily fam = make_bump_family(k, d, nu, amplitude);
  const int n_pts = fam.size() / 2;  // (2k)^d / 2
  const int steps = n_pts - 1;

  auto run = [&](const std::function<double(const Vec&)>& f)
      -> std::pair<std::vector<Vec>, Vec> {
    Strategy strat(cfg, spec, box, seed);
    std::vector<Vec> visited;
    for (int i = 0; i < steps; ++i) {
      Vec x = strat.next_design_point();
      strat.observe(x, f(x));
      visited.push_back(x);
    }
    Vec rec;
    if (steps == 0) {
      // No observations yet: report the first (observation-independent)
      // design point the strategy would choose.
      Strategy peek(cfg, spec, box, seed);
      rec = peek.next_design_point();
    } else if (cfg.variant == StrategyVariant::Naive) {
      Rng local(seed ^ 0xA24BAED4963EE407ULL);
      rec = naive_recommend(strat.design(), spec, box, cfg.ei_budget, local);
    } else {
      rec = strat.recommend();
    }
    return {visited, rec};
  };

  auto zero = [](const Vec&) { return 0.0; };
  const auto [visited, rec] = run(zero);

  std::vector<Vec> chi = visited;
  chi.push_back(rec);
  int untouched = -1;
  for (int m = 0; m < fam.size(); ++m) {
    bool touched = false;
    for (const auto& x : chi)
      if (fam.members[m](x) != 0.0) touched = true;
    if (!touched) {
      untouched = m;
      break;
    }
  }
  if (untouched < 0)
    throw std::logic_error(
        "adversarial_lower_bound: no untouched member (pigeonhole violated)");

  const BumpFunction& psi = fam.members[untouched];
  const auto [visited2, rec2] = run([&psi](const Vec& x) { return psi(x); });

  AdversaryResult out;
  out.member_index = untouched;
  out.steps = steps;
  out.replay_identical = visited2.size() == visited.size();
  for (size_t i = 0; out.replay_identical && i < visited.size(); ++i)
    if ((visited[i].array() != visited2[i].array()).any())
      out.replay_identical = false;
  if (out.replay_identical && (rec.array() != rec2.array()).any())
    out.replay_identical = false;
  out.loss = psi(rec2) - fam.member_min();
  out.expected_loss = amplitude * std::pow(2.0 * k, -nu);
  return out;
}

struct MeshExperimentResult {
  std::vector<int> ns;
  std::vector<std::vector<double>> h;  // h[level][seed]
  std::vector<double> normalized_p95;  // 95th pct of h_n (n/log n)^{1/d}
  double mk_p_increasing = 1.0;
};

/// Mesh norms of i.i.d. uniform designs: reports the 95th percentile of the
/// normalized statistic h_n (n/log n)^{1/d} at each n and a Mann-Kendall
/// check that it shows no increasing trend.
inline MeshExperimentResult random_mesh_experiment(const std::vector<int>& ns,
                                                   int n_seeds, int d,
                                                   std::uint64_t base_seed = 1,
                                                   int nodes_per_dim = 0) {
  if (nodes_per_dim == 0) nodes_per_dim = d == 1 ? 2000 : 150;
  const Box box = Box::unit(d);
  MeshExperimentResult out;
  out.ns = ns;
  out.h.assign(ns.size(), std::vector<double>(n_seeds, 0.0));
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(base_seed + s);
    std::vector<Vec> pts;
    size_t level = 0;
    const int n_max = *std::max_element(ns.begin(), ns.end());
    for (int i = 1; i <= n_max; ++i) {
      pts.push_back(uniform_in_box(box, rng));
      while (level < ns.size() && i == ns[level]) {
        out.h[level][s] = mesh_norm(pts, box, nodes_per_dim);
        ++level;
      }
    }
  }
  for (size_t level = 0; level < ns.size(); ++level) {
    std::vector<double> stat = out.h[level];
    const double scale = std::pow(ns[level] / std::log(double(ns[level])), 1.0 / d);
    for (double& v : stat) v *= scale;
    std::sort(stat.begin(), stat.end());
    const size_t i95 = static_cast<size_t>(std::ceil(0.95 * stat.size())) - 1;
    out.normalized_p95.push_back(stat[std::min(i95, stat.size() - 1)]);
  }
  if (out.normalized_p95.size() >= 3)
    out.mk_p_increasing = mann_kendall_p_increasing(out.normalized_p95);
  return out;
}

}  // namespace eigo
