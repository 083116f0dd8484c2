// Experiment CLI: single trials, rate sweeps, the divergence and adversarial
// experiments, random mesh-norm diagnostics, and SVG regret plots.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eigo/config.hpp"
#include "eigo/harness.hpp"

namespace fs = std::filesystem;
using namespace eigo;

namespace {

std::string out_path(const std::string& name) {
  fs::path dir = output_dir();
  fs::create_directories(dir);
  return (dir / name).string();
}

void write_sidecar(const std::string& csv_path, const RegretRecord& rec, int steps) {
  std::ofstream js(csv_path.substr(0, csv_path.size() - 4) + ".json");
  js << "{\n  \"strategy\": " << rec.strategy_descriptor << ",\n  \"objective\": "
     << rec.objective_descriptor << ",\n  \"seed\": " << rec.seed
     << ",\n  \"steps\": " << steps << "\n}\n";
}

RegretRecord run_one(const ExperimentConfig& cfg, const Objective& obj,
                     std::uint64_t seed) {
  return run_trial(cfg.strategy, cfg.kernel, cfg.domain, obj, cfg.steps, seed);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_run(const std::string& config_path, std::int64_t seed_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  const Objective obj = cfg.make_objective();
  for (std::uint64_t seed : cfg.seeds) {
    const RegretRecord rec = run_one(cfg, obj, seed);
    const std::string path = out_path("run_seed" + std::to_string(seed) + ".csv");
    std::ofstream csv(path);
    rec.write_csv(csv);
    write_sidecar(path, rec, cfg.steps);
    std::cout << path << "  final_regret=" << rec.regret.back() << "\n";
  }
  return 0;
}

int cmd_rates(const std::string& config_path, std::int64_t seed_override, int n_lo,
              int n_hi) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (n_hi <= 0) n_hi = cfg.steps;
  const Objective obj = cfg.make_objective();
  const std::string path = out_path("rates.csv");
  std::ofstream csv(path);
  csv << "seed,slope,final_regret\n";
  csv.precision(17);
  std::vector<double> slopes;
  for (std::uint64_t seed : cfg.seeds) {
    const RegretRecord rec = run_one(cfg, obj, seed);
    const double slope = fit_rate(rec, n_lo, n_hi);
    slopes.push_back(slope);
    csv << seed << "," << slope << "," << rec.regret.back() << "\n";
    std::cout << "seed " << seed << "  slope " << slope << "\n";
  }
  std::cout << "median slope over n in [" << n_lo << ", " << n_hi
            << "]: " << median(slopes) << "\n"
            << path << "\n";
  return 0;
}

int cmd_diverge(const std::string& config_path, int steps, int n_seeds) {
  ExperimentConfig cfg = load_config(config_path);
  if (steps <= 0) steps = cfg.steps;
  if (n_seeds <= 0) n_seeds = static_cast<int>(cfg.seeds.size());
  const DivergenceResult res = divergence_experiment(
      steps, n_seeds, cfg.strategy, cfg.kernel, cfg.seeds.empty() ? 1 : cfg.seeds[0]);
  const std::string path = out_path("diverge.csv");
  std::ofstream csv(path);
  csv << "seed_index,stuck_mle,stuck_robust\n";
  for (int s = 0; s < res.n_seeds; ++s)
    csv << s << "," << int(res.stuck_mle[s]) << "," << int(res.stuck_robust[s]) << "\n";
  std::cout << "delta = " << res.delta << " (min g = -1)\n"
            << "stuck fraction, MLE-scaled EI:  " << res.stuck_fraction_mle << "\n"
            << "stuck fraction, robust EI:      " << res.stuck_fraction_robust << "\n"
            << path << "\n";
  return 0;
}

int cmd_adversary(const std::string& config_path, std::vector<int> ks, double nu,
                  double amplitude, std::int64_t seed_flag) {
  ExperimentConfig cfg = load_config(config_path);
  const std::uint64_t seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                                            : (cfg.seeds.empty() ? 1 : cfg.seeds[0]);
  if (ks.empty()) ks = {1, 2, 4};
  std::cout << "k,steps,loss,expected,replay_identical\n";
  for (int k : ks) {
    const AdversaryResult res =
        adversarial_lower_bound(cfg.strategy, cfg.kernel, k, nu, amplitude, seed);
    std::cout << k << "," << res.steps << "," << res.loss << "," << res.expected_loss
              << "," << (res.replay_identical ? "yes" : "no") << "\n";
  }
  return 0;
}

int cmd_mesh(int d, int n_seeds, std::vector<int> ns) {
  if (ns.empty()) ns = {100, 1000, 10000};
  const MeshExperimentResult res = random_mesh_experiment(ns, n_seeds, d);
  std::cout << "n,p95_normalized\n";
  for (size_t i = 0; i < res.ns.size(); ++i)
    std::cout << res.ns[i] << "," << res.normalized_p95[i] << "\n";
  std::cout << "Mann-Kendall p (increasing trend): " << res.mk_p_increasing << "\n";
  return 0;
}

struct Series {
  std::vector<double> n, regret;
};

Series read_regret_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header; regret is the last column
  Series s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t first = line.find(',');
    const size_t last = line.rfind(',');
    s.n.push_back(std::stod(line.substr(0, first)));
    s.regret.push_back(std::stod(line.substr(last + 1)));
  }
  if (s.n.empty()) throw config_error("no data rows in " + path);
  return s;
}

int cmd_plot(const std::string& input, std::string output, int n_lo, int n_hi) {
  const Series s = read_regret_csv(input);
  if (n_hi <= 0) n_hi = static_cast<int>(s.n.back());
  if (n_lo > n_hi) n_lo = static_cast<int>(s.n.front());
  if (!fs::path(output).is_absolute()) output = out_path(output);

  const double floor_v = 1e-6;
  std::vector<double> lx, ly;
  for (size_t i = 0; i < s.n.size(); ++i) {
    lx.push_back(std::log10(s.n[i]));
    ly.push_back(std::log10(std::max(s.regret[i], floor_v)));
  }
  // least-squares slope over the window, in natural logs
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < s.n.size(); ++i) {
    if (s.n[i] < n_lo || s.n[i] > n_hi) continue;
    const double x = std::log(s.n[i]);
    const double y = std::log(std::max(s.regret[i], floor_v));
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++m;
  }
  const double slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;

  const double x0 = *std::min_element(lx.begin(), lx.end());
  const double x1 = *std::max_element(lx.begin(), lx.end());
  const double y0 = *std::min_element(ly.begin(), ly.end());
  const double y1 = *std::max_element(ly.begin(), ly.end());
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double x) {
    return ml + (W - ml - mr) * (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5);
  };
  auto py = [&](double y) {
    return H - mb - (H - mt - mb) * (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5);
  };

  std::ofstream svg(output);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  for (int e = int(std::ceil(x0)); e <= int(std::floor(x1)); ++e)
    svg << "<text x=\"" << px(e) << "\" y=\"" << H - mb + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">1e" << e << "</text>\n";
  for (int e = int(std::ceil(y0)); e <= int(std::floor(y1)); ++e)
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(e) + 4
        << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
  svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < lx.size(); ++i) svg << px(lx[i]) << "," << py(ly[i]) << " ";
  svg << "\"/>\n";
  // fitted trend segment over the window
  if (m >= 2) {
    const double xm = sx / m, ym = sy / m;
    const double la = std::log10(std::exp(ym + slope * (std::log(double(n_lo)) - xm)));
    const double lb = std::log10(std::exp(ym + slope * (std::log(double(n_hi)) - xm)));
    svg << "<line x1=\"" << px(std::log10(double(n_lo))) << "\" y1=\"" << py(la)
        << "\" x2=\"" << px(std::log10(double(n_hi))) << "\" y2=\"" << py(lb)
        << "\" stroke=\"crimson\" stroke-dasharray=\"6 3\"/>\n";
  }
  svg << "<text x=\"" << W / 2 << "\" y=\"" << mt - 14
      << "\" font-size=\"14\" text-anchor=\"middle\">simple regret vs n (log-log), "
      << "fitted slope " << slope << "</text>\n"
      << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">n</text>\n</svg>\n";
  std::cout << output << "  slope=" << slope << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected-improvement optimization experiments"};
  app.require_subcommand(1);

  std::string config_path, input, output = "regret.svg";
  std::int64_t seed = -1;
  int n_lo = 50, n_hi = 0, steps = 0, n_seeds = 0, d = 1;
  double nu = 0.5, amplitude = 1.0;
  std::vector<int> ks, ns;

  auto* run = app.add_subcommand("run", "single trial per seed, CSV output");
  run->add_option("--config", config_path)->required();
  run->add_option("--seed", seed, "override the config's seed list");

  auto* rates = app.add_subcommand("rates", "fit regret-rate slopes over seeds");
  rates->add_option("--config", config_path)->required();
  rates->add_option("--seed", seed);
  rates->add_option("--n-lo", n_lo);
  rates->add_option("--n-hi", n_hi);

  auto* div = app.add_subcommand("diverge", "stuck-fraction contrast experiment");
  div->add_option("--config", config_path)->required();
  div->add_option("--steps", steps);
  div->add_option("--n-seeds", n_seeds);

  auto* adv = app.add_subcommand("adversary", "indistinguishability lower bound");
  adv->add_option("--config", config_path)->required();
  adv->add_option("--k", ks, "family size parameters (default 1 2 4)");
  adv->add_option("--nu", nu);
  adv->add_option("--amplitude", amplitude);
  adv->add_option("--seed", seed);

  auto* mesh = app.add_subcommand("mesh", "random-design mesh norm statistics");
  mesh->add_option("--d", d);
  mesh->add_option("--n-seeds", n_seeds);
  mesh->add_option("--n", ns, "design sizes (default 100 1000 10000)");

  auto* plot = app.add_subcommand("plot", "regret CSV to log-log SVG");
  plot->add_option("--input", input)->required();
  plot->add_option("--output", output);
  plot->add_option("--n-lo", n_lo);
  plot->add_option("--n-hi", n_hi);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed);
    if (*rates) return cmd_rates(config_path, seed, n_lo, n_hi);
    if (*div) return cmd_diverge(config_path, steps, n_seeds);
    if (*adv) return cmd_adversary(config_path, ks, nu, amplitude, seed);
    if (*mesh) return cmd_mesh(d, n_seeds == 0 ? 50 : n_seeds, ns);
    if (*plot) return cmd_plot(input, output, n_lo, n_hi);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
