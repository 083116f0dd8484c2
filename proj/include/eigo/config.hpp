#pragma once

#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "eigo/common.hpp"
#include "eigo/harness.hpp"
#include "eigo/kernel.hpp"
#include "eigo/strategy.hpp"

namespace eigo {

using json = nlohmann::json;

inline Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw config_error(std::string(what) + ": expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

/// kernel: {family: "matern"|"gaussian", nu: "1/2"|"3/2"|"5/2"|"7/2", theta: [..]}
inline KernelSpec kernel_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  const Vec theta = vec_from_json(j.at("theta"), "kernel.theta");
  if (family == "gaussian") return KernelSpec::gaussian(theta);
  if (family != "matern")
    throw config_error("kernel.family must be \"matern\" or \"gaussian\"");
  const std::string nu = j.at("nu").get<std::string>();
  double nu_val;
  if (nu == "1/2") nu_val = 0.5;
  else if (nu == "3/2") nu_val = 1.5;
  else if (nu == "5/2") nu_val = 2.5;
  else if (nu == "7/2") nu_val = 3.5;
  else throw config_error("kernel.nu must be one of \"1/2\", \"3/2\", \"5/2\", \"7/2\"");
  return KernelSpec::matern(nu_val, theta);
}

/// strategy: {variant, epsilon?, k_init?, sigma?, cn?, theta_lower?, theta_upper?,
///            mle_grid?, ei_budget?}
inline StrategyConfig strategy_from_json(const json& j) {
  StrategyConfig cfg;
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "naive") cfg.variant = StrategyVariant::Naive;
  else if (variant == "ei_fixed") cfg.variant = StrategyVariant::EIFixed;
  else if (variant == "ei_mle") cfg.variant = StrategyVariant::EIMle;
  else if (variant == "ei_robust") cfg.variant = StrategyVariant::EIRobust;
  else throw config_error("strategy.variant must be naive|ei_fixed|ei_mle|ei_robust");
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("k_init")) cfg.k_init = j["k_init"].get<int>();
  if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
  if (j.contains("cn")) {
    const std::string cn = j["cn"].get<std::string>();
    if (cn == "1/n") cfg.cn_rule = CnRule::InvN;
    else if (cn == "1/(n log n)") cfg.cn_rule = CnRule::InvNLogN;
    else throw config_error("strategy.cn must be \"1/(n log n)\" or \"1/n\"");
  }
  if (j.contains("theta_lower")) cfg.theta_lower = vec_from_json(j["theta_lower"], "strategy.theta_lower");
  if (j.contains("theta_upper")) cfg.theta_upper = vec_from_json(j["theta_upper"], "strategy.theta_upper");
  if (j.contains("mle_grid")) cfg.mle_grid = j["mle_grid"].get<int>();
  if (j.contains("ei_budget")) cfg.ei_budget = j["ei_budget"].get<int>();
  return cfg;
}

/// domain: {lower: [..], upper: [..]}
inline Box box_from_json(const json& j) {
  return Box(vec_from_json(j.at("lower"), "domain.lower"),
             vec_from_json(j.at("upper"), "domain.upper"));
}

/// objective:
///   {type: "span", seed, centers?}           random unit-norm kernel span
///   {type: "counterexample"}                 spiked plateau (min g = -1)
///   {type: "plateau"}                        unspiked plateau (min f = 0)
///   {type: "constant", value?}
inline Objective objective_from_json(const json& j, const KernelSpec& spec,
                                     const Box& box) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "span") {
    const auto seed = j.at("seed").get<std::uint64_t>();
    const int centers = j.contains("centers") ? j["centers"].get<int>() : 30;
    return make_span_objective(spec, box, centers, seed);
  }
  if (type == "counterexample" || type == "plateau") {
    const CounterexamplePair pair = make_counterexample(box);
    Objective obj;
    if (type == "counterexample") {
      obj.eval = [pair](const Vec& x) { return pair.g_spiked(x); };
      obj.min_value = pair.min_g();
    } else {
      obj.eval = [pair](const Vec& x) { return pair.f_plateau(x); };
      obj.min_value = pair.min_f();
    }
    obj.descriptor = "{\"type\":\"" + type + "\"}";
    return obj;
  }
  if (type == "constant") {
    const double value = j.contains("value") ? j["value"].get<double>() : 0.0;
    Objective obj;
    obj.eval = [value](const Vec&) { return value; };
    obj.min_value = value;
    obj.descriptor = "{\"type\":\"constant\",\"value\":" + std::to_string(value) + "}";
    return obj;
  }
  throw config_error("objective.type must be span|counterexample|plateau|constant");
}

/// Top-level experiment config.
struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::matern(2.5, Vec::Ones(1));
  StrategyConfig strategy;
  Box domain = Box::unit(1);
  json objective;
  int steps = 100;
  std::vector<std::uint64_t> seeds = {1};

  Objective make_objective() const {
    return objective_from_json(objective, kernel, domain);
  }
};

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.kernel = kernel_from_json(j.at("kernel"));
  cfg.strategy = strategy_from_json(j.at("strategy"));
  cfg.domain = box_from_json(j.at("domain"));
  cfg.objective = j.at("objective");
  cfg.steps = j.at("steps").get<int>();
  if (j.contains("seeds")) {
    if (j["seeds"].is_array()) {
      cfg.seeds.clear();
      for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
    } else {
      const int count = j["seeds"].at("count").get<int>();
      const std::uint64_t base =
          j["seeds"].contains("base") ? j["seeds"]["base"].get<std::uint64_t>() : 1;
      cfg.seeds.clear();
      for (int i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
    }
    if (cfg.seeds.empty()) throw config_error("seeds must not be empty");
  }
  if (cfg.kernel.dim() != cfg.domain.dim())
    throw config_error("kernel.theta dimension must match the domain");
  cfg.strategy.validate(cfg.domain.dim());
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw config_error(path + ": " + e.what());
  }
}

/// Output directory: $EIGO_OUTPUT_DIR if set, else the current directory.
inline std::string output_dir() {
  if (const char* env = std::getenv("EIGO_OUTPUT_DIR")) return env;
  return ".";
}

}  // namespace eigo
