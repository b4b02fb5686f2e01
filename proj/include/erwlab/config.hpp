#pragma once

#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "erwlab/environment.hpp"
#include "erwlab/model.hpp"

namespace erwlab {

struct KernelConfig {
  std::string type = "excited-nn";  // excited-nn | symmetric-nn | generalized | site-bias
  double p = 0.75;                  // excited-nn
  // generalized
  CookieSet cookies{CookieSet::Kind::All, {}, {}};
  std::vector<GeneralizedKernel::TableEntry> table;
  std::vector<GeneralizedKernel::SiteOverride> overrides;
  // site-bias environment
  double p_lo = 0.6, p_hi = 0.9;
  uint64_t env_seed = 0;
  bool fresh_per_replica = true;  // independent environment per replica
};

struct RunConfig {
  int d = 2;
  std::vector<double> direction{1.0, 0.0};
  KernelConfig kernel;

  long horizon = 10000;
  std::vector<long> horizon_grid;  // empty = single horizon; else ascending grid
  uint32_t replicas = 200;
  uint64_t seed = 20260823;
  int threads = 0;  // 0 = hardware concurrency

  std::string out_dir = "out";
  std::string format = "json";  // json | csv
  bool dump_trajectories = false;
  bool dump_stats = true;
  bool dump_blocks = true;

  double ci_level = 0.95;
  int batch_size = 32;
  double alpha0 = 0.05;   // advance-check exponent offset
  double delta = 0.1;     // local-time exponent slack
  int probe_count = 1024;
  double margin = 0.0;    // regeneration confirmation margin
  bool require_ballistic = false;
  std::vector<double> b_grid{0.9};  // submartingale exponents to try, in order
  double submartingale_radius = 200;
  std::vector<std::string> estimators;  // empty = run everything

  static RunConfig defaults();
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);  // MissingInputError when absent
  nlohmann::json to_json() const;

  // The full horizon list: the grid when one was given, else just {horizon}.
  std::vector<long> horizons() const {
    return horizon_grid.empty() ? std::vector<long>{horizon} : horizon_grid;
  }
  bool wants(const std::string& name) const;  // estimator selection

  Direction build_direction() const;
  // Every replica builds its own kernel; the site-bias family derives an
  // independent quenched seed per replica unless fresh_per_replica is off.
  std::unique_ptr<StepKernel> build_kernel(uint32_t replica = 0) const;
  bool random_environment() const { return kernel.type == "site-bias"; }
};

}  // namespace erwlab
