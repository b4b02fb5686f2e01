#include "erwlab/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "erwlab/errors.hpp"
#include "erwlab/rng.hpp"

namespace erwlab {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

Vec vec_from(const json& j, int d, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ConfigError(where + ": expected an array of " + std::to_string(d) + " integers");
  Vec v = Vec::zero(d);
  for (int i = 0; i < d; ++i) {
    if (!j[static_cast<size_t>(i)].is_number_integer())
      throw ConfigError(where + ": coordinates must be integers");
    v[i] = j[static_cast<size_t>(i)].get<int32_t>();
  }
  return v;
}

std::vector<StepOutcome> outcomes_from(const json& j, int d, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array");
  std::vector<StepOutcome> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    expect_keys(o, where + "[" + std::to_string(i) + "]", {"dz", "p"});
    StepOutcome so;
    so.dz = vec_from(o.at("dz"), d, where + ".dz");
    so.p = o.at("p").get<double>();
    out.push_back(so);
  }
  return out;
}

json outcomes_to(const std::vector<StepOutcome>& outcomes, int d) {
  json arr = json::array();
  for (const auto& o : outcomes) {
    json dz = json::array();
    for (int i = 0; i < d; ++i) dz.push_back(o.dz[i]);
    arr.push_back({{"dz", dz}, {"p", o.p}});
  }
  return arr;
}

CookieSet cookies_from(const json& j, int d) {
  expect_keys(j, "model.kernel.cookies", {"type", "lo", "hi"});
  std::string t = j.at("type").get<std::string>();
  CookieSet c;
  if (t == "all")
    c.kind = CookieSet::Kind::All;
  else if (t == "empty")
    c.kind = CookieSet::Kind::Empty;
  else if (t == "halfspace")
    c.kind = CookieSet::Kind::Halfspace;
  else if (t == "not_box") {
    c.kind = CookieSet::Kind::NotBox;
    c.lo = vec_from(j.at("lo"), d, "cookies.lo");
    c.hi = vec_from(j.at("hi"), d, "cookies.hi");
    for (int i = 0; i < d; ++i)
      if (c.lo[i] > c.hi[i]) throw ConfigError("cookies: lo exceeds hi on axis " + std::to_string(i));
  } else
    throw ConfigError("cookies: unknown type '" + t + "'");
  return c;
}

json cookies_to(const CookieSet& c, int d) {
  json j;
  switch (c.kind) {
    case CookieSet::Kind::All:
      j["type"] = "all";
      break;
    case CookieSet::Kind::Empty:
      j["type"] = "empty";
      break;
    case CookieSet::Kind::Halfspace:
      j["type"] = "halfspace";
      break;
    case CookieSet::Kind::NotBox: {
      j["type"] = "not_box";
      json lo = json::array(), hi = json::array();
      for (int i = 0; i < d; ++i) {
        lo.push_back(c.lo[i]);
        hi.push_back(c.hi[i]);
      }
      j["lo"] = lo;
      j["hi"] = hi;
      break;
    }
  }
  return j;
}

const std::set<std::string> kKnownEstimators = {
    "speed",      "speed-blocks", "covariance", "tail",    "clt",      "autocorr",
    "local-time", "site-local-time", "range",   "advance", "tau-ratio"};

}  // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

namespace {
RunConfig parse_config(const nlohmann::json& j);
}

// Every section and key falls back to its default; nlohmann's own errors
// (missing keys inside entries, type mismatches) surface as ConfigError so
// the CLI maps them to exit 2.
RunConfig RunConfig::from_json(const nlohmann::json& j) {
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

namespace {
RunConfig parse_config(const nlohmann::json& j) {
  expect_keys(j, "config", {"model", "run", "output", "analysis"});
  RunConfig c;

  const nlohmann::json m = j.count("model") ? j.at("model") : nlohmann::json::object();
  expect_keys(m, "model", {"d", "direction", "kernel"});
  if (m.count("d")) c.d = m.at("d").get<int>();
  if (c.d < 2 || c.d > kMaxDim)
    throw ConfigError("model.d: must be in [2," + std::to_string(kMaxDim) + "]");
  if (m.count("direction")) {
    const auto& dir = m.at("direction");
    if (!dir.is_array() || static_cast<int>(dir.size()) != c.d)
      throw ConfigError("model.direction: expected " + std::to_string(c.d) + " components");
    c.direction.clear();
    double norm2 = 0;
    for (const auto& x : dir) {
      double v = x.get<double>();
      c.direction.push_back(v);
      norm2 += v * v;
    }
    if (norm2 <= 0) throw ConfigError("model.direction: must be nonzero");
  } else {
    c.direction.assign(static_cast<size_t>(c.d), 0.0);
    c.direction[0] = 1.0;
  }

  const nlohmann::json k = m.count("kernel") ? m.at("kernel") : nlohmann::json::object();
  if (k.count("type")) c.kernel.type = k.at("type").get<std::string>();
  // keys that do not apply to the chosen type are rejected, not ignored
  if (c.kernel.type == "excited-nn") {
    expect_keys(k, "model.kernel", {"type", "p"});
    if (k.count("p")) c.kernel.p = k.at("p").get<double>();
    if (c.kernel.p < 0 || c.kernel.p > 1) throw ConfigError("kernel.p: outside [0,1]");
  } else if (c.kernel.type == "symmetric-nn") {
    expect_keys(k, "model.kernel", {"type"});
  } else if (c.kernel.type == "generalized") {
    expect_keys(k, "model.kernel", {"type", "cookies", "table", "site_overrides"});
    if (!k.count("table")) throw ConfigError("kernel: generalized type needs a table");
    if (k.count("cookies")) c.kernel.cookies = cookies_from(k.at("cookies"), c.d);
    for (const auto& e : k.at("table")) {
      expect_keys(e, "kernel.table[]", {"first_visit", "in_cookie_set", "outcomes"});
      GeneralizedKernel::TableEntry te;
      te.first_visit = e.at("first_visit").get<bool>();
      te.in_cookie_set = e.at("in_cookie_set").get<bool>();
      te.outcomes = outcomes_from(e.at("outcomes"), c.d, "kernel.table[].outcomes");
      c.kernel.table.push_back(std::move(te));
    }
    if (k.count("site_overrides"))
      for (const auto& e : k.at("site_overrides")) {
        expect_keys(e, "kernel.site_overrides[]", {"site", "first_visit", "outcomes"});
        GeneralizedKernel::SiteOverride so;
        so.site = vec_from(e.at("site"), c.d, "site_overrides.site");
        so.first_visit = e.at("first_visit").get<bool>();
        so.outcomes = outcomes_from(e.at("outcomes"), c.d, "kernel.site_overrides[].outcomes");
        c.kernel.overrides.push_back(std::move(so));
      }
  } else if (c.kernel.type == "site-bias") {
    expect_keys(k, "model.kernel", {"type", "environment"});
    if (!k.count("environment")) throw ConfigError("kernel: site-bias type needs an environment");
    const auto& e = k.at("environment");
    expect_keys(e, "kernel.environment", {"family", "p_lo", "p_hi", "seed", "fresh_per_replica"});
    std::string family = e.count("family") ? e.at("family").get<std::string>() : "site-bias";
    if (family != "site-bias")
      throw ConfigError("environment.family: only 'site-bias' is implemented, got '" + family + "'");
    if (e.count("p_lo")) c.kernel.p_lo = e.at("p_lo").get<double>();
    if (e.count("p_hi")) c.kernel.p_hi = e.at("p_hi").get<double>();
    if (!(c.kernel.p_lo >= 0 && c.kernel.p_lo <= c.kernel.p_hi && c.kernel.p_hi <= 1))
      throw ConfigError("environment: need 0 <= p_lo <= p_hi <= 1");
    if (e.count("seed")) c.kernel.env_seed = e.at("seed").get<uint64_t>();
    if (e.count("fresh_per_replica"))
      c.kernel.fresh_per_replica = e.at("fresh_per_replica").get<bool>();
  } else {
    throw ConfigError("kernel.type: unknown '" + c.kernel.type + "'");
  }

  if (j.count("run")) {
    const auto& r = j.at("run");
    expect_keys(r, "run", {"horizon", "replicas", "seed", "threads"});
    if (r.count("horizon")) {
      const auto& h = r.at("horizon");
      if (h.is_array()) {
        c.horizon_grid.clear();
        for (const auto& x : h) c.horizon_grid.push_back(x.get<long>());
        if (c.horizon_grid.empty()) throw ConfigError("run.horizon: empty grid");
        for (size_t i = 1; i < c.horizon_grid.size(); ++i)
          if (c.horizon_grid[i] <= c.horizon_grid[i - 1])
            throw ConfigError("run.horizon: grid must be strictly increasing");
        c.horizon = c.horizon_grid.back();
      } else {
        c.horizon = h.get<long>();
      }
    }
    if (r.count("replicas")) c.replicas = r.at("replicas").get<uint32_t>();
    if (r.count("seed")) c.seed = r.at("seed").get<uint64_t>();
    if (r.count("threads")) c.threads = r.at("threads").get<int>();
    if (c.horizon < 1) throw ConfigError("run.horizon: must be positive");
    if (c.replicas < 1) throw ConfigError("run.replicas: must be positive");
    if (c.threads < 0) throw ConfigError("run.threads: must be >= 0");
  }

  if (j.count("output")) {
    const auto& o = j.at("output");
    expect_keys(o, "output",
                {"dir", "format", "dump_trajectories", "dump_stats", "dump_blocks"});
    if (o.count("dir")) c.out_dir = o.at("dir").get<std::string>();
    if (o.count("format")) c.format = o.at("format").get<std::string>();
    if (c.format != "json" && c.format != "csv")
      throw ConfigError("output.format: expected 'json' or 'csv'");
    if (o.count("dump_trajectories")) c.dump_trajectories = o.at("dump_trajectories").get<bool>();
    if (o.count("dump_stats")) c.dump_stats = o.at("dump_stats").get<bool>();
    if (o.count("dump_blocks")) c.dump_blocks = o.at("dump_blocks").get<bool>();
  }

  if (j.count("analysis")) {
    const auto& a = j.at("analysis");
    expect_keys(a, "analysis",
                {"ci_level", "batch_size", "alpha0", "delta", "probe_count", "margin",
                 "require_ballistic", "b_grid", "submartingale_radius", "estimators"});
    if (a.count("ci_level")) c.ci_level = a.at("ci_level").get<double>();
    if (!(c.ci_level > 0 && c.ci_level < 1)) throw ConfigError("analysis.ci_level: outside (0,1)");
    if (a.count("batch_size")) c.batch_size = a.at("batch_size").get<int>();
    if (c.batch_size < 1) throw ConfigError("analysis.batch_size: must be positive");
    if (a.count("alpha0")) c.alpha0 = a.at("alpha0").get<double>();
    if (a.count("delta")) c.delta = a.at("delta").get<double>();
    if (a.count("probe_count")) c.probe_count = a.at("probe_count").get<int>();
    if (c.probe_count < 1) throw ConfigError("analysis.probe_count: must be positive");
    if (a.count("margin")) c.margin = a.at("margin").get<double>();
    if (c.margin < 0) throw ConfigError("analysis.margin: must be >= 0");
    if (a.count("require_ballistic")) c.require_ballistic = a.at("require_ballistic").get<bool>();
    if (a.count("b_grid")) {
      c.b_grid.clear();
      for (const auto& b : a.at("b_grid")) c.b_grid.push_back(b.get<double>());
      if (c.b_grid.empty()) throw ConfigError("analysis.b_grid: empty");
    }
    if (a.count("submartingale_radius"))
      c.submartingale_radius = a.at("submartingale_radius").get<double>();
    if (a.count("estimators")) {
      for (const auto& e : a.at("estimators")) {
        std::string name = e.get<std::string>();
        if (!kKnownEstimators.count(name))
          throw ConfigError("analysis.estimators: unknown estimator '" + name + "'");
        c.estimators.push_back(name);
      }
    }
  }
  return c;
}
}  // namespace

bool RunConfig::wants(const std::string& name) const {
  if (estimators.empty()) return true;
  for (const auto& e : estimators)
    if (e == name) return true;
  return false;
}

RunConfig RunConfig::load(const std::string& path) {
  if (!std::filesystem::exists(path)) throw MissingInputError("config file not found: " + path);
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json k;
  k["type"] = kernel.type;
  if (kernel.type == "excited-nn") k["p"] = kernel.p;
  if (kernel.type == "generalized") {
    k["cookies"] = cookies_to(kernel.cookies, d);
    nlohmann::json table = nlohmann::json::array();
    for (const auto& e : kernel.table)
      table.push_back({{"first_visit", e.first_visit},
                       {"in_cookie_set", e.in_cookie_set},
                       {"outcomes", outcomes_to(e.outcomes, d)}});
    k["table"] = table;
    if (!kernel.overrides.empty()) {
      nlohmann::json ovs = nlohmann::json::array();
      for (const auto& o : kernel.overrides) {
        nlohmann::json site = nlohmann::json::array();
        for (int i = 0; i < d; ++i) site.push_back(o.site[i]);
        ovs.push_back({{"site", site},
                       {"first_visit", o.first_visit},
                       {"outcomes", outcomes_to(o.outcomes, d)}});
      }
      k["site_overrides"] = ovs;
    }
  }
  if (kernel.type == "site-bias")
    k["environment"] = {{"family", "site-bias"},
                        {"p_lo", kernel.p_lo},
                        {"p_hi", kernel.p_hi},
                        {"seed", kernel.env_seed},
                        {"fresh_per_replica", kernel.fresh_per_replica}};

  nlohmann::json run;
  if (horizon_grid.empty())
    run["horizon"] = horizon;
  else
    run["horizon"] = horizon_grid;
  run["replicas"] = replicas;
  run["seed"] = seed;
  run["threads"] = threads;

  std::vector<std::string> est = estimators;
  if (est.empty()) est.assign(kKnownEstimators.begin(), kKnownEstimators.end());

  return nlohmann::json{
      {"model", {{"d", d}, {"direction", direction}, {"kernel", k}}},
      {"run", run},
      {"output",
       {{"dir", out_dir},
        {"format", format},
        {"dump_trajectories", dump_trajectories},
        {"dump_stats", dump_stats},
        {"dump_blocks", dump_blocks}}},
      {"analysis",
       {{"ci_level", ci_level},
        {"batch_size", batch_size},
        {"alpha0", alpha0},
        {"delta", delta},
        {"probe_count", probe_count},
        {"margin", margin},
        {"require_ballistic", require_ballistic},
        {"b_grid", b_grid},
        {"submartingale_radius", submartingale_radius},
        {"estimators", est}}}};
}

Direction RunConfig::build_direction() const { return Direction::normalized(direction); }

std::unique_ptr<StepKernel> RunConfig::build_kernel(uint32_t replica) const {
  if (kernel.type == "excited-nn") return std::make_unique<StandardErwKernel>(d, kernel.p);
  if (kernel.type == "symmetric-nn") return std::make_unique<MartingaleKernel>(d);
  if (kernel.type == "generalized")
    return std::make_unique<GeneralizedKernel>(d, build_direction(), kernel.cookies, kernel.table,
                                               kernel.overrides);
  if (kernel.type == "site-bias") {
    uint64_t seed = kernel.env_seed;
    if (kernel.fresh_per_replica) seed = mix64(kernel.env_seed ^ stream_id(14, 0, replica));
    return std::make_unique<SiteBiasEnvironment>(d, kernel.p_lo, kernel.p_hi, seed);
  }
  throw ConfigError("kernel.type: unknown '" + kernel.type + "'");
}

}  // namespace erwlab
