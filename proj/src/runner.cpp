#include "erwlab/runner.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "erwlab/errors.hpp"
#include "erwlab/rng.hpp"

namespace erwlab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": bad number '" + std::string(s) + "'");
  return v;
}

long parse_long(std::string_view s, const std::string& where) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

void finish_write(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  if (!fs::exists(path)) throw MissingInputError("file not found: " + path);
  std::ifstream f(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (!f.good() && !f.eof()) throw std::runtime_error("read failed: " + path);
  return data;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

long confirmed_blocks(const RenewalSequence& seq) {
  return std::max<long>(0, static_cast<long>(seq.taus.size()) - 1);
}

}  // namespace

EnsembleResult run_ensemble(const RunConfig& cfg, const EnsembleOptions& opt) {
  if (opt.horizon < 1) throw ConfigError("run_ensemble: horizon must be positive");
  EnsembleResult ens;
  ens.horizon = opt.horizon;
  ens.slot = opt.slot;
  ens.replicas.resize(cfg.replicas);

  if (!opt.traj_dir.empty()) fs::create_directories(opt.traj_dir);

  const Direction dir = cfg.build_direction();
  int nthreads =
      cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  if (static_cast<uint32_t>(nthreads) > cfg.replicas) nthreads = static_cast<int>(cfg.replicas);

  std::atomic<uint32_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      uint32_t r = next.fetch_add(1, std::memory_order_relaxed);
      if (r >= cfg.replicas) return;
      try {
        // the slot folds into the kernel tag so grid points see fresh
        // environments, and into the stream id so they draw fresh noise
        auto kernel = cfg.build_kernel(static_cast<uint32_t>(opt.slot) * cfg.replicas + r);
        CounterRng rng(cfg.seed, stream_id(opt.purpose, static_cast<uint32_t>(opt.slot), r));
        SimulateOptions sopt;
        sopt.horizon = opt.horizon;
        sopt.track_visits = opt.track_visits;
        sopt.track_levels = opt.track_levels;
        sopt.record_path = !opt.traj_dir.empty();
        sopt.stop_proj_leq = opt.stop_proj_leq;
        RenewalDetector det;
        Trajectory t = simulate(*kernel, dir, rng, sopt, opt.detect_renewals ? &det : nullptr);
        ReplicaResult& res = ens.replicas[r];
        res.stats = t.stats;
        res.local_time = std::move(t.local_time);
        res.stopped_early = t.stopped_early;
        if (opt.detect_renewals) res.renewal = det.finalize(cfg.margin);
        if (!opt.traj_dir.empty()) {
          char name[32];
          std::snprintf(name, sizeof(name), "replica_%05u.csv", r);
          write_trajectory_csv(opt.traj_dir + "/" + name, t.path, cfg.d);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return ens;
}

void write_trajectory_csv(const std::string& path, const std::vector<StepRecord>& steps, int d) {
  auto f = open_out(path);
  f << "step";
  for (int i = 1; i <= d; ++i) f << ",x" << i;
  f << ",proj,first_visit\n";
  for (const auto& s : steps) {
    f << s.step;
    for (int i = 0; i < d; ++i) f << ',' << s.pos[i];
    f << ',' << format_double(s.proj) << ',' << (s.first_visit ? 1 : 0) << '\n';
  }
  finish_write(f, path);
}

void write_stats_json(const std::string& path, const EnsembleResult& ens) {
  json arr = json::array();
  for (const auto& r : ens.replicas) {
    json rec;
    rec["n"] = r.stats.n;
    rec["range"] = r.stats.range;
    rec["proj"] = r.stats.proj;
    rec["min_proj"] = r.stats.min_proj;
    rec["max_proj"] = r.stats.max_proj;
    json lt = json::object();
    for (const auto& [m, c] : r.local_time) lt[std::to_string(m)] = c;
    rec["local_time"] = lt;
    arr.push_back(std::move(rec));
  }
  auto f = open_out(path);
  f << arr.dump(2) << '\n';
  finish_write(f, path);
}

void write_stats_csv(const std::string& path, const EnsembleResult& ens) {
  auto f = open_out(path);
  f << "replica,n,range,proj,min_proj,max_proj,max_level_time\n";
  for (size_t i = 0; i < ens.replicas.size(); ++i) {
    const auto& s = ens.replicas[i].stats;
    f << i << ',' << s.n << ',' << s.range << ',' << format_double(s.proj) << ','
      << format_double(s.min_proj) << ',' << format_double(s.max_proj) << ',' << s.max_level_time
      << '\n';
  }
  finish_write(f, path);
}

std::vector<StatsRecord> read_stats(const std::string& path) {
  std::vector<StatsRecord> out;
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    json arr;
    try {
      arr = json::parse(read_text(path));
    } catch (const json::exception& e) {
      throw ConfigError("stats parse error in " + path + ": " + e.what());
    }
    if (!arr.is_array()) throw ConfigError("stats file is not an array: " + path);
    for (const auto& rec : arr) {
      StatsRecord r;
      r.n = rec.at("n").get<long>();
      r.range = rec.at("range").get<long>();
      r.proj = rec.at("proj").get<double>();
      r.min_proj = rec.at("min_proj").get<double>();
      r.max_proj = rec.at("max_proj").get<double>();
      for (const auto& [k, v] : rec.at("local_time").items()) {
        long count = v.get<long>();
        r.local_time[parse_long(k, "local_time key")] = count;
        r.max_level_time = std::max(r.max_level_time, count);
      }
      out.push_back(std::move(r));
    }
    return out;
  }
  std::string data = read_text(path);
  size_t pos = 0;
  bool header = true;
  while (pos < data.size()) {
    size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    std::string_view line(data.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "replica,n,range,proj,min_proj,max_proj,max_level_time")
        throw ConfigError("unexpected stats csv header in " + path);
      continue;
    }
    auto cols = split_csv(line);
    if (cols.size() != 7) throw ConfigError("bad stats csv row in " + path);
    StatsRecord r;
    r.n = parse_long(cols[1], path);
    r.range = parse_long(cols[2], path);
    r.proj = parse_double(cols[3], path);
    r.min_proj = parse_double(cols[4], path);
    r.max_proj = parse_double(cols[5], path);
    r.max_level_time = parse_long(cols[6], path);
    out.push_back(std::move(r));
  }
  return out;
}

void write_blocks_csv(const std::string& path, const EnsembleResult& ens, int d) {
  auto f = open_out(path);
  f << "k,tau_k,dtau";
  for (int i = 1; i <= d; ++i) f << ",dx_" << i;
  f << ",dproj\n";
  for (const auto& r : ens.replicas) {
    const auto& taus = r.renewal.taus;
    for (size_t i = 0; i + 1 < taus.size(); ++i) {
      f << i << ',' << taus[i].time << ',' << (taus[i + 1].time - taus[i].time);
      for (int j = 0; j < d; ++j) f << ',' << (taus[i + 1].pos[j] - taus[i].pos[j]);
      f << ',' << format_double(taus[i + 1].proj - taus[i].proj) << '\n';
    }
  }
  finish_write(f, path);
}

void write_blocks_index(const std::string& path, const EnsembleResult& ens) {
  json arr = json::array();
  long row = 0;
  for (size_t i = 0; i < ens.replicas.size(); ++i) {
    const auto& seq = ens.replicas[i].renewal;
    long rows = confirmed_blocks(seq);
    arr.push_back({{"replica", i},
                   {"confirmed", seq.candidates_confirmed},
                   {"open", seq.candidates_open},
                   {"kills", seq.kills},
                   {"first_row", row},
                   {"rows", rows}});
    row += rows;
  }
  auto f = open_out(path);
  f << arr.dump(2) << '\n';
  finish_write(f, path);
}

std::vector<RenewalSequence> read_blocks_csv(const std::string& path, int d) {
  std::string data = read_text(path);
  std::string expect = "k,tau_k,dtau";
  for (int i = 1; i <= d; ++i) expect += ",dx_" + std::to_string(i);
  expect += ",dproj";

  std::vector<RenewalSequence> out;
  size_t pos = 0;
  bool header = true;
  while (pos < data.size()) {
    size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    std::string_view line(data.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (std::string(line) != expect)
        throw ConfigError("unexpected blocks csv header in " + path + " (dimension mismatch?)");
      continue;
    }
    auto cols = split_csv(line);
    if (static_cast<int>(cols.size()) != d + 4)
      throw ConfigError("bad blocks csv row in " + path);
    long k = parse_long(cols[0], path);
    long tau = parse_long(cols[1], path);
    long dtau = parse_long(cols[2], path);
    if (k == 0) {
      RenewalSequence seq;
      RenewalPoint start;
      start.time = tau;
      start.pos = Vec::zero(d);
      start.proj = 0;
      seq.taus.push_back(start);
      out.push_back(std::move(seq));
    }
    if (out.empty()) throw ConfigError("blocks csv does not start at k=0 in " + path);
    auto& taus = out.back().taus;
    RenewalPoint nextp = taus.back();
    nextp.time = tau + dtau;
    for (int j = 0; j < d; ++j)
      nextp.pos[j] += static_cast<int32_t>(parse_long(cols[static_cast<size_t>(3 + j)], path));
    nextp.proj += parse_double(cols[static_cast<size_t>(3 + d)], path);
    taus.push_back(nextp);
    out.back().candidates_confirmed = static_cast<long>(taus.size());
  }
  return out;
}

nlohmann::json report_to_json(const EstimatorReport& r) {
  json d = json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = v;
  return json{{"method", r.method}, {"estimate", r.estimate},     {"se", r.se},
              {"ci", {r.ci_lo, r.ci_hi}},  {"n", r.n},            {"diagnostics", d},
              {"notes", r.notes}};
}

uint64_t hash_file(const std::string& path) {
  std::string data = read_text(path);
  return fnv1a64(data.data(), data.size());
}

std::string stats_filename(const RunConfig& cfg, long horizon) {
  std::string ext = cfg.format == "json" ? ".json" : ".csv";
  if (cfg.horizons().size() > 1) return "stats_n" + std::to_string(horizon) + ext;
  return "stats" + ext;
}

std::string blocks_filename(const RunConfig& cfg, long horizon) {
  if (cfg.horizons().size() > 1) return "blocks_n" + std::to_string(horizon) + ".csv";
  return "blocks.csv";
}

std::string blocks_index_filename(const RunConfig& cfg, long horizon) {
  if (cfg.horizons().size() > 1) return "blocks_index_n" + std::to_string(horizon) + ".json";
  return "blocks_index.json";
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const Direction dir = cfg.build_direction();
  auto kernel = cfg.build_kernel(0);
  auto cert = certify_kernel(*kernel, dir, cfg.probe_count);

  out << "kernel: " << kernel->describe() << "\n";
  out << "direction:";
  for (int i = 0; i < cfg.d; ++i) out << ' ' << format_double(dir.ell[static_cast<size_t>(i)]);
  out << "\n";
  out << "condition B: K = " << format_double(cert.jump_bound) << "\n";
  if (cert.has_excited)
    out << "condition C+: lambda = " << format_double(cert.lambda) << "\n";
  else
    out << "condition C+: no excited context (martingale walk, empty cookie set)\n";
  if (cert.ellipticity.ok)
    out << "condition E: h = " << format_double(cert.ellipticity.h)
        << ", r = " << format_double(cert.ellipticity.r) << "\n";
  else
    out << "condition E: not certified (" << cert.ellipticity.detail << ")\n";
  out << "zero drift off excited contexts: "
      << (cert.zero_drift_ok ? "ok" : ("violated, max |drift| = " + format_double(cert.max_offdrift)))
      << "\n";

  std::vector<std::string> violations;
  if (!cert.zero_drift_ok)
    violations.push_back("a non-excited law carries drift " + format_double(cert.max_offdrift) +
                         " (must vanish to 1e-12)");
  if (cert.has_excited && cert.lambda <= 0) {
    std::string msg = "condition C+ fails: inf excited drift along ell = " +
                      format_double(cert.lambda) + " <= 0";
    if (cfg.kernel.type == "excited-nn") msg += " (p must lie in (1/2, 1])";
    violations.push_back(msg);
  }
  if (!cert.ellipticity.ok)
    violations.push_back("condition E fails: " + cert.ellipticity.detail);
  if (cfg.require_ballistic && !cert.ballistic_ok)
    violations.push_back("ballisticity required but the kernel is not certified ballistic");

  if (cfg.random_environment()) {
    const auto* env = dynamic_cast<const SiteBiasEnvironment*>(kernel.get());
    try {
      double kappa = validate_uniform_ellipticity(*env);
      out << "environment kappa = " << format_double(kappa) << "\n";
    } catch (const ValidationError& e) {
      violations.push_back(e.what());
    }
    try {
      double lam = validate_uniform_excitation(*env, dir);
      out << "environment lambda = " << format_double(lam) << "\n";
    } catch (const ValidationError& e) {
      violations.push_back(e.what());
    }
  }
  for (const auto& n : cert.notes) out << "note: " << n << "\n";

  if (violations.empty()) {
    out << "result: ok\n";
    return 0;
  }
  out << "result: violated\n";
  for (const auto& v : violations) out << "  violation: " << v << "\n";
  return 1;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  std::vector<std::string> traj_dirs;
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto H = cfg.horizons();
    json hashes = json::object();
    json streams = json::array();
    for (size_t slot = 0; slot < H.size(); ++slot) {
      long h = H[slot];
      EnsembleOptions opt;
      opt.horizon = h;
      opt.slot = static_cast<int>(slot);
      if (cfg.dump_trajectories) {
        opt.traj_dir = cfg.out_dir + (H.size() > 1 ? "/trajectories_n" + std::to_string(h)
                                                   : "/trajectories");
        traj_dirs.push_back(opt.traj_dir);
      }
      auto ens = run_ensemble(cfg, opt);

      long blocks = 0;
      for (const auto& r : ens.replicas) blocks += confirmed_blocks(r.renewal);

      if (cfg.dump_stats) {
        std::string p = cfg.out_dir + "/" + stats_filename(cfg, h);
        if (cfg.format == "json")
          write_stats_json(p, ens);
        else
          write_stats_csv(p, ens);
        written.push_back(p);
      }
      if (cfg.dump_blocks) {
        std::string p = cfg.out_dir + "/" + blocks_filename(cfg, h);
        write_blocks_csv(p, ens, cfg.d);
        written.push_back(p);
        std::string q = cfg.out_dir + "/" + blocks_index_filename(cfg, h);
        write_blocks_index(q, ens);
        written.push_back(q);
      }
      json slot_streams = json::array();
      for (uint32_t r = 0; r < cfg.replicas; ++r)
        slot_streams.push_back(stream_id(kStreamMain, static_cast<uint32_t>(slot), r));
      streams.push_back(std::move(slot_streams));
      out << "simulate: horizon=" << h << " replicas=" << cfg.replicas
          << " confirmed_blocks=" << blocks << "\n";
    }
    for (const auto& p : written)
      hashes[fs::path(p).filename().string()] = hex64(hash_file(p));

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char host[256] = "unknown";
    gethostname(host, sizeof(host) - 1);
    std::time_t now = std::time(nullptr);
    char stamp[32] = {0};
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));

    json man;
    man["config"] = cfg.to_json();
    man["tool_version"] = kToolVersion;
    man["created_utc"] = stamp;
    man["host"] = host;
    man["wall_seconds"] = wall;
    man["per_replica_streams"] = streams;
    man["outputs"] = hashes;
    std::string mp = cfg.out_dir + "/manifest.json";
    auto f = open_out(mp);
    f << man.dump(2) << '\n';
    finish_write(f, mp);
    written.push_back(mp);
    out << "manifest: " << mp << "\n";
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    for (const auto& dp : traj_dirs) {
      std::error_code ec;
      fs::remove_all(dp, ec);
    }
    throw;
  }
  return 0;
}

namespace {

void write_survival_csv(const std::string& path, const BlockSample& blocks) {
  std::vector<long> dt;
  for (const auto& b : blocks.blocks) dt.push_back(b.dtau);
  std::sort(dt.begin(), dt.end());
  auto f = open_out(path);
  f << "dtau,survival\n";
  double n = static_cast<double>(dt.size());
  for (size_t i = 0; i < dt.size(); ++i) {
    if (i + 1 < dt.size() && dt[i + 1] == dt[i]) continue;  // last index of each value
    f << dt[i] << ',' << format_double(static_cast<double>(dt.size() - i - 1) / n) << '\n';
  }
  finish_write(f, path);
}

void write_ks_csv(const std::string& path, const CltResult& clt) {
  auto f = open_out(path);
  f << "component,z,empirical_cdf,normal_cdf\n";
  for (size_t j = 0; j < clt.zetas.size(); ++j) {
    const auto& z = clt.zetas[j];
    for (size_t i = 0; i < z.size(); ++i)
      f << j << ',' << format_double(z[i]) << ','
        << format_double(static_cast<double>(i + 1) / static_cast<double>(z.size())) << ','
        << format_double(stats::normal_cdf(z[i])) << '\n';
  }
  finish_write(f, path);
}

void write_range_points_csv(const std::string& path, std::span<const RangePoint> pts,
                            double alpha0) {
  auto f = open_out(path);
  f << "horizon,log_horizon,mean_log_range,se_log_range,frac_below_cutoff\n";
  for (const auto& pt : pts) {
    std::vector<double> logs;
    for (double r : pt.ranges) logs.push_back(std::log(r));
    double m = stats::mean(logs);
    double se = std::sqrt(stats::sample_variance(logs) / static_cast<double>(logs.size()));
    double cutoff = std::pow(static_cast<double>(pt.horizon), 0.5 + alpha0);
    long below = 0;
    for (double r : pt.ranges)
      if (r < cutoff) ++below;
    f << pt.horizon << ',' << format_double(std::log(static_cast<double>(pt.horizon))) << ','
      << format_double(m) << ',' << format_double(se) << ','
      << format_double(static_cast<double>(below) / static_cast<double>(pt.ranges.size()))
      << '\n';
  }
  finish_write(f, path);
}

}  // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  if (!fs::exists(cfg.out_dir))
    throw MissingInputError("analyze: stats directory not found: " + cfg.out_dir +
                            " (run simulate first)");

  auto H = cfg.horizons();
  bool want_blocks = cfg.wants("speed-blocks") || cfg.wants("covariance") || cfg.wants("tail") ||
                     cfg.wants("clt") || cfg.wants("autocorr") || cfg.wants("tau-ratio");
  bool want_stats = cfg.wants("speed") || cfg.wants("local-time") || cfg.wants("range") ||
                    cfg.wants("advance");

  std::vector<std::vector<StatsRecord>> stats_by_h;
  if (want_stats) {
    for (long h : H) {
      std::string sp = cfg.out_dir + "/" + stats_filename(cfg, h);
      if (!fs::exists(sp))
        throw MissingInputError("analyze: expected stats file missing: " + sp);
      stats_by_h.push_back(read_stats(sp));
      if (stats_by_h.back().empty())
        throw MissingInputError("analyze: stats file has no records: " + sp);
    }
  }

  std::vector<RenewalSequence> seqs;
  BlockSample blocks;
  if (want_blocks) {
    std::string bp = cfg.out_dir + "/" + blocks_filename(cfg, H.back());
    if (!fs::exists(bp)) throw MissingInputError("analyze: expected blocks file missing: " + bp);
    seqs = read_blocks_csv(bp, cfg.d);
    blocks = BlockSample::from_sequences(seqs, cfg.d,
                                         cfg.random_environment() && cfg.kernel.fresh_per_replica);
  }

  const Direction dir = cfg.build_direction();
  json reports = json::object();
  json skipped = json::object();
  std::vector<std::string> plot_files;

  if (cfg.wants("speed")) {
    std::vector<TrajectoryStats> ts;
    for (const auto& r : stats_by_h.back()) {
      TrajectoryStats s;
      s.n = r.n;
      s.proj = r.proj;
      s.min_proj = r.min_proj;
      s.max_proj = r.max_proj;
      s.range = r.range;
      ts.push_back(s);
    }
    reports["speed"] = report_to_json(direct_speed(ts, dir, cfg.ci_level));
  }

  std::vector<double> v(static_cast<size_t>(cfg.d), 0.0);
  bool have_v = false;
  if (want_blocks && blocks.count() > 0) {
    double st = 0;
    for (const auto& b : blocks.blocks) {
      st += static_cast<double>(b.dtau);
      for (int j = 0; j < cfg.d; ++j) v[static_cast<size_t>(j)] += b.dx[j];
    }
    for (int j = 0; j < cfg.d; ++j) v[static_cast<size_t>(j)] /= st;
    have_v = true;
  }

  if (cfg.wants("speed-blocks")) {
    if (blocks.count() >= 2)
      reports["speed-blocks"] = report_to_json(speed_from_blocks(blocks, dir, cfg.ci_level));
    else
      skipped["speed-blocks"] = "needs at least 2 usable blocks, have " +
                                std::to_string(blocks.count());
  }

  CovarianceEstimate cov;
  bool have_cov = false;
  if ((cfg.wants("covariance") || cfg.wants("clt")) && have_v && blocks.count() >= 2) {
    cov = covariance_from_blocks(blocks, v);
    have_cov = true;
  }
  if (cfg.wants("covariance")) {
    if (have_cov) {
      EstimatorReport r;
      r.method = "covariance";
      r.estimate = cov.min_eig;
      r.se = 0;
      r.ci_lo = r.ci_hi = cov.min_eig;
      r.n = cov.n;
      for (int i = 0; i < cfg.d; ++i)
        for (int j = 0; j < cfg.d; ++j)
          r.diagnostics["a_" + std::to_string(i) + std::to_string(j)] = cov.a.at(i, j);
      r.diagnostics["min_eig"] = cov.min_eig;
      r.diagnostics["max_asym"] = cov.max_asym;
      r.notes.push_back("estimate = smallest eigenvalue of A; entries a_ij in diagnostics");
      reports["covariance"] = report_to_json(r);
    } else {
      skipped["covariance"] = "needs at least 2 usable blocks";
    }
  }

  if (cfg.wants("tail")) {
    if (blocks.count() >= 100) {
      reports["tail"] = report_to_json(regen_tail(blocks, cfg.ci_level));
      std::string p = cfg.out_dir + "/survival.csv";
      write_survival_csv(p, blocks);
      plot_files.push_back(p);
    } else {
      skipped["tail"] = "needs at least 100 blocks for the fit, have " +
                        std::to_string(blocks.count());
    }
  }

  if (cfg.wants("clt")) {
    if (have_cov && blocks.count() >= 200) {
      try {
        auto clt = clt_batches(blocks, v, cov.a, cfg.batch_size);
        EstimatorReport r;
        r.method = "clt";
        r.estimate = *std::max_element(clt.d_stat.begin(), clt.d_stat.end());
        r.se = 0;
        r.ci_lo = r.ci_hi = r.estimate;
        r.n = clt.batches;
        r.diagnostics["batch_size"] = clt.batch_size;
        r.diagnostics["batches"] = static_cast<double>(clt.batches);
        for (int j = 0; j < cfg.d; ++j) {
          r.diagnostics["d_stat_" + std::to_string(j)] = clt.d_stat[static_cast<size_t>(j)];
          r.diagnostics["p_value_" + std::to_string(j)] = clt.p_value[static_cast<size_t>(j)];
          r.diagnostics["degenerate_" + std::to_string(j)] =
              clt.degenerate[static_cast<size_t>(j)] ? 1.0 : 0.0;
        }
        r.notes.push_back("estimate = max KS distance over components");
        reports["clt"] = report_to_json(r);
        std::string p = cfg.out_dir + "/ks_batches.csv";
        write_ks_csv(p, clt);
        plot_files.push_back(p);
      } catch (const InsufficientDataError& e) {
        skipped["clt"] = e.what();
      }
    } else {
      skipped["clt"] = "needs covariance and at least 200 blocks, have " +
                       std::to_string(blocks.count());
    }
  }

  if (cfg.wants("autocorr")) {
    if (blocks.count() >= 3)
      reports["autocorr"] = report_to_json(block_autocorrelation(blocks));
    else
      skipped["autocorr"] = "needs at least 3 blocks";
  }

  if (cfg.wants("local-time")) {
    const auto& recs = stats_by_h.back();
    double thr = std::pow(static_cast<double>(H.back()), 0.5 + 2 * cfg.delta);
    long viol = 0, worst = 0;
    for (const auto& r : recs) {
      worst = std::max(worst, r.max_level_time);
      if (static_cast<double>(r.max_level_time) >= thr) ++viol;
    }
    auto r = proportion_report("local-time", viol, static_cast<long>(recs.size()), cfg.ci_level);
    r.diagnostics["threshold"] = thr;
    r.diagnostics["max_level_time"] = static_cast<double>(worst);
    r.diagnostics["delta"] = cfg.delta;
    reports["local-time"] = report_to_json(r);
  }

  if (cfg.wants("advance")) {
    auto kernel = cfg.build_kernel(0);
    auto cert = certify_kernel(*kernel, dir, cfg.probe_count);
    if (cert.has_excited && cert.lambda > 0) {
      const auto& recs = stats_by_h.back();
      double thr = advance_threshold(cert.lambda, H.back(), cfg.alpha0);
      long below = 0;
      for (const auto& r : recs)
        if (r.proj < thr) ++below;
      auto r = proportion_report("advance", below, static_cast<long>(recs.size()), cfg.ci_level);
      r.diagnostics["lambda"] = cert.lambda;
      r.diagnostics["threshold"] = thr;
      r.diagnostics["alpha0"] = cfg.alpha0;
      reports["advance"] = report_to_json(r);
    } else {
      skipped["advance"] = "kernel lists no positively excited context; no advance threshold";
    }
  }

  if (cfg.wants("tau-ratio")) {
    if (!seqs.empty()) {
      double worst = 0, total = 0;
      long counted = 0;
      for (const auto& seq : seqs) {
        double local = 0;
        for (size_t i = 0; i < seq.taus.size(); ++i)
          local = std::max(local, static_cast<double>(seq.taus[i].time) /
                                      static_cast<double>(i + 1));
        if (!seq.taus.empty()) {
          worst = std::max(worst, local);
          total += local;
          ++counted;
        }
      }
      EstimatorReport r;
      r.method = "tau-ratio";
      r.estimate = worst;
      r.se = 0;
      r.ci_lo = r.ci_hi = worst;
      r.n = counted;
      r.diagnostics["mean_max_ratio"] = counted ? total / static_cast<double>(counted) : 0.0;
      r.notes.push_back("max over replicas of max_m tau_m / m; should stay bounded");
      reports["tau-ratio"] = report_to_json(r);
    } else {
      skipped["tau-ratio"] = "no replica produced a confirmed regeneration pair";
    }
  }

  if (cfg.wants("range")) {
    if (H.size() >= 3) {
      std::vector<RangePoint> pts;
      for (size_t i = 0; i < H.size(); ++i) {
        RangePoint pt;
        pt.horizon = H[i];
        for (const auto& r : stats_by_h[i]) pt.ranges.push_back(static_cast<double>(r.range));
        pts.push_back(std::move(pt));
      }
      reports["range"] = report_to_json(range_exponent(pts, cfg.ci_level, cfg.alpha0));
      std::string p = cfg.out_dir + "/range_points.csv";
      write_range_points_csv(p, pts, cfg.alpha0);
      plot_files.push_back(p);
    } else if (!cfg.estimators.empty()) {
      throw InsufficientDataError("range exponent needs a horizon grid with >= 3 points");
    } else {
      skipped["range"] = "needs a horizon grid with >= 3 points";
    }
  }

  if (cfg.wants("site-local-time") && !cfg.estimators.empty())
    skipped["site-local-time"] = "site visit counts are not persisted; run the checks driver";

  json top;
  top["reports"] = reports;
  top["skipped"] = skipped;
  std::string rp = cfg.out_dir + "/estimators.json";
  auto f = open_out(rp);
  f << top.dump(2) << '\n';
  finish_write(f, rp);

  out << "analyze: wrote " << rp << " (" << reports.size() << " reports, " << skipped.size()
      << " skipped)\n";
  for (const auto& p : plot_files) out << "analyze: wrote " << p << "\n";
  return 0;
}

}  // namespace erwlab
