#include "erwlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "erwlab/errors.hpp"

namespace erwlab {

BlockSample BlockSample::from_sequences(std::span<const RenewalSequence> seqs, int d, bool iid) {
  BlockSample s;
  s.d = d;
  s.iid_blocks = iid;
  s.replicas = static_cast<long>(seqs.size());
  for (size_t rep = 0; rep < seqs.size(); ++rep) {
    const auto& taus = seqs[rep].taus;
    size_t m = taus.size();
    if (m >= 1) s.dropped_first += 1;
    if (m >= 2) s.dropped_last += 1;
    for (size_t i = 0; i + 2 < m; ++i) {
      Block b;
      b.dtau = taus[i + 1].time - taus[i].time;
      b.dx = taus[i + 1].pos - taus[i].pos;
      b.dproj = taus[i + 1].proj - taus[i].proj;
      b.replica = static_cast<uint32_t>(rep);
      s.blocks.push_back(b);
    }
  }
  return s;
}

namespace {

struct Unit {
  double t = 0, x = 0;
};

// independent units behind a ratio se: blocks when exchangeable, replica
// aggregates otherwise
std::vector<Unit> ratio_units(const BlockSample& s, const std::function<double(const Block&)>& xv) {
  std::vector<Unit> units;
  if (s.iid_blocks) {
    units.reserve(s.blocks.size());
    for (const auto& b : s.blocks) units.push_back({static_cast<double>(b.dtau), xv(b)});
    return units;
  }
  std::vector<Unit> per_rep(static_cast<size_t>(s.replicas));
  std::vector<bool> has(static_cast<size_t>(s.replicas), false);
  for (const auto& b : s.blocks) {
    per_rep[b.replica].t += static_cast<double>(b.dtau);
    per_rep[b.replica].x += xv(b);
    has[b.replica] = true;
  }
  for (size_t r = 0; r < per_rep.size(); ++r)
    if (has[r]) units.push_back(per_rep[r]);
  return units;
}

}  // namespace

EstimatorReport speed_from_blocks(const BlockSample& s, const Direction& dir, double level) {
  if (s.blocks.empty()) throw InsufficientDataError("speed: no blocks");
  if (dir.d != s.d) throw ConfigError("speed: direction dimension mismatch");

  double total_t = 0, total_x = 0;
  std::array<double, kMaxDim> comp{};
  for (const auto& b : s.blocks) {
    total_t += static_cast<double>(b.dtau);
    total_x += b.dproj;
    for (int j = 0; j < s.d; ++j) comp[static_cast<size_t>(j)] += b.dx[j];
  }
  EstimatorReport rep;
  rep.method = "speed_from_blocks";
  rep.estimate = total_x / total_t;

  auto units = ratio_units(s, [](const Block& b) { return b.dproj; });
  long n = static_cast<long>(units.size());
  if (n < 2) throw InsufficientDataError("speed: need at least two independent units");
  rep.n = n;
  double mean_t = total_t / static_cast<double>(n);
  double s2 = 0;
  for (const auto& u : units) {
    double r = u.x - rep.estimate * u.t;
    s2 += r * r;
  }
  s2 /= static_cast<double>(n - 1);
  rep.se = std::sqrt(s2 / static_cast<double>(n)) / mean_t;
  double z = stats::ci_quantile(level, n);
  rep.ci_lo = rep.estimate - z * rep.se;
  rep.ci_hi = rep.estimate + z * rep.se;

  // leave-one-unit-out cross-check on the ratio
  double jmean = 0;
  std::vector<double> jack(static_cast<size_t>(n));
  for (size_t i = 0; i < units.size(); ++i) {
    jack[i] = (total_x - units[i].x) / (total_t - units[i].t);
    jmean += jack[i];
  }
  jmean /= static_cast<double>(n);
  double jvar = 0;
  for (double v : jack) jvar += (v - jmean) * (v - jmean);
  rep.diagnostics["jackknife_se"] = std::sqrt(jvar * static_cast<double>(n - 1) / n);

  for (int j = 0; j < s.d; ++j)
    rep.diagnostics["v_" + std::to_string(j)] = comp[static_cast<size_t>(j)] / total_t;
  rep.diagnostics["n_blocks"] = static_cast<double>(s.blocks.size());
  rep.diagnostics["replicas"] = static_cast<double>(s.replicas);
  rep.diagnostics["dropped_first"] = static_cast<double>(s.dropped_first);
  rep.diagnostics["dropped_last"] = static_cast<double>(s.dropped_last);
  rep.diagnostics["mean_dtau"] = total_t / static_cast<double>(s.blocks.size());
  rep.notes.push_back(s.iid_blocks ? "block units" : "replica units");
  return rep;
}

EstimatorReport direct_speed(std::span<const TrajectoryStats> stats_in, const Direction&,
                             double level) {
  if (stats_in.size() < 2) throw InsufficientDataError("direct_speed: need at least two replicas");
  std::vector<double> ys;
  double mean_n = 0;
  for (const auto& st : stats_in) {
    if (st.n <= 0) throw InsufficientDataError("direct_speed: empty trajectory");
    ys.push_back(st.proj / static_cast<double>(st.n));
    mean_n += static_cast<double>(st.n);
  }
  EstimatorReport rep;
  rep.method = "direct_speed";
  rep.n = static_cast<long>(ys.size());
  rep.estimate = stats::mean(ys);
  rep.se = std::sqrt(stats::sample_variance(ys) / static_cast<double>(rep.n));
  double z = stats::ci_quantile(level, rep.n);
  rep.ci_lo = rep.estimate - z * rep.se;
  rep.ci_hi = rep.estimate + z * rep.se;
  rep.diagnostics["mean_horizon"] = mean_n / static_cast<double>(ys.size());
  return rep;
}

CovarianceEstimate covariance_from_blocks(const BlockSample& s, std::span<const double> v) {
  if (s.blocks.empty()) throw InsufficientDataError("covariance: no blocks");
  if (static_cast<int>(v.size()) != s.d) throw ConfigError("covariance: speed dimension mismatch");
  CovarianceEstimate est;
  est.a.n = s.d;
  est.n = static_cast<long>(s.blocks.size());
  double total_t = 0;
  for (const auto& b : s.blocks) {
    total_t += static_cast<double>(b.dtau);
    std::array<double, kMaxDim> r{};
    for (int j = 0; j < s.d; ++j) r[static_cast<size_t>(j)] = b.dx[j] - b.dtau * v[static_cast<size_t>(j)];
    for (int j = 0; j < s.d; ++j)
      for (int k = j; k < s.d; ++k)
        est.a.at(j, k) += r[static_cast<size_t>(j)] * r[static_cast<size_t>(k)];
  }
  for (int j = 0; j < s.d; ++j)
    for (int k = j; k < s.d; ++k) {
      est.a.at(j, k) /= total_t;
      est.a.at(k, j) = est.a.at(j, k);
    }
  est.min_eig = stats::jacobi_eigenvalues(est.a).front();
  est.max_asym = 0;
  return est;
}

EstimatorReport regen_tail(const BlockSample& s, double level) {
  if (s.blocks.size() < 20) throw InsufficientDataError("regen_tail: too few blocks");
  std::vector<double> dt;
  dt.reserve(s.blocks.size());
  double m1 = 0, m2 = 0;
  long mx = 0;
  for (const auto& b : s.blocks) {
    dt.push_back(static_cast<double>(b.dtau));
    m1 += static_cast<double>(b.dtau);
    m2 += static_cast<double>(b.dtau) * static_cast<double>(b.dtau);
    mx = std::max(mx, b.dtau);
  }
  double n = static_cast<double>(dt.size());
  m1 /= n;
  m2 /= n;
  std::sort(dt.begin(), dt.end());

  std::vector<double> xs, ys;
  for (long t = 1; t < mx; ++t) {
    double above =
        static_cast<double>(dt.end() - std::upper_bound(dt.begin(), dt.end(), static_cast<double>(t)));
    double surv = above / n;
    if (surv < 0.01 || surv > 0.5) continue;
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(-std::log(surv)));
  }
  if (xs.size() < 3)
    throw InsufficientDataError("regen_tail: survival window [0.01,0.5] has fewer than 3 points");

  auto fit = stats::fit_line(xs, ys);
  EstimatorReport rep;
  rep.method = "regen_tail";
  rep.estimate = fit.slope;  // stretched-exponential exponent
  rep.se = fit.slope_se;
  rep.n = fit.n;
  double z = stats::ci_quantile(level, rep.n);
  rep.ci_lo = rep.estimate - z * rep.se;
  rep.ci_hi = rep.estimate + z * rep.se;
  rep.diagnostics["r2"] = fit.r2;
  rep.diagnostics["mean_dtau"] = m1;
  rep.diagnostics["m2_dtau"] = m2;
  rep.diagnostics["max_dtau"] = static_cast<double>(mx);
  rep.diagnostics["n_blocks"] = n;
  rep.diagnostics["window_points"] = static_cast<double>(xs.size());
  return rep;
}

EstimatorReport range_exponent(std::span<const RangePoint> points, double level, double alpha0) {
  if (points.size() < 2) throw InsufficientDataError("range_exponent: need at least two horizons");
  std::vector<double> xs, ys, ses;
  for (const auto& pt : points) {
    if (pt.ranges.size() < 2)
      throw InsufficientDataError("range_exponent: need at least two replicas per horizon");
    std::vector<double> logs;
    for (double r : pt.ranges) {
      if (r <= 0) throw ContractError("range_exponent: nonpositive range");
      logs.push_back(std::log(r));
    }
    double se = std::sqrt(stats::sample_variance(logs) / static_cast<double>(logs.size()));
    if (!(se > 0)) throw InsufficientDataError("range_exponent: degenerate ranges at one horizon");
    xs.push_back(std::log(static_cast<double>(pt.horizon)));
    ys.push_back(stats::mean(logs));
    ses.push_back(se);
  }
  auto fit = stats::fit_line_weighted(xs, ys, ses);
  EstimatorReport rep;
  rep.method = "range_exponent";
  rep.estimate = fit.slope;
  rep.se = fit.slope_se;
  rep.n = fit.n;
  double z = stats::ci_quantile(level, rep.n);
  rep.ci_lo = rep.estimate - z * rep.se;
  rep.ci_hi = rep.estimate + z * rep.se;
  rep.diagnostics["r2"] = fit.r2;
  rep.diagnostics["alpha0"] = alpha0;
  for (size_t i = 0; i < points.size(); ++i) {
    rep.diagnostics["mean_log_range_" + std::to_string(points[i].horizon)] = ys[i];
    rep.diagnostics["replicas_" + std::to_string(points[i].horizon)] =
        static_cast<double>(points[i].ranges.size());
    double cutoff = std::pow(static_cast<double>(points[i].horizon), 0.5 + alpha0);
    long below = 0;
    for (double r : points[i].ranges)
      if (r < cutoff) ++below;
    rep.diagnostics["frac_below_" + std::to_string(points[i].horizon)] =
        static_cast<double>(below) / static_cast<double>(points[i].ranges.size());
  }
  return rep;
}

CltResult clt_batches(const BlockSample& s, std::span<const double> v, const stats::SymMat& a,
                      int batch_size) {
  if (batch_size < 1) throw ConfigError("clt_batches: bad batch size");
  if (static_cast<int>(v.size()) != s.d || a.n != s.d)
    throw ConfigError("clt_batches: dimension mismatch");
  CltResult res;
  res.batch_size = batch_size;
  res.d_stat.assign(static_cast<size_t>(s.d), 0);
  res.p_value.assign(static_cast<size_t>(s.d), std::numeric_limits<double>::quiet_NaN());
  res.degenerate.assign(static_cast<size_t>(s.d), false);

  std::vector<std::vector<double>> zetas(static_cast<size_t>(s.d));
  uint32_t cur_rep = 0;
  int in_batch = 0;
  double st = 0;
  std::array<double, kMaxDim> sx{};
  bool started = false;
  auto reset = [&] {
    in_batch = 0;
    st = 0;
    sx.fill(0);
  };
  reset();
  for (const auto& b : s.blocks) {
    if (!started || b.replica != cur_rep) {
      cur_rep = b.replica;
      started = true;
      reset();  // partial batch at a replica boundary is discarded
    }
    st += static_cast<double>(b.dtau);
    for (int j = 0; j < s.d; ++j) sx[static_cast<size_t>(j)] += b.dx[j];
    if (++in_batch == batch_size) {
      for (int j = 0; j < s.d; ++j) {
        double ajj = a.at(j, j);
        if (ajj <= 0) {
          res.degenerate[static_cast<size_t>(j)] = true;
          zetas[static_cast<size_t>(j)].push_back(0.0);
        } else {
          zetas[static_cast<size_t>(j)].push_back(
              (sx[static_cast<size_t>(j)] - st * v[static_cast<size_t>(j)]) / std::sqrt(st * ajj));
        }
      }
      reset();
    }
  }
  res.batches = static_cast<long>(zetas[0].size());
  if (res.batches == 0) throw InsufficientDataError("clt_batches: no complete batch");
  for (int j = 0; j < s.d; ++j) {
    auto& z = zetas[static_cast<size_t>(j)];
    std::sort(z.begin(), z.end());
    double d_stat = res.degenerate[static_cast<size_t>(j)]
                        ? 0.5
                        : stats::ks_statistic(z, &stats::normal_cdf);
    res.d_stat[static_cast<size_t>(j)] = d_stat;
    if (res.batches >= 35)
      res.p_value[static_cast<size_t>(j)] = stats::ks_pvalue(d_stat, res.batches);
  }
  res.zetas = std::move(zetas);
  return res;
}

EstimatorReport block_autocorrelation(const BlockSample& s) {
  if (s.blocks.size() < 3) throw InsufficientDataError("block_autocorrelation: too few blocks");
  double m = 0;
  for (const auto& b : s.blocks) m += static_cast<double>(b.dtau);
  m /= static_cast<double>(s.blocks.size());
  double num = 0, den = 0;
  long pairs = 0;
  for (size_t i = 0; i < s.blocks.size(); ++i) {
    double c = static_cast<double>(s.blocks[i].dtau) - m;
    den += c * c;
    if (i + 1 < s.blocks.size() && s.blocks[i + 1].replica == s.blocks[i].replica) {
      num += c * (static_cast<double>(s.blocks[i + 1].dtau) - m);
      ++pairs;
    }
  }
  EstimatorReport rep;
  rep.method = "block_autocorrelation";
  rep.n = static_cast<long>(s.blocks.size());
  rep.estimate = den > 0 ? num / den : 0;
  rep.se = 1.0 / std::sqrt(static_cast<double>(rep.n));
  double z = stats::ci_quantile(0.95, rep.n);
  rep.ci_lo = rep.estimate - z * rep.se;
  rep.ci_hi = rep.estimate + z * rep.se;
  rep.diagnostics["threshold"] = 4.0 / std::sqrt(static_cast<double>(rep.n));
  rep.diagnostics["pairs"] = static_cast<double>(pairs);
  return rep;
}

double azuma_bound(long n, double a, double c, bool two_sided) {
  if (n < 1 || !(a > 0) || !(c > 0)) throw ConfigError("azuma_bound: bad arguments");
  double b = std::exp(-a * a / (2.0 * static_cast<double>(n) * c * c));
  return two_sided ? 2 * b : b;
}

double advance_threshold(double lambda, long n, double alpha0) {
  if (n < 1) throw ConfigError("advance_threshold: bad horizon");
  return lambda / 3.0 * std::pow(static_cast<double>(n), 0.5 + alpha0);
}

EstimatorReport proportion_report(const std::string& method, long successes, long trials,
                                  double level) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw ConfigError("proportion_report: bad counts");
  EstimatorReport rep;
  rep.method = method;
  rep.n = trials;
  rep.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  rep.se = std::sqrt(rep.estimate * (1 - rep.estimate) / static_cast<double>(trials));
  auto iv = stats::wilson_interval(successes, trials, level);
  rep.ci_lo = iv.lo;
  rep.ci_hi = iv.hi;
  rep.diagnostics["successes"] = static_cast<double>(successes);
  rep.diagnostics["level"] = level;
  return rep;
}

double submartingale_margin(const StepLaw& law, const Vec& y, double b) {
  if (!(b > 0)) throw ConfigError("submartingale_margin: b must be positive");
  if (y.d != law.d) throw ConfigError("submartingale_margin: dimension mismatch");
  double e = 0;
  for (const auto& o : law.outcomes) {
    Vec z = y + o.dz;
    e += o.p * std::pow(z.norm2(), 0.5 * b);
  }
  return e - std::pow(y.norm2(), 0.5 * b);
}

SubmartingaleCert submartingale_certificate(const StepLaw& law, double b, double radius_max) {
  if (!(b > 0)) throw ConfigError("submartingale_certificate: b must be positive");
  if (!(radius_max >= 2)) throw ConfigError("submartingale_certificate: radius too small");
  int d = law.d;
  double per_axis = 2 * radius_max + 1;
  if (std::pow(per_axis, d) > 2.5e7)
    throw ConfigError("submartingale_certificate: scan region too large");

  SubmartingaleCert cert;
  cert.b = b;
  cert.radius_max = radius_max;
  if (!(b < 1)) cert.notes.push_back("b outside (0,1); the drift lemma needs b < 1");

  int R = static_cast<int>(std::floor(radius_max));
  double r2max = radius_max * radius_max;
  double worst_norm2 = 0;
  // pass 1: find violations
  Vec y = Vec::zero(d);
  std::function<void(int)> scan1 = [&](int axis) {
    if (axis == d) {
      double n2 = y.norm2();
      if (n2 < 1 || n2 > r2max) return;
      ++cert.scanned;
      if (submartingale_margin(law, y, b) < 0) {
        ++cert.violations;
        worst_norm2 = std::max(worst_norm2, n2);
      }
      return;
    }
    for (int c = -R; c <= R; ++c) {
      y[axis] = c;
      scan1(axis + 1);
    }
  };
  scan1(0);
  cert.gamma2 = std::sqrt(worst_norm2);

  // pass 2: the margin floor over the certified outer region
  cert.min_margin = std::numeric_limits<double>::infinity();
  std::function<void(int)> scan2 = [&](int axis) {
    if (axis == d) {
      double n2 = y.norm2();
      if (n2 <= worst_norm2 || n2 > r2max || n2 < 1) return;
      cert.min_margin = std::min(cert.min_margin, submartingale_margin(law, y, b));
      return;
    }
    for (int c = -R; c <= R; ++c) {
      y[axis] = c;
      scan2(axis + 1);
    }
  };
  scan2(0);
  if (!std::isfinite(cert.min_margin)) cert.min_margin = 0;

  double K = law.max_jump();
  cert.certified = cert.gamma2 < radius_max - K;
  if (!cert.certified)
    cert.notes.push_back("violations reach within one jump of the scan boundary");
  return cert;
}

}  // namespace erwlab
