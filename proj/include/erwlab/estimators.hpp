#pragma once

#include <map>
#include <string>
#include <vector>

#include "erwlab/renewal.hpp"
#include "erwlab/stats.hpp"

namespace erwlab {

struct EstimatorReport {
  std::string method;
  double estimate = 0;
  double se = 0;
  double ci_lo = 0, ci_hi = 0;
  long n = 0;  // number of independent units behind the se
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
};

// Increment between consecutive confirmed regeneration times.
struct Block {
  long dtau = 0;
  Vec dx;
  double dproj = 0;
  uint32_t replica = 0;
};

// The usable blocks of a run.  The initial segment [0, tau_1) is not
// distributed like the others and is excluded outright; the block ending at
// the last confirmed time is dropped because that time is the one most at
// risk of being struck down on a longer run.
struct BlockSample {
  int d = 0;
  // true when blocks are exchangeable across the whole pool (the averaged
  // law of the random-environment family); false for a fixed kernel, where
  // only whole replicas are independent units
  bool iid_blocks = false;
  std::vector<Block> blocks;
  long replicas = 0;
  long dropped_first = 0;
  long dropped_last = 0;

  static BlockSample from_sequences(std::span<const RenewalSequence> seqs, int d, bool iid);
  long count() const { return static_cast<long>(blocks.size()); }
};

// Ratio estimate of the speed along ell: sum(dx)/sum(dtau), delta-method se
// over the independent units, jackknife se as a diagnostic.
EstimatorReport speed_from_blocks(const BlockSample& s, const Direction& dir, double level = 0.95);

// Plain per-replica average of X_n.ell / n.
EstimatorReport direct_speed(std::span<const TrajectoryStats> stats, const Direction& dir,
                             double level = 0.95);

struct CovarianceEstimate {
  stats::SymMat a;
  double min_eig = 0;
  double max_asym = 0;  // worst |a_ij - a_ji|, zero by construction
  long n = 0;
};

// A = sum_k (dx_k - dtau_k v)(dx_k - dtau_k v)^T / sum_k dtau_k
CovarianceEstimate covariance_from_blocks(const BlockSample& s, std::span<const double> v);

// Empirical survival of dtau with a stretched-exponential fit
// log(-log S(n)) ~ alpha' log n over the window S in [0.01, 0.5].
EstimatorReport regen_tail(const BlockSample& s, double level = 0.95);

struct RangePoint {
  long horizon = 0;
  std::vector<double> ranges;  // distinct-site counts over replicas
};

// Weighted least squares of mean log|R_n| against log n; the slope estimates
// the growth exponent of the range.  Also reports, per horizon, the fraction
// of replicas whose range fell below n^(1/2 + alpha0).
EstimatorReport range_exponent(std::span<const RangePoint> points, double level = 0.95,
                               double alpha0 = 0.05);

struct CltResult {
  int batch_size = 0;
  long batches = 0;
  std::vector<double> d_stat;   // per component
  std::vector<double> p_value;  // NaN when batches < 35
  std::vector<bool> degenerate;
  std::vector<std::vector<double>> zetas;  // standardized batch values, sorted per component
};

// Batch means of zeta = (sum dx_j - sum dtau v_j) / sqrt(sum dtau A_jj) over
// runs of batch_size consecutive blocks within a replica, compared to a
// standard normal with a one-sample KS test, component by component.
CltResult clt_batches(const BlockSample& s, std::span<const double> v, const stats::SymMat& a,
                      int batch_size = 32);

// Lag-1 autocorrelation of the dtau sequence, adjacencies within replicas
// only.  threshold diagnostic: 4/sqrt(count).
EstimatorReport block_autocorrelation(const BlockSample& s);

// 2 exp(-a^2 / (2 n c^2)), halved for the one-sided variant.
double azuma_bound(long n, double a, double c, bool two_sided = true);

// (lambda/3) n^(1/2 + alpha0), the advance threshold of the ballisticity check.
double advance_threshold(double lambda, long n, double alpha0);

// Binomial report with a Wilson interval (escape and exceedance counts).
EstimatorReport proportion_report(const std::string& method, long successes, long trials,
                                  double level);

// E ||y+Z||^b - ||y||^b for the one-step law; positive margins on
// ||y|| > gamma2 make ||Y||^b a submartingale off a bounded set.
double submartingale_margin(const StepLaw& law, const Vec& y, double b);

struct SubmartingaleCert {
  bool certified = false;
  double b = 0;
  double radius_max = 0;
  double gamma2 = 0;     // largest violating norm (0 when none)
  long violations = 0;
  long scanned = 0;
  double min_margin = 0;  // over the outer region ||y|| > gamma2
  std::vector<std::string> notes;
};

// Exact scan of every lattice point with 1 <= ||y|| <= radius_max.  The
// certificate stands only if no violation occurs within a jump of the
// boundary, so the outer margin cannot be an artifact of truncation.
SubmartingaleCert submartingale_certificate(const StepLaw& law, double b, double radius_max);

}  // namespace erwlab
