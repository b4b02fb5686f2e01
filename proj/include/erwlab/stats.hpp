#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "erwlab/lattice.hpp"

namespace erwlab::stats {

double mean(std::span<const double> xs);
// Sample variance with the n-1 divisor; 0 for fewer than two points.
double sample_variance(std::span<const double> xs);
double lag1_autocorr(std::span<const double> xs);

// Standard normal.
double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

// Regularized incomplete beta I_x(a,b) and upper incomplete gamma Q(a,x).
double betainc_reg(double a, double b, double x);
double igamc(double a, double x);

// Survival function of the chi-square distribution with k degrees of freedom.
inline double chi2_sf(double x, double k) { return igamc(0.5 * k, 0.5 * x); }

// Two-sided Student t quantile, P(T <= t) = p, df >= 1.
double t_quantile(double p, int df);

// Quantile used for a two-sided CI at the given level: normal for n >= 30,
// Student t with n-1 degrees of freedom below that.
double ci_quantile(double level, long n);

struct Interval {
  double lo = 0, hi = 0;
};

// Wilson score interval for a binomial proportion.
Interval wilson_interval(long successes, long trials, double level);

// Kolmogorov asymptotic survival function Q(lambda) = P(sup|B| > lambda).
double kolmogorov_q(double lambda);

// One-sample KS distance of a sample against a cdf evaluated at each point.
// The sample is sorted internally.
double ks_statistic(std::vector<double> sample, double (*cdf)(double));
double ks_statistic(std::vector<double> sample, const std::vector<double>& cdf_at_sorted);

// Asymptotic p-value with the small-sample correction
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
double ks_pvalue(double d_stat, long n);

struct LinearFit {
  double slope = 0, intercept = 0;
  double slope_se = 0;
  double r2 = 0;
  long n = 0;
};

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);
// Weighted least squares with weights w = 1/se^2; slope_se from the exact
// weighted formula Var(slope) = 1 / sum w (x - xbar_w)^2.
LinearFit fit_line_weighted(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> ses);

// Small dense symmetric matrix (covariance of regeneration increments).
struct SymMat {
  int n = 0;
  std::array<std::array<double, kMaxDim>, kMaxDim> a{};

  double& at(int i, int j) { return a[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
};

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(SymMat m);

}  // namespace erwlab::stats
