#include "erwlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace erwlab::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  size_t n = xs.size();
  if (n < 2) return 0;
  double m = mean(xs), s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(n - 1);
}

double lag1_autocorr(std::span<const double> xs) {
  size_t n = xs.size();
  if (n < 2) return 0;
  double m = mean(xs), num = 0, den = 0;
  for (size_t i = 0; i < n; ++i) {
    double c = xs[i] - m;
    den += c * c;
    if (i + 1 < n) num += c * (xs[i + 1] - m);
  }
  return den > 0 ? num / den : 0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Acklam's rational approximation followed by one Halley step, which brings
// the result to within a few ulp over (0,1).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1 + 0.5 * x * u);
}

namespace {

double betacf(double a, double b, double x) {
  const int kMaxIt = 300;
  const double kEps = 3e-16, kFpMin = 1e-300;
  double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIt; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) break;
  }
  return h;
}

}  // namespace

double betainc_reg(double a, double b, double x) {
  if (a <= 0 || b <= 0) throw ContractError("betainc_reg: nonpositive shape");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double bt =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1) / (a + b + 2)) return bt * betacf(a, b, x) / a;
  return 1 - bt * betacf(b, a, 1 - x) / b;
}

double igamc(double a, double x) {
  if (a <= 0 || x < 0) throw ContractError("igamc: bad arguments");
  if (x == 0) return 1;
  if (x < a + 1) {
    // series for the lower function, complemented
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 1; n < 1000; ++n) {
      ap += 1;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
    }
    return 1 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // continued fraction for the upper function
  const double kFpMin = 1e-300;
  double b = x + 1 - a, c = 1 / kFpMin, d = 1 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double t_quantile(double p, int df) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("t_quantile: p outside (0,1)");
  if (df < 1) throw ContractError("t_quantile: df < 1");
  if (p == 0.5) return 0;
  if (p < 0.5) return -t_quantile(1 - p, df);
  double nu = df;
  auto cdf = [nu](double t) {
    // P(T <= t) for t >= 0
    return 1 - 0.5 * betainc_reg(0.5 * nu, 0.5, nu / (nu + t * t));
  };
  double lo = 0, hi = 2;
  while (cdf(hi) < p) {
    hi *= 2;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, lo)) break;
  }
  return 0.5 * (lo + hi);
}

double ci_quantile(double level, long n) {
  double p = 0.5 + 0.5 * level;
  if (n >= 30) return normal_quantile(p);
  return t_quantile(p, static_cast<int>(std::max(1l, n - 1)));
}

Interval wilson_interval(long successes, long trials, double level) {
  if (trials <= 0) throw ContractError("wilson_interval: no trials");
  double z = normal_quantile(0.5 + 0.5 * level);
  double n = static_cast<double>(trials);
  double ph = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (ph + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0) return 1;
  if (lambda < 0.4) {
    // theta-function form; the alternating series cancels badly here
    double f = M_PI * M_PI / (8 * lambda * lambda);
    double s = 0;
    for (int j = 1; j <= 19; j += 2) s += std::exp(-double(j) * j * f);
    return std::clamp(1 - std::sqrt(2 * M_PI) / lambda * s, 0.0, 1.0);
  }
  double s = 0, sign = 1;
  for (int j = 1; j <= 200; ++j) {
    double t = std::exp(-2.0 * j * j * lambda * lambda);
    s += sign * t;
    sign = -sign;
    if (t < 1e-18) break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

double ks_statistic(std::vector<double> sample, double (*cdf)(double)) {
  if (sample.empty()) throw ContractError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0;
  for (size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max(d, (static_cast<double>(i) + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_statistic(std::vector<double> sample, const std::vector<double>& cdf_at_sorted) {
  if (sample.empty() || cdf_at_sorted.size() != sample.size())
    throw ContractError("ks_statistic: size mismatch");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0;
  for (size_t i = 0; i < sample.size(); ++i) {
    double f = cdf_at_sorted[i];
    d = std::max(d, (static_cast<double>(i) + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_pvalue(double d_stat, long n) {
  double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d_stat);
}

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  size_t n = xs.size();
  if (n != ys.size() || n < 2) throw ContractError("fit_line: need >= 2 points");
  double mx = mean(xs), my = mean(ys);
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0) throw ContractError("fit_line: degenerate abscissas");
  LinearFit f;
  f.n = static_cast<long>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ssr += r * r;
  }
  f.r2 = syy > 0 ? 1 - ssr / syy : 1;
  f.slope_se = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0;
  return f;
}

LinearFit fit_line_weighted(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> ses) {
  size_t n = xs.size();
  if (n != ys.size() || n != ses.size() || n < 2)
    throw ContractError("fit_line_weighted: need matched samples, >= 2 points");
  double sw = 0, swx = 0, swy = 0;
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(ses[i] > 0)) throw ContractError("fit_line_weighted: nonpositive se");
    w[i] = 1.0 / (ses[i] * ses[i]);
    sw += w[i];
    swx += w[i] * xs[i];
    swy += w[i] * ys[i];
  }
  double mx = swx / sw, my = swy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += w[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += w[i] * (xs[i] - mx) * (ys[i] - my);
    syy += w[i] * (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0) throw ContractError("fit_line_weighted: degenerate abscissas");
  LinearFit f;
  f.n = static_cast<long>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_se = std::sqrt(1.0 / sxx);
  double ssr = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ssr += w[i] * r * r;
  }
  f.r2 = syy > 0 ? 1 - ssr / syy : 1;
  return f;
}

std::vector<double> jacobi_eigenvalues(SymMat m) {
  int n = m.n;
  if (n < 1 || n > kMaxDim) throw ContractError("jacobi_eigenvalues: bad size");
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m.at(p, q) * m.at(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        double apq = m.at(p, q);
        if (apq == 0) continue;
        double theta = (m.at(q, q) - m.at(p, p)) / (2 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = m.at(k, p), akq = m.at(k, q);
          m.at(k, p) = c * akp - s * akq;
          m.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = m.at(p, k), aqk = m.at(q, k);
          m.at(p, k) = c * apk - s * aqk;
          m.at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = m.at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace erwlab::stats
