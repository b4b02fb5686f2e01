#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "erwlab/environment.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/stats.hpp"

using namespace erwlab;

static Vec v2(int x, int y) {
  Vec v = Vec::zero(2);
  v[0] = x;
  v[1] = y;
  return v;
}

TEST_CASE("environment construction validates parameters") {
  CHECK_THROWS_AS(SiteBiasEnvironment(1, 0.6, 0.9, 0), ConfigError);
  CHECK_THROWS_AS(SiteBiasEnvironment(2, 0.9, 0.6, 0), ConfigError);
  CHECK_THROWS_AS(SiteBiasEnvironment(2, -0.1, 0.9, 0), ConfigError);
  CHECK_THROWS_AS(SiteBiasEnvironment(2, 0.6, 1.1, 0), ConfigError);
  CHECK_THROWS_AS(SiteBiasEnvironment(2, 0.6, 0.9, 0, 5), ConfigError);
  CHECK_NOTHROW(SiteBiasEnvironment(2, 0.6, 0.6, 0));
}

TEST_CASE("site bias is quenched: a pure function of (seed, site)") {
  SiteBiasEnvironment a(2, 0.6, 0.9, 12345);
  SiteBiasEnvironment b(2, 0.6, 0.9, 12345);
  SiteBiasEnvironment c(2, 0.6, 0.9, 54321);
  bool any_diff = false;
  double mn = 1, mx = 0;
  for (int x = -20; x <= 20; ++x)
    for (int y = -20; y <= 20; ++y) {
      double p = a.site_bias(v2(x, y));
      CHECK(p == b.site_bias(v2(x, y)));
      CHECK(p >= 0.6);
      CHECK(p < 0.9);
      any_diff |= (p != c.site_bias(v2(x, y)));
      mn = std::min(mn, p);
      mx = std::max(mx, p);
    }
  CHECK(any_diff);
  CHECK(mx - mn > 0.1);  // the family actually varies over sites
}

TEST_CASE("site bias is uniform over [p_lo, p_hi)") {
  SiteBiasEnvironment env(3, 0.2, 0.8, 99);
  const int bins = 10;
  std::vector<long> count(bins, 0);
  long n = 0;
  for (int x = -15; x <= 15; ++x)
    for (int y = -15; y <= 15; ++y)
      for (int z = -2; z <= 2; ++z) {
        Vec v = Vec::zero(3);
        v[0] = x;
        v[1] = y;
        v[2] = z;
        double u = (env.site_bias(v) - 0.2) / 0.6;
        ++count[static_cast<size_t>(u * bins)];
        ++n;
      }
  double chi2 = 0, e = double(n) / bins;
  for (long c : count) chi2 += (c - e) * (c - e) / e;
  CHECK(stats::chi2_sf(chi2, bins - 1) > 1e-3);
}

TEST_CASE("sampling agrees with the materialized law") {
  SiteBiasEnvironment env(2, 0.55, 0.95, 7);
  for (int sx : {-3, 0, 2, 17}) {
    Vec site = v2(sx, 1 - sx);
    for (bool fv : {true, false}) {
      StepLaw law = env.law(site, fv);
      for (double u = 0.0; u < 1.0; u += 0.001)
        CHECK(env.sample(site, fv, u) == law.pick(u).dz);
    }
    CHECK(env.law(site, true).drift[0] ==
          doctest::Approx((2 * env.site_bias(site) - 1) / 2).epsilon(1e-14));
    CHECK(env.law(site, false).zero_drift());
  }
}

TEST_CASE("sampling frequencies match the quenched law (chi-square gof)") {
  SiteBiasEnvironment env(2, 0.6, 0.9, 2024);
  Vec site = v2(4, -4);
  StepLaw law = env.law(site, true);
  CounterRng rng(31, 2);
  const int n = 50000;
  std::vector<long> count(law.outcomes.size(), 0);
  for (int i = 0; i < n; ++i) {
    Vec dz = env.sample(site, true, rng.uniform01());
    for (size_t j = 0; j < law.outcomes.size(); ++j)
      if (law.outcomes[j].dz == dz) {
        ++count[j];
        break;
      }
  }
  double chi2 = 0;
  for (size_t j = 0; j < law.outcomes.size(); ++j) {
    double e = law.outcomes[j].p * n;
    chi2 += (count[j] - e) * (count[j] - e) / e;
  }
  CHECK(stats::chi2_sf(chi2, double(law.outcomes.size() - 1)) > 1e-3);
}

TEST_CASE("endpoint certification") {
  SiteBiasEnvironment env(2, 0.6, 0.9, 5);
  CHECK(env.site_dependent());
  CHECK(env.drift_floor() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(env.ellipticity_floor() == doctest::Approx(0.05).epsilon(1e-14));

  auto laws = env.context_laws();
  REQUIRE(laws.size() == 3);
  auto cert = certify_kernel(env, Direction::axis(2, 0));
  CHECK(cert.has_excited);
  CHECK(cert.lambda == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(cert.zero_drift_ok);
  CHECK(cert.ballistic_ok);
  CHECK(cert.ellipticity.ok);
  CHECK(cert.ellipticity.h == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(cert.ellipticity.r == doctest::Approx(0.5).epsilon(1e-12));

  // p_lo = 0.5 family is not uniformly ballistic
  SiteBiasEnvironment flat(2, 0.5, 0.9, 5);
  auto c2 = certify_kernel(flat, Direction::axis(2, 0));
  CHECK(c2.lambda == doctest::Approx(0.0).scale(1));
  CHECK_FALSE(c2.ballistic_ok);
}
