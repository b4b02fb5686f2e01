#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "erwlab/model.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/stats.hpp"

using namespace erwlab;

static Vec v2(int x, int y) {
  Vec v = Vec::zero(2);
  v[0] = x;
  v[1] = y;
  return v;
}

TEST_CASE("make_law validates, sorts, merges, drops zeros") {
  CHECK_THROWS_AS(make_law({}, 2), ConfigError);
  CHECK_THROWS_AS(make_law({{v2(1, 0), -0.1}, {v2(-1, 0), 1.1}}, 2), ConfigError);
  CHECK_THROWS_AS(make_law({{v2(1, 0), 0.5}}, 2), ConfigError);  // sums to 0.5

  auto law = make_law({{v2(1, 0), 0.3}, {v2(-1, 0), 0.2}, {v2(1, 0), 0.2}, {v2(0, 1), 0.3},
                       {v2(0, -1), 0.0}},
                      2);
  REQUIRE(law.outcomes.size() == 3);  // merged duplicate, dropped zero
  CHECK(law.outcomes[0].dz == v2(-1, 0));
  CHECK(law.outcomes[1].dz == v2(0, 1));
  CHECK(law.outcomes[2].dz == v2(1, 0));
  CHECK(law.outcomes[2].p == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.cum.back() == 1.0);
  CHECK(law.drift[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(law.drift[1] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("nn laws and drift") {
  auto sym = symmetric_nn_law(2);
  CHECK(sym.outcomes.size() == 4);
  CHECK(sym.zero_drift());

  auto exc = excited_nn_law(2, 0.75);
  CHECK(exc.drift[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(exc.drift[1] == doctest::Approx(0.0).scale(1));
  // sorted order: (-1,0), (0,-1), (0,1), (1,0) with cum 0.125,0.375,0.625,1
  CHECK(exc.pick(0.0).dz == v2(-1, 0));
  CHECK(exc.pick(0.1249).dz == v2(-1, 0));
  CHECK(exc.pick(0.125).dz == v2(0, -1));
  CHECK(exc.pick(0.625).dz == v2(1, 0));
  CHECK(exc.pick(0.9999999).dz == v2(1, 0));

  auto deg = excited_nn_law(2, 1.0);
  CHECK(deg.outcomes.size() == 3);  // -e1 outcome dropped
  CHECK(deg.drift[0] == doctest::Approx(0.5).epsilon(1e-15));

  auto d3 = excited_nn_law(3, 0.6);
  CHECK(d3.drift[0] == doctest::Approx(0.2 / 3).epsilon(1e-14));
  CHECK(d3.max_jump() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("tail_prob uses a strict inequality") {
  auto sym = symmetric_nn_law(2);
  std::array<double, 2> e1{1, 0};
  CHECK(sym.tail_prob(std::span<const double>(e1.data(), 2), 0.5) == doctest::Approx(0.25));
  CHECK(sym.tail_prob(std::span<const double>(e1.data(), 2), 1.0) == 0.0);
  CHECK(sym.tail_prob(std::span<const double>(e1.data(), 2), 0.9999) == doctest::Approx(0.25));
}

TEST_CASE("cookie sets") {
  Direction e1 = Direction::axis(2, 0);
  CookieSet all{CookieSet::Kind::All, {}, {}};
  CookieSet none{CookieSet::Kind::Empty, {}, {}};
  CHECK(all.contains(v2(0, 0), e1));
  CHECK_FALSE(none.contains(v2(0, 0), e1));

  CookieSet half{CookieSet::Kind::Halfspace, {}, {}};
  CHECK(half.contains(v2(1, 0), e1));
  CHECK_FALSE(half.contains(v2(0, 5), e1));
  CHECK_FALSE(half.contains(v2(-1, 0), e1));

  CookieSet nb{CookieSet::Kind::NotBox, v2(-2, -2), v2(2, 2)};
  CHECK_FALSE(nb.contains(v2(0, 0), e1));
  CHECK_FALSE(nb.contains(v2(2, -2), e1));
  CHECK(nb.contains(v2(3, 0), e1));
  CHECK(nb.contains(v2(0, -3), e1));
}

TEST_CASE("standard kernel sampling matches its law (chi-square gof)") {
  StandardErwKernel k(2, 0.75);
  auto law = k.law(v2(0, 0), true);
  CounterRng rng(777, 1);
  const int n = 100000;
  std::vector<long> count(law.outcomes.size(), 0);
  for (int i = 0; i < n; ++i) {
    Vec dz = k.sample(v2(0, 0), true, rng.uniform01());
    bool found = false;
    for (size_t j = 0; j < law.outcomes.size(); ++j)
      if (law.outcomes[j].dz == dz) {
        ++count[j];
        found = true;
        break;
      }
    REQUIRE(found);
  }
  double chi2 = 0;
  for (size_t j = 0; j < law.outcomes.size(); ++j) {
    double e = law.outcomes[j].p * n;
    chi2 += (count[j] - e) * (count[j] - e) / e;
  }
  CHECK(stats::chi2_sf(chi2, double(law.outcomes.size() - 1)) > 1e-3);
}

TEST_CASE("generalized kernel reproduces the standard walk and fails loudly") {
  Direction e1 = Direction::axis(2, 0);
  CookieSet all{CookieSet::Kind::All, {}, {}};
  std::vector<GeneralizedKernel::TableEntry> table;
  auto exc = excited_nn_law(2, 0.75);
  auto sym = symmetric_nn_law(2);
  table.push_back({true, true, {exc.outcomes.begin(), exc.outcomes.end()}});
  table.push_back({false, true, {sym.outcomes.begin(), sym.outcomes.end()}});
  GeneralizedKernel g(2, e1, all, table);

  StandardErwKernel ref(2, 0.75);
  for (bool fv : {true, false}) {
    auto a = g.law(v2(3, -2), fv), b = ref.law(v2(3, -2), fv);
    REQUIRE(a.outcomes.size() == b.outcomes.size());
    for (size_t i = 0; i < a.outcomes.size(); ++i) {
      CHECK(a.outcomes[i].dz == b.outcomes[i].dz);
      CHECK(a.outcomes[i].p == doctest::Approx(b.outcomes[i].p).epsilon(1e-15));
    }
  }

  // cookie-free halfspace context has no listed law
  CookieSet half{CookieSet::Kind::Halfspace, {}, {}};
  GeneralizedKernel partial(2, e1, half, table);
  CHECK_THROWS_AS(partial.law(v2(-1, 0), true), ValidationError);
  CHECK_NOTHROW(partial.law(v2(1, 0), true));

  CHECK_THROWS_AS(GeneralizedKernel(2, e1, all, {}), ConfigError);
  auto dup = table;
  dup.push_back(table[0]);
  CHECK_THROWS_AS(GeneralizedKernel(2, e1, all, dup), ConfigError);
}

TEST_CASE("site overrides take precedence") {
  Direction e1 = Direction::axis(2, 0);
  CookieSet all{CookieSet::Kind::All, {}, {}};
  auto sym = symmetric_nn_law(2);
  std::vector<GeneralizedKernel::TableEntry> table = {
      {true, true, {sym.outcomes.begin(), sym.outcomes.end()}},
      {false, true, {sym.outcomes.begin(), sym.outcomes.end()}}};
  auto exc = excited_nn_law(2, 0.9);
  std::vector<GeneralizedKernel::SiteOverride> ov = {
      {v2(2, 0), true, {exc.outcomes.begin(), exc.outcomes.end()}}};
  GeneralizedKernel g(2, e1, all, table, ov);
  CHECK(g.law(v2(2, 0), true).drift[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(g.law(v2(2, 0), false).zero_drift());
  CHECK(g.law(v2(1, 0), true).zero_drift());
  CHECK(g.context_laws().size() == 3);
}

TEST_CASE("probe directions are unit and include the axes") {
  for (int d : {2, 3, 4}) {
    auto dirs = probe_directions(d, 64);
    CHECK(dirs.size() >= 64u);
    for (const auto& v : dirs) {
      double n2 = 0;
      for (int i = 0; i < d; ++i) n2 += v[size_t(i)] * v[size_t(i)];
      CHECK(n2 == doctest::Approx(1.0).epsilon(1e-9));
    }
    // signed axes are appended last
    for (int i = 0; i < d; ++i) {
      const auto& minus = dirs[dirs.size() - 2 * size_t(d - i)];
      const auto& plus = dirs[dirs.size() - 2 * size_t(d - i) + 1];
      CHECK(minus[size_t(i)] == -1.0);
      CHECK(plus[size_t(i)] == 1.0);
    }
  }
}

TEST_CASE("ellipticity certificate picks h=1/4 at r=1/2 for the planar walk") {
  Direction e1 = Direction::axis(2, 0);
  for (double p : {0.75, 1.0}) {
    StandardErwKernel k(2, p);
    auto cert = certify_condition_E(k.context_laws(), e1, 1024);
    CHECK(cert.ok);
    CHECK(cert.h == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(cert.r == doctest::Approx(0.5).epsilon(1e-12));
  }
  StandardErwKernel k3(3, 0.6);
  auto cert3 = certify_condition_E(k3.context_laws(), Direction::axis(3, 0), 1024);
  CHECK(cert3.ok);
  CHECK(cert3.h == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(cert3.r == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kernel certificates") {
  Direction e1 = Direction::axis(2, 0);
  StandardErwKernel k(2, 0.75);
  auto c = certify_kernel(k, e1);
  CHECK(c.jump_bound == doctest::Approx(1.0));
  CHECK(c.has_excited);
  CHECK(c.lambda == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.zero_drift_ok);
  CHECK(c.ballistic_ok);
  CHECK(c.ellipticity.ok);

  StandardErwKernel null(2, 0.5);
  auto cn = certify_kernel(null, e1);
  CHECK(cn.has_excited);
  CHECK(cn.lambda == doctest::Approx(0.0).scale(1));
  CHECK_FALSE(cn.ballistic_ok);
  CHECK(cn.zero_drift_ok);
  CHECK(cn.ellipticity.ok);

  MartingaleKernel m(2);
  auto cm = certify_kernel(m, e1);
  CHECK_FALSE(cm.has_excited);
  CHECK_FALSE(cm.ballistic_ok);
  CHECK(cm.zero_drift_ok);
  CHECK(cm.ellipticity.ok);
  CHECK(cm.ellipticity.h == doctest::Approx(0.25).epsilon(1e-12));

  // an excited revisit law breaks the martingale structure
  Direction dir = Direction::axis(2, 0);
  CookieSet all{CookieSet::Kind::All, {}, {}};
  auto exc = excited_nn_law(2, 0.8);
  std::vector<GeneralizedKernel::TableEntry> bad = {
      {true, true, {exc.outcomes.begin(), exc.outcomes.end()}},
      {false, true, {exc.outcomes.begin(), exc.outcomes.end()}}};
  GeneralizedKernel gb(2, dir, all, bad);
  auto cb = certify_kernel(gb, dir);
  CHECK_FALSE(cb.zero_drift_ok);
  CHECK(cb.max_offdrift == doctest::Approx(0.3).epsilon(1e-14));
}
