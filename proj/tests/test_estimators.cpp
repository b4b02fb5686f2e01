#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "erwlab/estimators.hpp"
#include "erwlab/rng.hpp"

using namespace erwlab;

static Vec v2(int x, int y) {
  Vec v = Vec::zero(2);
  v[0] = x;
  v[1] = y;
  return v;
}

static Block blk(long dtau, Vec dx, uint32_t rep = 0) {
  Block b;
  b.dtau = dtau;
  b.dx = dx;
  b.dproj = dx[0];
  b.replica = rep;
  return b;
}

TEST_CASE("block extraction drops the initial segment and the final block") {
  std::vector<RenewalSequence> seqs(3);
  auto pt = [](long t, int x) {
    RenewalPoint p;
    p.time = t;
    p.pos = Vec::zero(2);
    p.pos[0] = x;
    p.proj = x;
    return p;
  };
  seqs[0].taus = {pt(3, 2), pt(5, 3), pt(9, 6), pt(12, 8)};
  seqs[1].taus = {pt(4, 1)};
  seqs[2].taus = {};

  auto s = BlockSample::from_sequences(seqs, 2, false);
  CHECK(s.replicas == 3);
  CHECK(s.dropped_first == 2);
  CHECK(s.dropped_last == 1);
  REQUIRE(s.blocks.size() == 2);  // (3->5) and (5->9); (9->12) dropped
  CHECK(s.blocks[0].dtau == 2);
  CHECK(s.blocks[0].dx[0] == 1);
  CHECK(s.blocks[1].dtau == 4);
  CHECK(s.blocks[1].dx[0] == 3);
  CHECK(s.blocks[1].dproj == 3.0);
  CHECK(s.blocks[0].replica == 0);
}

TEST_CASE("ratio speed on a two-block sample") {
  BlockSample s;
  s.d = 2;
  s.iid_blocks = true;
  s.replicas = 1;
  s.blocks = {blk(3, v2(2, 0)), blk(5, v2(4, 0))};
  auto rep = speed_from_blocks(s, Direction::axis(2, 0), 0.95);
  CHECK(rep.estimate == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(rep.diagnostics["v_0"] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(rep.diagnostics["v_1"] == doctest::Approx(0.0).scale(1));
  // residuals -0.25 and +0.25, delta-method se = sqrt(0.125/2)/4
  CHECK(rep.se == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(rep.n == 2);
  CHECK(rep.diagnostics["jackknife_se"] ==
        doctest::Approx(std::sqrt(0.5 * (2 * 0.004444444444444444))).epsilon(1e-6));
  CHECK(rep.diagnostics["mean_dtau"] == doctest::Approx(4.0));

  BlockSample empty;
  empty.d = 2;
  CHECK_THROWS_AS(speed_from_blocks(empty, Direction::axis(2, 0)), InsufficientDataError);
}

TEST_CASE("replica units aggregate before the ratio variance") {
  BlockSample s;
  s.d = 2;
  s.iid_blocks = false;
  s.replicas = 2;
  s.blocks = {blk(1, v2(1, 0), 0), blk(1, v2(1, 0), 0), blk(2, v2(1, 0), 1),
              blk(2, v2(1, 0), 1)};
  auto rep = speed_from_blocks(s, Direction::axis(2, 0));
  // totals 6 steps, 4 forward; units (2,2) and (4,2)
  CHECK(rep.estimate == doctest::Approx(4.0 / 6).epsilon(1e-15));
  CHECK(rep.n == 2);
}

TEST_CASE("block covariance matches the hand example") {
  BlockSample s;
  s.d = 2;
  s.iid_blocks = true;
  s.replicas = 1;
  s.blocks = {blk(1, v2(1, 0)), blk(1, v2(0, 1))};
  std::vector<double> v{0.5, 0.5};
  auto est = covariance_from_blocks(s, v);
  CHECK(est.a.at(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(est.a.at(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(est.a.at(0, 1) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(est.a.at(1, 0) == est.a.at(0, 1));
  CHECK(est.max_asym == 0.0);
  CHECK(est.min_eig == doctest::Approx(0.0).scale(1));
  CHECK(est.n == 2);
}

TEST_CASE("direct speed averages per replica") {
  std::vector<TrajectoryStats> st(2);
  st[0].n = 10;
  st[0].proj = 5;
  st[1].n = 10;
  st[1].proj = 7;
  auto rep = direct_speed(st, Direction::axis(2, 0));
  CHECK(rep.estimate == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(rep.se == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rep.diagnostics["mean_horizon"] == doctest::Approx(10.0));
}

TEST_CASE("regen tail recovers a pure exponential") {
  // geometric dtau with p = 1/2: survival 2^-n, stretched exponent 1
  BlockSample s;
  s.d = 2;
  s.iid_blocks = true;
  s.replicas = 1;
  CounterRng rng(4242, 0);
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform01();
    long k = 1 + static_cast<long>(std::floor(std::log1p(-u) / std::log(0.5)));
    s.blocks.push_back(blk(k, v2(1, 0)));
  }
  auto rep = regen_tail(s);
  CHECK(rep.estimate == doctest::Approx(1.0).epsilon(0.1));
  CHECK(rep.diagnostics["r2"] > 0.95);
  CHECK(rep.diagnostics["mean_dtau"] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rep.diagnostics["window_points"] >= 3);

  BlockSample tiny;
  tiny.d = 2;
  tiny.blocks = {blk(1, v2(1, 0))};
  CHECK_THROWS_AS(regen_tail(tiny), InsufficientDataError);
}

TEST_CASE("range exponent fits a power law through noisy samples") {
  CounterRng rng(99, 1);
  std::vector<RangePoint> pts;
  for (long h : {1000l, 3000l, 10000l}) {
    RangePoint p;
    p.horizon = h;
    for (int r = 0; r < 100; ++r) {
      double noise = 0.1 * (rng.uniform01() + rng.uniform01() + rng.uniform01() - 1.5);
      p.ranges.push_back(std::pow(double(h), 0.8) * std::exp(noise));
    }
    pts.push_back(std::move(p));
  }
  auto rep = range_exponent(pts, 0.99);
  CHECK(rep.estimate == doctest::Approx(0.8).epsilon(0.03));
  CHECK(rep.ci_lo < 0.8);
  CHECK(rep.ci_hi > 0.8);
  CHECK(rep.ci_lo > 0.5);
  CHECK(rep.diagnostics["r2"] > 0.99);
}

TEST_CASE("clt batches against the standard normal") {
  BlockSample s;
  s.d = 2;
  s.iid_blocks = true;
  s.replicas = 1;
  CounterRng rng(1234, 0);
  for (int i = 0; i < 6400; ++i) {
    Vec dx = Vec::zero(2);
    dx[0] = rng.uniform01() < 0.5 ? 1 : -1;
    dx[1] = rng.uniform01() < 0.5 ? 1 : -1;
    s.blocks.push_back(blk(1, dx));
  }
  std::vector<double> v{0, 0};
  stats::SymMat a;
  a.n = 2;
  a.at(0, 0) = a.at(1, 1) = 1.0;
  auto res = clt_batches(s, v, a, 32);
  CHECK(res.batches == 200);
  for (int j = 0; j < 2; ++j) {
    CHECK_FALSE(res.degenerate[size_t(j)]);
    CHECK(res.p_value[size_t(j)] > 0.01);
  }

  // degenerate variance flags and maximal distance
  stats::SymMat bad = a;
  bad.at(0, 0) = 0.0;
  auto resd = clt_batches(s, v, bad, 32);
  CHECK(resd.degenerate[0]);
  CHECK(resd.d_stat[0] == 0.5);
  CHECK_FALSE(resd.degenerate[1]);
}

TEST_CASE("block autocorrelation") {
  BlockSample s;
  s.d = 2;
  s.iid_blocks = true;
  s.replicas = 2;
  CounterRng rng(5, 5);
  for (uint32_t rep = 0; rep < 2; ++rep)
    for (int i = 0; i < 500; ++i)
      s.blocks.push_back(blk(1 + static_cast<long>(rng.uniform01() * 10), v2(1, 0), rep));
  auto r = block_autocorrelation(s);
  CHECK(std::abs(r.estimate) < r.diagnostics["threshold"]);
  CHECK(r.diagnostics["pairs"] == 998);  // one adjacency lost at the replica boundary

  BlockSample alt;
  alt.d = 2;
  alt.iid_blocks = true;
  alt.replicas = 1;
  for (int i = 0; i < 400; ++i) alt.blocks.push_back(blk(i % 2 ? 9 : 1, v2(1, 0)));
  CHECK(block_autocorrelation(alt).estimate < -0.9);
}

TEST_CASE("azuma bound reference value") {
  CHECK(azuma_bound(100, 30, 1.0) == doctest::Approx(0.022217993076484612).epsilon(1e-12));
  CHECK(azuma_bound(100, 30, 1.0, false) ==
        doctest::Approx(0.011108996538242306).epsilon(1e-12));
  CHECK(azuma_bound(1000, 2000, 1.0) <= 2 * std::exp(-2000.0));
  CHECK_THROWS_AS(azuma_bound(0, 1, 1), ConfigError);
}

TEST_CASE("advance threshold formula") {
  CHECK(advance_threshold(0.25, 10000, 0.05) ==
        doctest::Approx(0.25 / 3 * std::pow(10000.0, 0.55)).epsilon(1e-15));
}

TEST_CASE("proportion report wraps the wilson interval") {
  auto rep = proportion_report("escape_probability", 8, 10, 0.95);
  CHECK(rep.estimate == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(rep.ci_lo == doctest::Approx(0.49016247153664183).epsilon(1e-12));
  CHECK(rep.ci_hi == doctest::Approx(0.9433178485456247).epsilon(1e-12));
}

TEST_CASE("submartingale margins match high-precision references") {
  auto law = symmetric_nn_law(2);
  Vec y = v2(10, 0);
  CHECK(submartingale_margin(law, y, 0.9) ==
        doctest::Approx(0.0160327949313756699).epsilon(1e-12));
  CHECK(submartingale_margin(law, v2(3, 4), 0.7) ==
        doctest::Approx(0.0155233531635782927).epsilon(1e-12));
  CHECK(submartingale_margin(law, v2(1, 0), 0.9) ==
        doctest::Approx(0.14953662414560147).epsilon(1e-12));
}

TEST_CASE("submartingale certificate for the planar symmetric walk") {
  auto law = symmetric_nn_law(2);
  auto cert = submartingale_certificate(law, 0.9, 50);
  CHECK(cert.certified);
  CHECK(cert.violations == 0);
  CHECK(cert.gamma2 == 0.0);
  CHECK(cert.min_margin > 0);
  CHECK(cert.scanned > 7500);
  CHECK(cert.scanned < 7950);
  CHECK(cert.notes.empty());

  auto c2 = submartingale_certificate(law, 1.0, 30);
  REQUIRE(!c2.notes.empty());  // b = 1 flagged as outside the lemma's range

  // a one-dimensional walk cannot carry the certificate: concavity wins
  StepLaw line = make_law({{[] {
                              Vec v;
                              v.d = 1;
                              v[0] = 1;
                              return v;
                            }(),
                            0.5},
                           {[] {
                              Vec v;
                              v.d = 1;
                              v[0] = -1;
                              return v;
                            }(),
                            0.5}},
                          1);
  auto c1 = submartingale_certificate(line, 0.9, 200);
  CHECK_FALSE(c1.certified);
  CHECK(c1.violations > 0);
  CHECK(c1.gamma2 >= 199.0);

  CHECK_THROWS_AS(submartingale_certificate(law, 0.0, 50), ConfigError);
  CHECK_THROWS_AS(submartingale_certificate(law, 0.9, 1e5), ConfigError);
}
