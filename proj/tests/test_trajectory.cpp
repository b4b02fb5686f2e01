#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <map>

#include "erwlab/environment.hpp"
#include "erwlab/trajectory.hpp"

using namespace erwlab;

static Vec v2(int x, int y) {
  Vec v = Vec::zero(2);
  v[0] = x;
  v[1] = y;
  return v;
}

TEST_CASE("visit table counts arrivals and survives growth") {
  VisitTable t;
  CHECK(t.visit(v2(0, 0)) == 0);
  CHECK(t.visit(v2(1, 0)) == 0);
  CHECK(t.visit(v2(0, 0)) == 1);
  CHECK(t.visit(v2(1, 0)) == 1);
  CHECK(t.visit(v2(2, 0)) == 0);
  CHECK(t.distinct_sites() == 3);
  CHECK(t.count(v2(0, 0)) == 2);
  CHECK(t.count(v2(5, 5)) == 0);

  VisitTable big(16);
  for (int x = -60; x < 60; ++x)
    for (int y = -60; y < 60; ++y) CHECK(big.visit(v2(x, y)) == 0);
  CHECK(big.distinct_sites() == 14400);
  for (int x = -60; x < 60; ++x)
    for (int y = -60; y < 60; ++y) CHECK(big.count(v2(x, y)) == 1);

  long seen = 0;
  big.for_each([&](const Vec& v, uint32_t c) {
    CHECK(c == 1);
    CHECK(v[0] >= -60);
    CHECK(v[0] < 60);
    ++seen;
  });
  CHECK(seen == 14400);
}

TEST_CASE("level table tracks slab occupation") {
  LevelTable t;
  CHECK(t.add(0) == 1);
  CHECK(t.add(1) == 1);
  CHECK(t.add(0) == 2);
  CHECK(t.add(1) == 2);
  CHECK(t.add(2) == 1);
  CHECK(t.count(0) == 2);
  CHECK(t.count(5) == 0);
  CHECK(t.count(-3) == 0);
  CHECK(t.add(-3) == 1);
  auto m = t.as_map();
  CHECK(m.size() == 4);
  CHECK(m[0] == 2);
  CHECK(m[1] == 2);
  CHECK(m[2] == 1);
  CHECK(m[-3] == 1);

  LevelTable g(16);
  for (int64_t k = -500; k <= 500; ++k) CHECK(g.add(k) == 1);
  for (int64_t k = -500; k <= 500; ++k) CHECK(g.count(k) == 1);
}

namespace {

// independent recomputation of every streamed statistic from the stored path
void check_stats_against_path(const Trajectory& tr, const Direction& dir) {
  std::map<std::array<int32_t, kMaxDim>, long> sites;
  std::map<int64_t, int64_t> levels;
  double mn = 0, mx = 0;
  long max_site = 0, max_level = 0;
  for (const auto& rec : tr.path) {
    double p = dot(rec.pos, dir);
    CHECK(p == rec.proj);  // stored projection is a pure function of position
    long c = ++sites[rec.pos.c];
    CHECK(rec.first_visit == (c == 1));
    max_site = std::max(max_site, c);
    long lc = ++levels[static_cast<int64_t>(std::floor(p))];
    max_level = std::max(max_level, lc);
    mn = std::min(mn, p);
    mx = std::max(mx, p);
  }
  const auto& st = tr.stats;
  CHECK(st.n == static_cast<long>(tr.path.size()) - 1);
  CHECK(st.range == static_cast<long>(sites.size()));
  CHECK(st.max_site_visits == max_site);
  CHECK(st.min_proj == mn);
  CHECK(st.max_proj == mx);
  CHECK(st.proj == tr.path.back().proj);
  CHECK(st.final_pos == tr.path.back().pos);
  if (st.levels_tracked) {
    CHECK(st.max_level_time == max_level);
    CHECK(tr.local_time == levels);
  }
}

}  // namespace

TEST_CASE("streamed statistics equal a recomputation from the stored path") {
  Direction e1 = Direction::axis(2, 0);
  StandardErwKernel k(2, 0.75);
  for (uint64_t seed : {1u, 2u, 3u}) {
    CounterRng rng(seed, 0);
    SimulateOptions opt;
    opt.horizon = 2000;
    opt.record_path = true;
    opt.track_levels = true;
    auto tr = simulate(k, e1, rng, opt);
    CHECK(tr.stats.n == 2000);
    check_stats_against_path(tr, e1);
  }

  Direction e13 = Direction::axis(3, 0);
  SiteBiasEnvironment env(3, 0.6, 0.9, 11);
  CounterRng rng(9, 4);
  SimulateOptions opt;
  opt.horizon = 1500;
  opt.record_path = true;
  opt.track_levels = true;
  auto tr = simulate(env, e13, rng, opt);
  check_stats_against_path(tr, e13);
}

TEST_CASE("visit tracking does not change the sampled path") {
  Direction e1 = Direction::axis(2, 0);
  MartingaleKernel m(2);
  SimulateOptions tracked;
  tracked.horizon = 5000;
  SimulateOptions untracked;
  untracked.horizon = 5000;
  untracked.track_visits = false;
  for (uint64_t s : {10u, 11u}) {
    CounterRng r1(s, 0), r2(s, 0);
    auto a = simulate(m, e1, r1, tracked);
    auto b = simulate(m, e1, r2, untracked);
    CHECK(a.stats.final_pos == b.stats.final_pos);
    CHECK(a.stats.visits_tracked);
    CHECK_FALSE(b.stats.visits_tracked);
    CHECK(a.stats.range > 0);
    CHECK(b.stats.range == 0);
  }
}

TEST_CASE("early stop on the projection threshold") {
  Direction e1 = Direction::axis(2, 0);
  MartingaleKernel m(2);
  int stopped = 0;
  for (uint32_t rep = 0; rep < 100; ++rep) {
    CounterRng rng(555, rep);
    SimulateOptions opt;
    opt.horizon = 200;
    opt.record_path = true;
    opt.stop_proj_leq = 0.0;
    auto tr = simulate(m, e1, rng, opt);
    if (tr.stopped_early) {
      ++stopped;
      CHECK(tr.stats.proj <= 0.0);
      CHECK(tr.stats.n < 200);
      for (size_t i = 1; i + 1 < tr.path.size(); ++i) CHECK(tr.path[i].proj > 0.0);
    } else {
      CHECK(tr.stats.n == 200);
      for (size_t i = 1; i < tr.path.size(); ++i) CHECK(tr.path[i].proj > 0.0);
    }
  }
  CHECK(stopped > 50);  // a symmetric walk drops below 0 quickly most of the time
}

TEST_CASE("throughput indication") {
  Direction e1 = Direction::axis(2, 0);
  StandardErwKernel k(2, 0.75);
  CounterRng rng(1, 1);
  SimulateOptions opt;
  opt.horizon = 1000000;
  auto t0 = std::chrono::steady_clock::now();
  auto tr = simulate(k, e1, rng, opt);
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("1e6 steps in " << dt << " s (" << 1e6 / dt / 1e6 << " Msteps/s), range "
                          << tr.stats.range);
  CHECK(tr.stats.n == 1000000);
  CHECK(dt < 10.0);
}
