#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <vector>

#include "erwlab/rng.hpp"
#include "erwlab/stats.hpp"

using namespace erwlab;

TEST_CASE("mix64 matches the splitmix64 reference") {
  CHECK(mix64(0) == 0xe220a8397b1dcdafull);
}

TEST_CASE("counter rng is a pure function of seed, stream, index") {
  CounterRng r(42, 7);
  CHECK(r.key() == 0xc90ce8da9148a608ull);
  CHECK(r.next_u64() == 0x05d40c93dfd47e08ull);
  CHECK(r.next_u64() == 0xca50e17cee5b8a1bull);
  CHECK(r.next_u64() == 0x827183c74e342a0cull);

  CounterRng a(123, 0), b(123, 0);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c(123, 1);
  CounterRng d(124, 0);
  bool all_equal_c = true, all_equal_d = true;
  CounterRng e(123, 0);
  for (int i = 0; i < 64; ++i) {
    uint64_t v = e.next_u64();
    all_equal_c &= (c.next_u64() == v);
    all_equal_d &= (d.next_u64() == v);
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
}

TEST_CASE("uniform01 range and moments") {
  CounterRng r(2026, 5);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s += u;
    s2 += u * u;
  }
  double m = s / n, var = s2 / n - m * m;
  CHECK(m == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12).epsilon(0.02));
}

TEST_CASE("uniform01 equidistribution over 16 bins") {
  CounterRng r(99, 3);
  const int n = 160000, bins = 16;
  std::vector<double> count(bins, 0.0);
  for (int i = 0; i < n; ++i) count[static_cast<size_t>(r.uniform01() * bins)] += 1;
  double chi2 = 0, expect = double(n) / bins;
  for (double c : count) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(stats::chi2_sf(chi2, bins - 1) > 1e-3);
}

TEST_CASE("stream ids are distinct across purposes, slots, replicas") {
  CHECK(stream_id(1, 0, 0) != stream_id(0, 1, 0));
  CHECK(stream_id(0, 1, 0) != stream_id(0, 0, 1));
  CHECK(stream_id(2, 3, 4) == ((2ull << 48) | (3ull << 32) | 4ull));
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64(nullptr, 0) == 0xcbf29ce484222325ull);
  const char* a = "a";
  CHECK(fnv1a64(a, 1) == 0xaf63dc4c8601ec8cull);
  const char* fb = "foobar";
  CHECK(fnv1a64(fb, std::strlen(fb)) == 0x85944171f73967e8ull);
}

TEST_CASE("site packing is injective on a neighborhood") {
  std::vector<PackedSite> seen;
  for (int x = -4; x <= 4; ++x)
    for (int y = -4; y <= 4; ++y) {
      Vec v = Vec::zero(2);
      v[0] = x;
      v[1] = y;
      PackedSite k = pack_site(v);
      for (const auto& s : seen) CHECK_FALSE(s == k);
      seen.push_back(k);
    }
  Vec big = Vec::zero(2);
  big[0] = kCoordLimit + 1;
  CHECK_THROWS_AS(pack_site(big), ContractError);
}
