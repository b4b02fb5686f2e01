#include "erwlab/trajectory.hpp"

#include <bit>
#include <cmath>

namespace erwlab {

namespace {
size_t pow2_at_least(size_t n) {
  size_t c = 16;
  while (c < n) c <<= 1;
  return c;
}
}  // namespace

VisitTable::VisitTable(size_t initial_capacity) {
  table_.resize(pow2_at_least(initial_capacity));
}

size_t VisitTable::slot(uint64_t klo, uint64_t khi) const {
  return mix64(klo ^ mix64(khi)) & (table_.size() - 1);
}

uint32_t VisitTable::visit(const Vec& x) {
  if (d_ == 0) d_ = x.d;
  if (size_ * 10 >= table_.size() * 7) grow();
  PackedSite k = pack_site(x);
  size_t i = slot(k.lo, k.hi);
  while (table_[i].count) {
    if (table_[i].klo == k.lo && table_[i].khi == k.hi) return table_[i].count++;
    i = (i + 1) & (table_.size() - 1);
  }
  table_[i] = {k.lo, k.hi, 1};
  ++size_;
  return 0;
}

uint32_t VisitTable::count(const Vec& x) const {
  PackedSite k = pack_site(x);
  size_t i = slot(k.lo, k.hi);
  while (table_[i].count) {
    if (table_[i].klo == k.lo && table_[i].khi == k.hi) return table_[i].count;
    i = (i + 1) & (table_.size() - 1);
  }
  return 0;
}

void VisitTable::clear() {
  for (auto& e : table_) e = {};
  size_ = 0;
}

Vec VisitTable::unpack(const Entry& e) const {
  Vec v = Vec::zero(d_);
  for (int i = 0; i < d_; ++i) {
    uint64_t word = i < 3 ? e.klo : e.khi;
    uint64_t u = (word >> (21 * (i % 3))) & 0x1fffff;
    v[i] = static_cast<int32_t>(u) - (1 << 20);
  }
  return v;
}

void VisitTable::grow() {
  std::vector<Entry> old;
  old.swap(table_);
  table_.resize(old.size() * 2);
  size_ = 0;
  for (const auto& e : old) {
    if (!e.count) continue;
    size_t i = slot(e.klo, e.khi);
    while (table_[i].count) i = (i + 1) & (table_.size() - 1);
    table_[i] = e;
    ++size_;
  }
}

LevelTable::LevelTable(size_t initial_capacity) {
  table_.resize(pow2_at_least(initial_capacity));
}

uint32_t LevelTable::add(int64_t level) {
  if (size_ * 10 >= table_.size() * 7) grow();
  size_t i = mix64(static_cast<uint64_t>(level)) & (table_.size() - 1);
  while (table_[i].count) {
    if (table_[i].key == level) return ++table_[i].count;
    i = (i + 1) & (table_.size() - 1);
  }
  table_[i] = {level, 1};
  ++size_;
  return 1;
}

uint32_t LevelTable::count(int64_t level) const {
  size_t i = mix64(static_cast<uint64_t>(level)) & (table_.size() - 1);
  while (table_[i].count) {
    if (table_[i].key == level) return table_[i].count;
    i = (i + 1) & (table_.size() - 1);
  }
  return 0;
}

void LevelTable::clear() {
  for (auto& e : table_) e = {};
  size_ = 0;
}

std::map<int64_t, int64_t> LevelTable::as_map() const {
  std::map<int64_t, int64_t> m;
  for (const auto& e : table_)
    if (e.count) m[e.key] = e.count;
  return m;
}

void LevelTable::grow() {
  std::vector<Entry> old;
  old.swap(table_);
  table_.resize(old.size() * 2);
  size_ = 0;
  for (const auto& e : old) {
    if (!e.count) continue;
    size_t i = mix64(static_cast<uint64_t>(e.key)) & (table_.size() - 1);
    while (table_[i].count) i = (i + 1) & (table_.size() - 1);
    table_[i] = e;
    ++size_;
  }
}

Trajectory simulate(const StepKernel& kernel, const Direction& dir, CounterRng& rng,
                    const SimulateOptions& opt, TrajectoryObserver* obs) {
  int d = kernel.dim();
  if (dir.d != d) throw ConfigError("simulate: direction dimension mismatch");
  if (opt.horizon < 0) throw ConfigError("simulate: negative horizon");

  bool track = opt.track_visits || opt.record_path || kernel.excitable();
  Trajectory out;
  TrajectoryStats& st = out.stats;
  st.visits_tracked = track;
  st.levels_tracked = opt.track_levels;

  VisitTable visits(track ? 1024 : 16);
  LevelTable levels(opt.track_levels ? 256 : 16);

  Vec x = Vec::zero(d);
  bool at_first_visit = true;
  if (track) visits.visit(x);
  double proj = 0;
  if (opt.track_levels) st.max_level_time = levels.add(0);
  st.range = track ? 1 : 0;
  st.max_site_visits = track ? 1 : 0;
  if (opt.record_path) out.path.push_back({0, x, 0.0, true});

  for (long n = 1; n <= opt.horizon; ++n) {
    Vec dz = kernel.sample(x, at_first_visit, rng.uniform01());
    x += dz;
    proj = dot(x, dir);

    uint32_t prior = 0;
    if (track) {
      prior = visits.visit(x);
      if (prior + 1 > st.max_site_visits) st.max_site_visits = prior + 1;
      st.range = static_cast<long>(visits.distinct_sites());
    }
    at_first_visit = (prior == 0);

    if (opt.track_levels) {
      uint32_t c = levels.add(static_cast<int64_t>(std::floor(proj)));
      if (c > st.max_level_time) st.max_level_time = c;
    }
    st.n = n;
    st.proj = proj;
    st.min_proj = std::min(st.min_proj, proj);
    st.max_proj = std::max(st.max_proj, proj);
    if (opt.record_path) out.path.push_back({n, x, proj, at_first_visit});
    if (obs) obs->on_step(n, x, proj);

    if (opt.stop_proj_leq && proj <= *opt.stop_proj_leq) {
      out.stopped_early = true;
      break;
    }
  }
  st.final_pos = x;
  if (opt.track_levels) out.local_time = levels.as_map();
  return out;
}

}  // namespace erwlab
