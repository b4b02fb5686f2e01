#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "erwlab/model.hpp"
#include "erwlab/rng.hpp"

namespace erwlab {

// Open-addressing map from packed site to visit count.  count == 0 marks an
// empty slot; stored counts are always >= 1.
class VisitTable {
 public:
  explicit VisitTable(size_t initial_capacity = 1024);

  // Increment the count at x and return the count before the increment,
  // so 0 means this arrival is the first visit.
  uint32_t visit(const Vec& x);
  uint32_t count(const Vec& x) const;
  size_t distinct_sites() const { return size_; }
  void clear();

  template <class F>
  void for_each(F&& f) const {  // f(const Vec&, uint32_t count)
    for (const auto& e : table_)
      if (e.count) f(unpack(e), e.count);
  }

 private:
  struct Entry {
    uint64_t klo = 0, khi = 0;
    uint32_t count = 0;
  };
  Vec unpack(const Entry& e) const;
  size_t slot(uint64_t klo, uint64_t khi) const;
  void grow();

  std::vector<Entry> table_;
  size_t size_ = 0;
  int d_ = 0;
};

// Same scheme keyed by an integer level m, counting steps whose projection
// falls in [m, m+1).
class LevelTable {
 public:
  explicit LevelTable(size_t initial_capacity = 256);
  uint32_t add(int64_t level);  // returns the new count
  uint32_t count(int64_t level) const;
  void clear();
  std::map<int64_t, int64_t> as_map() const;

 private:
  struct Entry {
    int64_t key = 0;
    uint32_t count = 0;
  };
  void grow();
  std::vector<Entry> table_;
  size_t size_ = 0;
};

struct TrajectoryStats {
  long n = 0;            // steps taken
  double proj = 0;       // X_n . ell
  double min_proj = 0, max_proj = 0;
  bool visits_tracked = false;
  long range = 0;          // distinct sites visited, start included
  long max_site_visits = 0;
  bool levels_tracked = false;
  long max_level_time = 0;  // max_m L_n(m)
  Vec final_pos;
};

struct StepRecord {
  long step = 0;
  Vec pos;
  double proj = 0;
  bool first_visit = false;  // arrival count was zero
};

class TrajectoryObserver {
 public:
  virtual ~TrajectoryObserver() = default;
  virtual void on_step(long n, const Vec& pos, double proj) = 0;
};

struct SimulateOptions {
  long horizon = 0;
  bool track_visits = true;    // forced on for excitable kernels
  bool track_levels = false;   // maintain the projection slab histogram
  bool record_path = false;    // keep every step in memory (forces visit tracking)
  std::optional<double> stop_proj_leq;  // stop once proj <= threshold (checked for n >= 1)
};

struct Trajectory {
  TrajectoryStats stats;
  std::vector<StepRecord> path;  // step 0 included when recorded
  bool stopped_early = false;
  // level histogram snapshot, only filled when track_levels is set
  std::map<int64_t, int64_t> local_time;
};

Trajectory simulate(const StepKernel& kernel, const Direction& dir, CounterRng& rng,
                    const SimulateOptions& opt, TrajectoryObserver* obs = nullptr);

}  // namespace erwlab
