#pragma once

#include <span>
#include <vector>

#include "erwlab/trajectory.hpp"

namespace erwlab {

struct RenewalPoint {
  long time = 0;
  Vec pos;
  double proj = 0;
};

struct RenewalSequence {
  std::vector<RenewalPoint> taus;  // confirmed regeneration times, increasing
  long horizon = 0;
  double margin = 0;
  long candidates_open = 0;       // still-alive candidates at the horizon
  long candidates_confirmed = 0;  // == taus.size()
  long kills = 0;                 // candidates opened and later struck down
};

// Streaming regeneration-time detector.
//
// A candidate opens at the first time the projection reaches one unit above
// the relevant running record; it dies the moment the projection drops below
// its own entry level.  Alive candidates form a stack with strictly
// increasing entry levels, so only the top can die next, and a death resets
// the record-seeking threshold to the running maximum.  At the horizon the
// surviving stack, bottom up, is exactly the sequence of regeneration times
// the textbook recursion (see oracle_regeneration_times) produces.
//
// Projection comparisons are exact; no epsilons anywhere.
class RenewalDetector : public TrajectoryObserver {
 public:
  struct Event {
    enum Kind { Opened, Killed } kind = Opened;
    long open_time = 0;
    long event_time = 0;
    double floor = 0;
  };

  explicit RenewalDetector(bool log_events = false) : log_events_(log_events) {}

  void on_step(long n, const Vec& pos, double proj) override;

  // margin > 0 additionally requires the running maximum to have climbed at
  // least that far above a candidate's entry level before trusting it
  RenewalSequence finalize(double margin = 0.0) const;

  long open_candidates() const { return static_cast<long>(stack_.size()); }
  long kills() const { return kills_; }
  const std::vector<Event>& events() const { return events_; }

 private:
  struct Candidate {
    long time = 0;
    double floor = 0;
    Vec pos;
  };
  std::vector<Candidate> stack_;
  double seek_r_ = 0;       // next candidate opens once proj >= seek_r_ + 1
  double running_max_ = 0;  // sup of the projection over the whole past
  long last_n_ = 0;
  long kills_ = 0;
  bool log_events_;
  std::vector<Event> events_;
};

// Literal evaluation of the regeneration recursion on a completed path of
// projections (proj[0] is the start).  Restarts the entrance-time /
// failure-time / record iteration from scratch at every confirmed time.
// Slow and obviously correct; the reference the streaming detector is
// checked against.
std::vector<long> oracle_regeneration_times(std::span<const double> proj);

// Convenience for fixtures: feed a projection path through a detector,
// synthesizing positions on the first axis when the values are integral.
RenewalSequence detect_from_projections(std::span<const double> proj, double margin = 0.0);

}  // namespace erwlab
