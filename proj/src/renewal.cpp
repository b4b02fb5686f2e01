#include "erwlab/renewal.hpp"

#include <algorithm>
#include <cmath>

namespace erwlab {

void RenewalDetector::on_step(long n, const Vec& pos, double proj) {
  if (n != last_n_ + 1)
    throw ContractError("renewal detector: steps must arrive in order (got " + std::to_string(n) +
                        " after " + std::to_string(last_n_) + ")");
  last_n_ = n;

  while (!stack_.empty() && proj < stack_.back().floor) {
    if (log_events_)
      events_.push_back({Event::Killed, stack_.back().time, n, stack_.back().floor});
    stack_.pop_back();
    ++kills_;
    seek_r_ = running_max_;
  }
  if (proj >= seek_r_ + 1) {
    stack_.push_back({n, proj, pos});
    seek_r_ = proj;
    if (log_events_) events_.push_back({Event::Opened, n, n, proj});
  }
  running_max_ = std::max(running_max_, proj);
}

RenewalSequence RenewalDetector::finalize(double margin) const {
  RenewalSequence seq;
  seq.horizon = last_n_;
  seq.margin = margin;
  seq.candidates_open = static_cast<long>(stack_.size());
  seq.kills = kills_;
  for (const auto& c : stack_) {
    if (running_max_ - c.floor < margin) break;  // floors increase up the stack
    seq.taus.push_back({c.time, c.pos, c.floor});
  }
  seq.candidates_confirmed = static_cast<long>(seq.taus.size());
  return seq;
}

std::vector<long> oracle_regeneration_times(std::span<const double> proj) {
  std::vector<long> taus;
  if (proj.empty()) return taus;
  long N = static_cast<long>(proj.size()) - 1;
  long base = 0;
  while (true) {
    // the recursion on the path shifted to start at `base`:
    // S_0 = 0, R_0 = proj[base], D_0 = 0 (finite), then
    //   S_{k+1} = T_{R_k + 1},  D_{k+1} = S_{k+1} + Dbar(S_{k+1}),
    //   R_{k+1} = sup of the shifted path up to D_{k+1}
    // until some Dbar is infinite (never drops below its entry level).
    double R = proj[static_cast<size_t>(base)];
    bool confirmed = false;
    long tau = -1;
    while (true) {
      long s = -1;
      for (long k = 1; base + k <= N; ++k)
        if (proj[static_cast<size_t>(base + k)] >= R + 1) {
          s = k;
          break;
        }
      if (s < 0) break;  // no further entrance within the horizon
      long dbar = -1;
      for (long m = 0; base + s + m <= N; ++m)
        if (proj[static_cast<size_t>(base + s + m)] < proj[static_cast<size_t>(base + s)]) {
          dbar = m;
          break;
        }
      if (dbar < 0) {
        confirmed = true;
        tau = base + s;
        break;
      }
      long D = s + dbar;
      R = proj[static_cast<size_t>(base)];
      for (long i = 0; i <= D; ++i) R = std::max(R, proj[static_cast<size_t>(base + i)]);
    }
    if (!confirmed) break;
    taus.push_back(tau);
    base = tau;
  }
  return taus;
}

RenewalSequence detect_from_projections(std::span<const double> proj, double margin) {
  RenewalDetector det;
  for (size_t i = 1; i < proj.size(); ++i) {
    Vec pos = Vec::zero(2);
    pos[0] = static_cast<int32_t>(std::llround(proj[i]));
    det.on_step(static_cast<long>(i), pos, proj[i]);
  }
  return det.finalize(margin);
}

}  // namespace erwlab
