#pragma once

#include <string>

#include "erwlab/model.hpp"

namespace erwlab {

// Random environment: every site x draws an independent bias
// p_x ~ U[p_lo, p_hi] for its first-visit law; revisits are symmetric.
// The environment is storage free: p_x is a hash of (seed, x), so a replica
// can revisit any site, or be replayed on another thread, and see the same
// quenched draw.
class SiteBiasEnvironment : public StepKernel {
 public:
  SiteBiasEnvironment(int d, double p_lo, double p_hi, uint64_t seed, int axis = 0);

  // the quenched first-visit bias at x
  double site_bias(const Vec& x) const;

  int dim() const override { return d_; }
  Vec sample(const Vec& site, bool first_visit, double u) const override;
  StepLaw law(const Vec& site, bool first_visit) const override;
  bool site_dependent() const override { return true; }
  // Extreme laws of the family.  Both the drift and any tail probability
  // P(dz . ell > r) are linear in p, so certifying the endpoints certifies
  // every site.
  std::vector<ContextLaw> context_laws() const override;
  std::string describe() const override;

  double p_lo() const { return p_lo_; }
  double p_hi() const { return p_hi_; }
  uint64_t seed() const { return seed_; }
  // worst-case single-step floor (1 - p_hi) / d and drift floor (2 p_lo - 1) / d
  double ellipticity_floor() const { return (1 - p_hi_) / d_; }
  double drift_floor() const { return (2 * p_lo_ - 1) / d_; }

 private:
  struct Slot {
    Vec dz;
    int kind;  // 0 = -bias axis, 1 = +bias axis, 2 = transverse
  };
  int d_, axis_;
  double p_lo_, p_hi_;
  uint64_t seed_;
  StepLaw revisit_;
  std::vector<Slot> shape_;  // first-visit outcomes in canonical order
};

// Exact infimum, over the family support, of the probability a one-step law
// puts on any single unit step.  Throws ValidationError when it vanishes
// (some direction can carry zero mass), since uniform ellipticity fails.
double validate_uniform_ellipticity(const SiteBiasEnvironment& env);

// Exact infimum of the first-visit drift along dir over the support, after
// checking that every revisit law is drift free.  Throws ValidationError
// when the infimum is not strictly positive.
double validate_uniform_excitation(const SiteBiasEnvironment& env, const Direction& dir);

}  // namespace erwlab
