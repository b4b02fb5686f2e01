#include "erwlab/environment.hpp"

#include <algorithm>

#include "erwlab/rng.hpp"

namespace erwlab {

SiteBiasEnvironment::SiteBiasEnvironment(int d, double p_lo, double p_hi, uint64_t seed, int axis)
    : d_(d), axis_(axis), p_lo_(p_lo), p_hi_(p_hi), seed_(seed) {
  if (d < 2 || d > kMaxDim) throw ConfigError("environment: dimension outside [2," + std::to_string(kMaxDim) + "]");
  if (axis < 0 || axis >= d) throw ConfigError("environment: bad bias axis");
  if (!(0 <= p_lo && p_lo <= p_hi && p_hi <= 1))
    throw ConfigError("environment: need 0 <= p_lo <= p_hi <= 1");
  revisit_ = symmetric_nn_law(d);
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1})
      shape_.push_back({Vec::unit(d, i, s), i == axis ? (s > 0 ? 1 : 0) : 2});
  std::sort(shape_.begin(), shape_.end(), [d](const Slot& a, const Slot& b) {
    for (int i = 0; i < d; ++i)
      if (a.dz[i] != b.dz[i]) return a.dz[i] < b.dz[i];
    return false;
  });
}

double SiteBiasEnvironment::site_bias(const Vec& x) const {
  uint64_t h = mix64(seed_ + 0x9e3779b97f4a7c15ull);
  for (int i = 0; i < d_; ++i)
    h = mix64(h ^ static_cast<uint64_t>(static_cast<int64_t>(x[i])));
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return p_lo_ + (p_hi_ - p_lo_) * u;
}

Vec SiteBiasEnvironment::sample(const Vec& site, bool first_visit, double u) const {
  if (!first_visit) return revisit_.pick(u).dz;
  double p = site_bias(site);
  // mirror make_law + pick arithmetic so law(site, fv).pick(u) agrees exactly
  double probs[2 * kMaxDim];
  double total = 0;
  size_t n = shape_.size();
  for (size_t i = 0; i < n; ++i) {
    const Slot& s = shape_[i];
    probs[i] = s.kind == 2 ? 1.0 / (2 * d_) : (s.kind == 1 ? p : 1 - p) / d_;
    total += probs[i];
  }
  double acc = 0;
  for (size_t i = 0; i + 1 < n; ++i) {
    acc += probs[i];
    if (u < acc / total) return shape_[i].dz;
  }
  return shape_[n - 1].dz;
}

StepLaw SiteBiasEnvironment::law(const Vec& site, bool first_visit) const {
  if (!first_visit) return revisit_;
  return excited_nn_law(d_, site_bias(site), axis_);
}

std::vector<StepKernel::ContextLaw> SiteBiasEnvironment::context_laws() const {
  return {{excited_nn_law(d_, p_lo_, axis_), true, "first visit, p=p_lo"},
          {excited_nn_law(d_, p_hi_, axis_), true, "first visit, p=p_hi"},
          {revisit_, false, "revisit"}};
}

std::string SiteBiasEnvironment::describe() const {
  return "site-bias d=" + std::to_string(d_) + " p_lo=" + std::to_string(p_lo_) +
         " p_hi=" + std::to_string(p_hi_) + " env_seed=" + std::to_string(seed_);
}

double validate_uniform_ellipticity(const SiteBiasEnvironment& env) {
  // Outcome probabilities are linear in the bias, so the infimum over the
  // family is attained at an endpoint law.  Zero-mass outcomes are dropped
  // from StepLaw, so scan the full set of unit steps instead of the listed
  // outcomes.
  int d = env.dim();
  double kappa = 1.0;
  for (const auto& cl : env.context_laws())
    for (int i = 0; i < d; ++i)
      for (int s : {+1, -1}) {
        Vec e = Vec::unit(d, i, s);
        double mass = 0;
        for (const auto& o : cl.law.outcomes)
          if (o.dz == e) mass = o.p;
        kappa = std::min(kappa, mass);
      }
  if (kappa <= 0)
    throw ValidationError("environment is not uniformly elliptic: some unit step has mass 0 (kappa = 0)");
  return kappa;
}

double validate_uniform_excitation(const SiteBiasEnvironment& env, const Direction& dir) {
  double lambda = 0;
  bool first = true;
  for (const auto& cl : env.context_laws()) {
    if (cl.excited) {
      double drift = cl.law.drift_dot(dir);
      lambda = first ? drift : std::min(lambda, drift);
      first = false;
    } else if (!cl.law.zero_drift()) {
      throw ValidationError("environment revisit law carries drift; excited-walk structure broken");
    }
  }
  if (first) throw ValidationError("environment lists no first-visit law");
  if (lambda <= 0)
    throw ValidationError("environment is not uniformly excited: inf drift along ell = " +
                          std::to_string(lambda));
  return lambda;
}

}  // namespace erwlab
