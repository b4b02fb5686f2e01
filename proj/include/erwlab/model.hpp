#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erwlab/errors.hpp"
#include "erwlab/lattice.hpp"

namespace erwlab {

// Tolerance below which a drift component counts as zero.  Revisit laws and
// off-cookie first-visit laws must clear this bar for the walk to have the
// martingale structure the renewal analysis relies on.
inline constexpr double kZeroDriftTol = 1e-12;

struct StepOutcome {
  Vec dz;
  double p = 0;
};

// A single-step law: outcomes sorted lexicographically by displacement, with
// zero-probability entries dropped and duplicates merged.  Sampling consumes
// exactly one uniform.
struct StepLaw {
  std::vector<StepOutcome> outcomes;
  std::vector<double> cum;  // prefix sums; back() is exactly 1
  std::array<double, kMaxDim> drift{};
  int d = 0;

  const StepOutcome& pick(double u) const {
    for (size_t i = 0; i + 1 < cum.size(); ++i)
      if (u < cum[i]) return outcomes[i];
    return outcomes.back();
  }

  double drift_dot(const Direction& dir) const {
    double s = 0;
    for (int i = 0; i < d; ++i) s += drift[static_cast<size_t>(i)] * dir.ell[static_cast<size_t>(i)];
    return s;
  }
  bool zero_drift(double tol = kZeroDriftTol) const {
    for (int i = 0; i < d; ++i)
      if (std::abs(drift[static_cast<size_t>(i)]) > tol) return false;
    return true;
  }
  // P(dz . ell > r), strict inequality
  double tail_prob(std::span<const double> ell, double r) const;
  double max_jump() const;  // max Euclidean step length
};

// Validates (each p >= 0, total within 1e-9 of 1), sorts, merges, drops
// zeros, and renormalizes the cumulative table so its last entry is exact.
StepLaw make_law(std::vector<StepOutcome> outcomes, int d);

StepLaw symmetric_nn_law(int d);
// First-visit law of the standard excited walk along the axis: +axis with
// probability p/d, -axis with (1-p)/d, the other 2(d-1) neighbors 1/(2d).
StepLaw excited_nn_law(int d, double p, int axis = 0);

// The set of lattice sites that still hold a cookie at first visit.
struct CookieSet {
  enum class Kind { All, Empty, Halfspace, NotBox };
  Kind kind = Kind::All;
  Vec lo, hi;  // NotBox: cookies everywhere outside [lo,hi]

  bool contains(const Vec& x, const Direction& dir) const;
  std::string str() const;
};

// One-step transition kernel.  sample() is the hot path: stateless, thread
// safe, one uniform in, one displacement out.
class StepKernel {
 public:
  virtual ~StepKernel() = default;
  virtual int dim() const = 0;
  virtual Vec sample(const Vec& site, bool first_visit, double u) const = 0;
  virtual StepLaw law(const Vec& site, bool first_visit) const = 0;
  virtual bool site_dependent() const { return false; }
  // false when first visits and revisits share one law; lets the walker skip
  // visit bookkeeping when nothing else needs it
  virtual bool excitable() const { return true; }

  // Every law the kernel can produce (for site-dependent families, the
  // extreme laws), tagged with whether it arises in an excited context.
  struct ContextLaw {
    StepLaw law;
    bool excited = false;
    std::string context;
  };
  virtual std::vector<ContextLaw> context_laws() const = 0;
  virtual std::string describe() const = 0;
};

// Standard excited random walk: every site carries one cookie.
class StandardErwKernel : public StepKernel {
 public:
  StandardErwKernel(int d, double p);
  int dim() const override { return d_; }
  Vec sample(const Vec& site, bool first_visit, double u) const override;
  StepLaw law(const Vec& site, bool first_visit) const override;
  std::vector<ContextLaw> context_laws() const override;
  std::string describe() const override;
  double p() const { return p_; }

 private:
  int d_;
  double p_;
  StepLaw first_, revisit_;
};

// Simple random walk; both contexts symmetric.  The zero-drift control.
class MartingaleKernel : public StepKernel {
 public:
  explicit MartingaleKernel(int d);
  int dim() const override { return d_; }
  Vec sample(const Vec& site, bool first_visit, double u) const override;
  StepLaw law(const Vec& site, bool first_visit) const override;
  bool excitable() const override { return false; }
  std::vector<ContextLaw> context_laws() const override;
  std::string describe() const override;

 private:
  int d_;
  StepLaw law_;
};

// Table-driven kernel over the four (first_visit, in_cookie_set) contexts,
// with optional per-site overrides.  Contexts without a listed law fail
// loudly if the walk ever reaches one.
class GeneralizedKernel : public StepKernel {
 public:
  struct TableEntry {
    bool first_visit = false;
    bool in_cookie_set = false;
    std::vector<StepOutcome> outcomes;
  };
  struct SiteOverride {
    Vec site;
    bool first_visit = false;
    std::vector<StepOutcome> outcomes;
  };

  GeneralizedKernel(int d, Direction dir, CookieSet cookies, const std::vector<TableEntry>& table,
                    const std::vector<SiteOverride>& overrides = {});
  int dim() const override { return d_; }
  Vec sample(const Vec& site, bool first_visit, double u) const override;
  StepLaw law(const Vec& site, bool first_visit) const override;
  std::vector<ContextLaw> context_laws() const override;
  std::string describe() const override;
  const CookieSet& cookies() const { return cookies_; }

 private:
  const StepLaw& lookup(const Vec& site, bool first_visit) const;
  int d_;
  Direction dir_;
  CookieSet cookies_;
  std::optional<StepLaw> laws_[2][2];  // [first_visit][in_cookie_set]
  std::map<std::pair<uint64_t, uint64_t>, std::pair<StepLaw, bool>> overrides_;  // packed+fv -> law, excited
};

// Deterministic probe directions on the unit sphere used to certify uniform
// ellipticity: equal angles for d=2, a Fibonacci lattice for d=3, hashed
// Gaussians above that, always including the 2d signed axes.
std::vector<std::array<double, kMaxDim>> probe_directions(int d, int count);

struct EllipticityCert {
  bool ok = false;
  double h = 0, r = 0;
  std::string detail;
};

struct KernelCertificate {
  int d = 0;
  double jump_bound = 0;           // K
  bool has_excited = false;        // any excited context listed
  double lambda = 0;               // min excited drift along ell
  double max_offdrift = 0;         // worst |drift| component over non-excited laws
  bool zero_drift_ok = false;      // non-excited laws are martingale steps
  bool ballistic_ok = false;       // lambda > 0
  EllipticityCert ellipticity;
  std::vector<std::string> notes;
};

// Computes K, lambda, the zero-drift structure check, and the ellipticity
// certificate from the kernel's listed context laws.  Nothing is trusted
// from configuration; everything is recomputed here.
KernelCertificate certify_kernel(const StepKernel& kernel, const Direction& dir,
                                 int probe_count = 1024);

EllipticityCert certify_condition_E(const std::vector<StepKernel::ContextLaw>& laws,
                                    const Direction& dir, int probe_count);

}  // namespace erwlab
