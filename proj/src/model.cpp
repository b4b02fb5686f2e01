#include "erwlab/model.hpp"

#include <algorithm>
#include <cmath>

#include "erwlab/rng.hpp"
#include "erwlab/stats.hpp"

namespace erwlab {

double StepLaw::tail_prob(std::span<const double> ell, double r) const {
  double s = 0;
  for (const auto& o : outcomes)
    if (dot(o.dz, ell) > r) s += o.p;
  return s;
}

double StepLaw::max_jump() const {
  double k = 0;
  for (const auto& o : outcomes) k = std::max(k, o.dz.norm());
  return k;
}

StepLaw make_law(std::vector<StepOutcome> outcomes, int d) {
  if (outcomes.empty()) throw ConfigError("step law: no outcomes");
  if (d < 1 || d > kMaxDim) throw ConfigError("step law: bad dimension");
  for (const auto& o : outcomes) {
    if (o.dz.d != d) throw ConfigError("step law: outcome dimension mismatch");
    if (o.p < 0) throw ConfigError("step law: negative probability");
  }

  auto lex_less = [d](const Vec& a, const Vec& b) {
    for (int i = 0; i < d; ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  };
  std::sort(outcomes.begin(), outcomes.end(),
            [&](const StepOutcome& a, const StepOutcome& b) { return lex_less(a.dz, b.dz); });

  StepLaw law;
  law.d = d;
  for (const auto& o : outcomes) {
    if (o.p == 0) continue;
    if (!law.outcomes.empty() && law.outcomes.back().dz == o.dz)
      law.outcomes.back().p += o.p;
    else
      law.outcomes.push_back(o);
  }
  if (law.outcomes.empty()) throw ConfigError("step law: all outcomes have zero probability");

  // total accumulated in canonical order so that site-dependent kernels can
  // reproduce the same cumulative boundaries without materializing a law
  double total = 0;
  for (const auto& o : law.outcomes) total += o.p;
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("step law: probabilities sum to " + std::to_string(total));

  double acc = 0;
  for (const auto& o : law.outcomes) {
    acc += o.p;
    law.cum.push_back(acc / total);
    for (int i = 0; i < d; ++i) law.drift[static_cast<size_t>(i)] += o.p / total * o.dz[i];
  }
  law.cum.back() = 1.0;
  return law;
}

StepLaw symmetric_nn_law(int d) {
  std::vector<StepOutcome> out;
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1}) out.push_back({Vec::unit(d, i, s), 1.0 / (2 * d)});
  return make_law(std::move(out), d);
}

StepLaw excited_nn_law(int d, double p, int axis) {
  if (p < 0 || p > 1) throw ConfigError("excited law: p outside [0,1]");
  if (axis < 0 || axis >= d) throw ConfigError("excited law: bad axis");
  std::vector<StepOutcome> out;
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1}) {
      double q = 1.0 / (2 * d);
      if (i == axis) q = (s > 0 ? p : 1 - p) / d;
      out.push_back({Vec::unit(d, i, s), q});
    }
  return make_law(std::move(out), d);
}

bool CookieSet::contains(const Vec& x, const Direction& dir) const {
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::Empty:
      return false;
    case Kind::Halfspace:
      return dot(x, dir) > 0;
    case Kind::NotBox:
      for (int i = 0; i < x.d; ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return true;
      return false;
  }
  return false;
}

std::string CookieSet::str() const {
  switch (kind) {
    case Kind::All:
      return "all";
    case Kind::Empty:
      return "empty";
    case Kind::Halfspace:
      return "halfspace";
    case Kind::NotBox:
      return "not_box" + lo.str() + hi.str();
  }
  return "?";
}

StandardErwKernel::StandardErwKernel(int d, double p) : d_(d), p_(p) {
  if (d < 2 || d > kMaxDim) throw ConfigError("kernel: dimension outside [2," + std::to_string(kMaxDim) + "]");
  first_ = excited_nn_law(d, p);
  revisit_ = symmetric_nn_law(d);
}

Vec StandardErwKernel::sample(const Vec&, bool first_visit, double u) const {
  return (first_visit ? first_ : revisit_).pick(u).dz;
}

StepLaw StandardErwKernel::law(const Vec&, bool first_visit) const {
  return first_visit ? first_ : revisit_;
}

std::vector<StepKernel::ContextLaw> StandardErwKernel::context_laws() const {
  return {{first_, true, "first visit"}, {revisit_, false, "revisit"}};
}

std::string StandardErwKernel::describe() const {
  return "excited-nn d=" + std::to_string(d_) + " p=" + std::to_string(p_);
}

MartingaleKernel::MartingaleKernel(int d) : d_(d) {
  if (d < 2 || d > kMaxDim) throw ConfigError("kernel: dimension outside [2," + std::to_string(kMaxDim) + "]");
  law_ = symmetric_nn_law(d);
}

Vec MartingaleKernel::sample(const Vec&, bool, double u) const { return law_.pick(u).dz; }

StepLaw MartingaleKernel::law(const Vec&, bool) const { return law_; }

std::vector<StepKernel::ContextLaw> MartingaleKernel::context_laws() const {
  return {{law_, false, "any"}};
}

std::string MartingaleKernel::describe() const { return "symmetric-nn d=" + std::to_string(d_); }

GeneralizedKernel::GeneralizedKernel(int d, Direction dir, CookieSet cookies,
                                     const std::vector<TableEntry>& table,
                                     const std::vector<SiteOverride>& overrides)
    : d_(d), dir_(dir), cookies_(cookies) {
  if (d < 2 || d > kMaxDim) throw ConfigError("kernel: dimension outside [2," + std::to_string(kMaxDim) + "]");
  if (dir.d != d) throw ConfigError("kernel: direction dimension mismatch");
  if (table.empty()) throw ConfigError("generalized kernel: empty law table");
  for (const auto& e : table) {
    auto& slot = laws_[e.first_visit ? 1 : 0][e.in_cookie_set ? 1 : 0];
    if (slot)
      throw ConfigError("generalized kernel: duplicate context first_visit=" +
                        std::to_string(e.first_visit) +
                        " in_cookie_set=" + std::to_string(e.in_cookie_set));
    slot = make_law(e.outcomes, d);
  }
  for (const auto& o : overrides) {
    PackedSite k = pack_site(o.site);
    auto key = std::make_pair(k.lo, (k.hi << 1) | (o.first_visit ? 1u : 0u));
    if (overrides_.count(key))
      throw ConfigError("generalized kernel: duplicate site override at " + o.site.str());
    bool excited = o.first_visit && cookies_.contains(o.site, dir_);
    overrides_.emplace(key, std::make_pair(make_law(o.outcomes, d), excited));
  }
}

const StepLaw& GeneralizedKernel::lookup(const Vec& site, bool first_visit) const {
  if (!overrides_.empty()) {
    PackedSite k = pack_site(site);
    auto it = overrides_.find(std::make_pair(k.lo, (k.hi << 1) | (first_visit ? 1u : 0u)));
    if (it != overrides_.end()) return it->second.first;
  }
  bool in_cookie = cookies_.contains(site, dir_);
  const auto& slot = laws_[first_visit ? 1 : 0][in_cookie ? 1 : 0];
  if (!slot)
    throw ValidationError("generalized kernel: walk reached a context with no listed law: "
                          "first_visit=" +
                          std::to_string(first_visit) + " in_cookie_set=" + std::to_string(in_cookie) +
                          " site=" + site.str());
  return *slot;
}

Vec GeneralizedKernel::sample(const Vec& site, bool first_visit, double u) const {
  return lookup(site, first_visit).pick(u).dz;
}

StepLaw GeneralizedKernel::law(const Vec& site, bool first_visit) const {
  return lookup(site, first_visit);
}

std::vector<StepKernel::ContextLaw> GeneralizedKernel::context_laws() const {
  std::vector<ContextLaw> out;
  for (int fv = 0; fv < 2; ++fv)
    for (int ck = 0; ck < 2; ++ck)
      if (laws_[fv][ck])
        out.push_back({*laws_[fv][ck], fv == 1 && ck == 1,
                       "first_visit=" + std::to_string(fv) + ",in_cookie_set=" + std::to_string(ck)});
  for (const auto& [key, val] : overrides_)
    out.push_back({val.first, val.second, "site override"});
  return out;
}

std::string GeneralizedKernel::describe() const {
  return "generalized d=" + std::to_string(d_) + " cookies=" + cookies_.str();
}

std::vector<std::array<double, kMaxDim>> probe_directions(int d, int count) {
  if (d < 2 || d > kMaxDim) throw ConfigError("probe_directions: bad dimension");
  if (count < 1) throw ConfigError("probe_directions: bad count");
  std::vector<std::array<double, kMaxDim>> dirs;
  dirs.reserve(static_cast<size_t>(count + 2 * d));
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      double th = 2 * M_PI * k / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else if (d == 3) {
    const double ga = M_PI * (3 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      double z = 1 - 2 * (k + 0.5) / count;
      double r = std::sqrt(std::max(0.0, 1 - z * z));
      dirs.push_back({r * std::cos(ga * k), r * std::sin(ga * k), z});
    }
  } else {
    for (int k = 0; k < count; ++k) {
      CounterRng rng(0x50524f4245ull, static_cast<uint64_t>(k));
      std::array<double, kMaxDim> v{};
      double n2 = 0;
      for (int i = 0; i < d; ++i) {
        double u = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
        v[static_cast<size_t>(i)] = stats::normal_quantile(u);
        n2 += v[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
      }
      if (n2 < 1e-16) continue;
      double inv = 1 / std::sqrt(n2);
      for (int i = 0; i < d; ++i) v[static_cast<size_t>(i)] *= inv;
      dirs.push_back(v);
    }
  }
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1}) {
      std::array<double, kMaxDim> v{};
      v[static_cast<size_t>(i)] = s;
      dirs.push_back(v);
    }
  return dirs;
}

EllipticityCert certify_condition_E(const std::vector<StepKernel::ContextLaw>& laws,
                                    const Direction& dir, int probe_count) {
  EllipticityCert cert;
  if (laws.empty()) {
    cert.detail = "no context laws";
    return cert;
  }
  int d = laws.front().law.d;
  double K = 0;
  for (const auto& cl : laws) K = std::max(K, cl.law.max_jump());
  if (K <= 0) {
    cert.detail = "degenerate kernel: no displacement";
    return cert;
  }
  std::span<const double> ell(dir.ell.data(), static_cast<size_t>(d));
  auto probes = probe_directions(d, probe_count);

  int grid = static_cast<int>(std::ceil(4 * K * K));
  for (int j = 1; j <= grid; ++j) {
    double r = j / (4 * K);
    double h = 1;
    for (const auto& cl : laws) h = std::min(h, cl.law.tail_prob(ell, r));
    for (const auto& cl : laws) {
      if (!cl.law.zero_drift()) continue;
      for (const auto& pd : probes) {
        std::span<const double> lp(pd.data(), static_cast<size_t>(d));
        h = std::min(h, cl.law.tail_prob(lp, r));
      }
    }
    if (h > cert.h || (h == cert.h && r > cert.r && h > 0)) {
      cert.h = h;
      cert.r = r;
    }
  }
  cert.ok = cert.h > 0;
  cert.detail = cert.ok ? "h=" + std::to_string(cert.h) + " at r=" + std::to_string(cert.r) +
                              " with " + std::to_string(probes.size()) + " probe directions"
                        : "no (h,r) with h>0 on the certification grid";
  return cert;
}

KernelCertificate certify_kernel(const StepKernel& kernel, const Direction& dir, int probe_count) {
  if (kernel.dim() != dir.d) throw ConfigError("certify: direction dimension mismatch");
  KernelCertificate c;
  c.d = kernel.dim();
  auto laws = kernel.context_laws();
  bool first_excited = true;
  for (const auto& cl : laws) {
    c.jump_bound = std::max(c.jump_bound, cl.law.max_jump());
    if (cl.excited) {
      c.has_excited = true;
      double lam = cl.law.drift_dot(dir);
      c.lambda = first_excited ? lam : std::min(c.lambda, lam);
      first_excited = false;
    } else {
      for (int i = 0; i < c.d; ++i)
        c.max_offdrift = std::max(c.max_offdrift, std::abs(cl.law.drift[static_cast<size_t>(i)]));
    }
  }
  c.zero_drift_ok = c.max_offdrift <= kZeroDriftTol;
  c.ballistic_ok = c.has_excited && c.lambda > 0;
  c.ellipticity = certify_condition_E(laws, dir, probe_count);
  if (!c.has_excited) c.notes.push_back("kernel lists no excited context; drift bound not applicable");
  if (!c.zero_drift_ok)
    c.notes.push_back("a non-excited law has drift " + std::to_string(c.max_offdrift));
  return c;
}

}  // namespace erwlab
