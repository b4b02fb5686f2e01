#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace erwlab {

// Desk-scale engine limits: lattice dimension up to kMaxDim, coordinates
// within +-(2^20 - 1) so a site packs into 21 bits per axis.
inline constexpr int kMaxDim = 6;
inline constexpr int32_t kCoordLimit = (1 << 20) - 1;

struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Lattice point / displacement with runtime dimension d <= kMaxDim.
struct Vec {
  std::array<int32_t, kMaxDim> c{};
  int d = 0;

  static Vec zero(int dim) {
    Vec v;
    v.d = dim;
    return v;
  }
  static Vec unit(int dim, int axis, int32_t sign = 1) {
    Vec v = zero(dim);
    v.c[static_cast<size_t>(axis)] = sign;
    return v;
  }

  int32_t operator[](int i) const { return c[static_cast<size_t>(i)]; }
  int32_t& operator[](int i) { return c[static_cast<size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < d; ++i) c[static_cast<size_t>(i)] += o.c[static_cast<size_t>(i)];
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < r.d; ++i) r[i] -= b[i];
    return r;
  }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.d != b.d) return false;
    for (int i = 0; i < a.d; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

  double norm2() const {
    double s = 0;
    for (int i = 0; i < d; ++i) s += double(c[static_cast<size_t>(i)]) * c[static_cast<size_t>(i)];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < d; ++i) {
      if (i) s += ",";
      s += std::to_string(c[static_cast<size_t>(i)]);
    }
    return s + ")";
  }
};

// Unit vector ell on S^{d-1}; the direction of excitation.
struct Direction {
  int d = 0;
  std::array<double, kMaxDim> ell{};

  // Normalizes the given components.  Rejects the zero vector and d outside
  // [2, kMaxDim].
  static Direction normalized(std::span<const double> comps) {
    if (comps.size() < 2 || comps.size() > kMaxDim)
      throw ContractError("direction: dimension must be in [2," + std::to_string(kMaxDim) + "]");
    Direction dir;
    dir.d = static_cast<int>(comps.size());
    double n2 = 0;
    for (size_t i = 0; i < comps.size(); ++i) n2 += comps[i] * comps[i];
    if (n2 <= 0) throw ContractError("direction: zero vector");
    double inv = 1.0 / std::sqrt(n2);
    for (size_t i = 0; i < comps.size(); ++i) dir.ell[i] = comps[i] * inv;
    return dir;
  }
  static Direction axis(int dim, int ax) {
    if (dim < 2 || dim > kMaxDim) throw ContractError("direction: bad dimension");
    Direction dir;
    dir.d = dim;
    dir.ell[static_cast<size_t>(ax)] = 1.0;
    return dir;
  }

  double norm() const {
    double n2 = 0;
    for (int i = 0; i < d; ++i) n2 += ell[static_cast<size_t>(i)] * ell[static_cast<size_t>(i)];
    return std::sqrt(n2);
  }
};

// Projection X.ell computed fresh from the coordinates so that the value is a
// function of the lattice point alone, not of the path that reached it.
inline double dot(const Vec& x, const Direction& dir) {
  double s = 0;
  for (int i = 0; i < x.d; ++i) s += x[i] * dir.ell[static_cast<size_t>(i)];
  return s;
}

inline double dot(const Vec& x, std::span<const double> v) {
  double s = 0;
  for (int i = 0; i < x.d; ++i) s += x[i] * v[static_cast<size_t>(i)];
  return s;
}

// 21-bit-per-axis packing of a site into two 64-bit words (3 axes per word).
struct PackedSite {
  uint64_t lo = 0, hi = 0;
  friend bool operator==(const PackedSite&, const PackedSite&) = default;
};

inline PackedSite pack_site(const Vec& x) {
  PackedSite k;
  for (int i = 0; i < x.d; ++i) {
    int32_t c = x[i];
    if (c > kCoordLimit || c < -kCoordLimit)
      throw ContractError("lattice coordinate out of packing range: " + x.str());
    uint64_t u = static_cast<uint64_t>(c + (1 << 20));
    if (i < 3)
      k.lo |= u << (21 * i);
    else
      k.hi |= u << (21 * (i - 3));
  }
  k.lo |= 1ull << 63;  // tag so that the origin does not pack to all-zero
  return k;
}

}  // namespace erwlab
