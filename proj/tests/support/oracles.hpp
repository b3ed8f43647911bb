// Independent reference implementations used by the tests. Everything here is
// deliberately naive: full boxes, no pruning, no shared kernels.

#ifndef FLAGCOUNT_TESTS_ORACLES_HPP
#define FLAGCOUNT_TESTS_ORACLES_HPP

#include "flagcount/counting.hpp"
#include "flagcount/enumeration.hpp"
#include "flagcount/exact_lattice.hpp"
#include "flagcount/variety.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using flagcount::IntVec;
using Rep = std::vector<long>;
using RepSet = std::set<Rep>;

/// Canonical primitive v in [-B, B]^n with pred(v) and |v|^2 < limit.
template <class Pred>
RepSet box_points(int n, long B, long limit, Pred&& pred) {
  RepSet out;
  Rep v(n, -B);
  while (true) {
    long s = 0, g = 0;
    for (long c : v) {
      s += c * c;
      g = std::gcd(g, c < 0 ? -c : c);
    }
    if (s > 0 && s < limit && g == 1) {
      int first = 0;
      while (v[first] == 0) ++first;
      if (v[first] > 0 && pred(v)) out.insert(v);
    }
    int k = 0;
    while (k < n && v[k] == B) v[k++] = -B;
    if (k == n) break;
    ++v[k];
  }
  return out;
}

/// ceil(T^2) for a double T, computed with exact rationals, so that
/// n < limit_of(T) iff sqrt(n) < T.
inline long limit_of(double T) {
  const mpq_class t2 = mpq_class(T) * mpq_class(T);
  mpz_class q = t2.get_num() / t2.get_den();
  if (q * t2.get_den() != t2.get_num()) q += 1;
  return q.get_si();
}

inline RepSet projective(int n, double T) {
  const long B = static_cast<long>(T) + 1;
  return box_points(n, B, limit_of(T), [](const Rep&) { return true; });
}

inline RepSet quadric_diag(const std::vector<long>& diag, double T) {
  const long B = static_cast<long>(T) + 1;
  return box_points(static_cast<int>(diag.size()), B, limit_of(T), [&](const Rep& v) {
    long q = 0;
    for (std::size_t i = 0; i < v.size(); ++i) q += diag[i] * v[i] * v[i];
    return q == 0;
  });
}

/// Gr(2,4) by all pairs of primitive vectors with entries in [-B, B] (taken
/// up to sign): 2x2 minors, primitivized, first-nonzero-positive,
/// deduplicated. The content g of the minors divides every nonzero minor, so
/// a pair whose squared minor norm is at least limit * m^2 (m the smallest
/// nonzero minor) cannot produce a point and is skipped before the gcd.
inline RepSet grassmannian_2_4_pairs(double T, long B = 8) {
  std::vector<std::array<long, 4>> vecs;
  std::array<long, 4> v{-B, -B, -B, -B};
  while (true) {
    long g = 0;
    for (long c : v) g = std::gcd(g, c < 0 ? -c : c);
    int first = 0;
    while (first < 4 && v[first] == 0) ++first;
    if (g == 1 && v[first] > 0) vecs.push_back(v);
    int k = 0;
    while (k < 4 && v[k] == B) v[k++] = -B;
    if (k == 4) break;
    ++v[k];
  }
  const long limit = limit_of(T);
  RepSet out;
  for (std::size_t a = 0; a < vecs.size(); ++a) {
    const auto& x = vecs[a];
    for (std::size_t b = a + 1; b < vecs.size(); ++b) {
      const auto& y = vecs[b];
      long p[6] = {x[0] * y[1] - x[1] * y[0], x[0] * y[2] - x[2] * y[0], x[0] * y[3] - x[3] * y[0],
                   x[1] * y[2] - x[2] * y[1], x[1] * y[3] - x[3] * y[1], x[2] * y[3] - x[3] * y[2]};
      long s = 0, m = 0;
      for (long c : p) {
        s += c * c;
        const long ac = c < 0 ? -c : c;
        if (ac != 0 && (m == 0 || ac < m)) m = ac;
      }
      if (s == 0 || s >= limit * m * m) continue;
      long g = 0;
      for (long c : p) g = std::gcd(g, c < 0 ? -c : c);
      s = 0;
      for (long& c : p) {
        c /= g;
        s += c * c;
      }
      if (s >= limit) continue;
      int first = 0;
      while (p[first] == 0) ++first;
      const long sign = p[first] < 0 ? -1 : 1;
      Rep r;
      for (long c : p) r.push_back(sign * c);
      out.insert(r);
    }
  }
  return out;
}

inline RepSet to_set(const flagcount::PointSet& pts) {
  RepSet out;
  for (const auto& p : pts.points()) {
    Rep r;
    for (const auto& c : p.rep) r.push_back(c.get_si());
    out.insert(r);
  }
  return out;
}

/// Brute-force N_psi: the angle is computed with arccos on normalized
/// vectors, a different formula from the library's.
inline std::uint64_t count_psi_arccos(const std::vector<double>& x, const RepSet& pts, double c, double tau, double T) {
  std::uint64_t n = 0;
  for (const Rep& r : pts) {
    double s = 0, dot = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      s += static_cast<double>(r[i]) * r[i];
      dot += x[i] * r[i];
    }
    const double h = std::sqrt(s);
    if (!(h < T)) continue;
    const double ang = std::acos(std::min(1.0, std::abs(dot) / h));
    if (ang < c * std::pow(h, -tau)) ++n;
  }
  return n;
}

/// Random integer matrix with determinant +-1 (product of elementary moves).
inline std::vector<std::vector<long>> random_unimodular(int k, std::mt19937_64& rng, int moves = 6) {
  std::vector<std::vector<long>> u(k, std::vector<long>(k, 0));
  for (int i = 0; i < k; ++i) u[i][i] = 1;
  if (k == 1) {
    u[0][0] = (rng() & 1) ? 1 : -1;
    return u;
  }
  std::uniform_int_distribution<int> row(0, k - 1), mult(-2, 2);
  for (int m = 0; m < moves; ++m) {
    int i = row(rng), j = row(rng);
    if (i == j) continue;
    const long f = mult(rng);
    for (int c = 0; c < k; ++c) u[i][c] += f * u[j][c];
    if (rng() % 4 == 0) std::swap(u[i], u[j]);
  }
  return u;
}

}  // namespace oracle

#endif
