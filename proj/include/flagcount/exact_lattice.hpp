// Exact integer primitives: integer vectors, primitivization, Plücker
// coordinates, integral quadratic forms and first minima of small lattices.

#ifndef FLAGCOUNT_EXACT_LATTICE_HPP
#define FLAGCOUNT_EXACT_LATTICE_HPP

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flagcount {

using Integer = mpz_class;

/// Exact integer coordinate vector of a point in the ambient space.
class IntVec {
public:
  IntVec() = default;
  explicit IntVec(std::size_t n) : coords_(n, 0) {}
  explicit IntVec(std::vector<Integer> coords) : coords_(std::move(coords)) {}
  IntVec(std::initializer_list<long> coords);

  static IntVec from_int64(std::span<const std::int64_t> coords);

  std::size_t size() const { return coords_.size(); }
  const Integer& operator[](std::size_t i) const { return coords_[i]; }
  Integer& operator[](std::size_t i) { return coords_[i]; }
  auto begin() const { return coords_.begin(); }
  auto end() const { return coords_.end(); }
  const std::vector<Integer>& coords() const { return coords_; }

  bool is_zero() const;
  Integer norm_sq() const;
  IntVec operator-() const;

  /// Coordinates as doubles (exact up to 2^53).
  std::vector<double> to_double() const;
  /// Coordinates as int64; throws std::overflow_error when out of range.
  std::vector<std::int64_t> to_int64() const;

  friend bool operator==(const IntVec& a, const IntVec& b) { return a.coords_ == b.coords_; }
  friend bool operator!=(const IntVec& a, const IntVec& b) { return !(a == b); }
  /// Lexicographic order on coordinate tuples.
  friend bool operator<(const IntVec& a, const IntVec& b);

private:
  std::vector<Integer> coords_;
};

std::ostream& operator<<(std::ostream& os, const IntVec& v);
std::string to_string(const IntVec& v);

/// Row-major integer matrix (rows are vectors).
using IntMatrix = std::vector<IntVec>;

/// gcd of the absolute values of the coordinates; 0 iff v = 0.
Integer content_gcd(const IntVec& v);

/// (v / g, g) with g = content_gcd(v). Rejects the zero vector.
std::pair<IntVec, Integer> primitivize(const IntVec& v);

/// v or -v, whichever has its first nonzero coordinate positive.
IntVec canonical_sign(const IntVec& v);

/// canonical_sign(primitivize(v).first)
IntVec canonical_primitive(const IntVec& v);

/// Column subsets of {0..n-1} of size k in lexicographic order.
std::vector<std::vector<int>> lex_subsets(int n, int k);

/// Exact determinant of a small square integer matrix (fraction-free elimination).
Integer determinant(const IntMatrix& m);

/// All ell x ell minors of an ell x n matrix, indexed by lexicographic column subsets.
IntVec plucker(const IntMatrix& rows);

/// Nonsingular integral symmetric bilinear form with its signature.
class SymForm {
public:
  /// Validates symmetry and nonsingularity; computes the signature exactly.
  explicit SymForm(std::vector<std::vector<Integer>> gram);
  static SymForm diagonal(std::span<const long> entries);

  std::size_t dim() const { return gram_.size(); }
  const Integer& operator()(std::size_t i, std::size_t j) const { return gram_[i][j]; }
  const std::vector<std::vector<Integer>>& gram() const { return gram_; }
  int positive_index() const { return p_; }
  int negative_index() const { return q_; }
  const Integer& det() const { return det_; }
  bool is_diagonal() const;
  /// Diagonal with every entry +1 or -1.
  bool is_unit_diagonal() const;

  friend bool operator==(const SymForm& a, const SymForm& b) { return a.gram_ == b.gram_; }

private:
  std::vector<std::vector<Integer>> gram_;
  Integer det_;
  int p_ = 0;
  int q_ = 0;
};

/// v^T gram v, exactly.
Integer eval_form(const SymForm& q, const IntVec& v);

/// Lattice basis in the plane; columns of the matrix {a, b}.
struct Basis2 {
  std::array<double, 2> a;
  std::array<double, 2> b;

  double det() const { return a[0] * b[1] - a[1] * b[0]; }
};

/// Lagrange–Gauss reduction of a planar basis. After return, |a| <= |b| and
/// |<a,b>| <= |a|^2 / 2 (up to the relative tolerance).
template <class Real>
void gauss_reduce(std::array<Real, 2>& a, std::array<Real, 2>& b) {
  using std::floor;
  auto dot = [](const std::array<Real, 2>& u, const std::array<Real, 2>& v) {
    return u[0] * v[0] + u[1] * v[1];
  };
  const Real shrink = Real(1) - Real(1e-12);
  Real na = dot(a, a);
  Real nb = dot(b, b);
  if (nb < na) {
    std::swap(a, b);
    std::swap(na, nb);
  }
  for (int iter = 0; iter < 10000; ++iter) {
    Real mu = dot(a, b) / na;
    Real m = mu < 0 ? -floor(-mu + Real(0.5)) : floor(mu + Real(0.5));
    if (m != 0) {
      b[0] -= m * a[0];
      b[1] -= m * a[1];
      nb = dot(b, b);
    }
    if (!(nb < na * shrink)) break;
    std::swap(a, b);
    std::swap(na, nb);
  }
}

/// Length of the shortest nonzero vector of the planar lattice spanned by basis.
double first_minimum(const Basis2& basis);

/// Length of the shortest nonzero vector of the lattice spanned by the rows of
/// basis (1 <= rank <= 4, rows of equal length). Dimension 2 uses
/// Lagrange–Gauss, dimensions 3–4 an exhaustive search in the coefficient box
/// cut out by the inverse Gram matrix.
double first_minimum(const std::vector<std::vector<double>>& basis);

}  // namespace flagcount

#endif
