// SL2 toy model of the counting argument: the frame change k_x, the diagonal
// flow a_y, first minima along the flow, the regions E_T, F_T, E+_{T,c}, F_c,
// the sandwich inclusions, and Birkhoff averages of F_c.
//
// Throughout, x0 = [e1], beta = 2, the positive cone is v1 > 0,
// u(v) = v2 / v1 and |v+| = |v1|.

#ifndef FLAGCOUNT_FLOW_HPP
#define FLAGCOUNT_FLOW_HPP

#include "flagcount/counting.hpp"
#include "flagcount/exact_lattice.hpp"
#include "flagcount/variety.hpp"

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace flagcount {

using Vec2 = std::array<double, 2>;
/// Row-major 2x2 matrix: m[row][col].
using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 operator*(const Mat2& a, const Mat2& b);
Vec2 operator*(const Mat2& m, const Vec2& v);
double det(const Mat2& m);
Mat2 inverse(const Mat2& m);
Mat2 transpose(const Mat2& m);

struct FlowSpec {
  double tau = 2;
  double T = 1;
  double y_T = 1;

  /// Requires 0 < tau <= 2 and T > 0; y_T = T^tau.
  FlowSpec(double tau, double T);
};

/// Rotation k_x with k_x e1 on the line x; the angle is taken in [0, pi).
Mat2 rotation_section(const SurfacePoint& x);

/// a_y = diag(y^(-1/2), y^(1/2)).
Mat2 diag_flow(double y);

/// The lattice g Z^2; the columns of `basis` are g e1 and g e2.
class Lattice2 {
public:
  /// Throws std::invalid_argument unless |det| = 1 within 1e-9.
  explicit Lattice2(const Mat2& basis);
  const Mat2& basis() const { return basis_; }
  /// Lagrange–Gauss in 113-bit floating point, so the strongly sheared
  /// lattices of the flow keep full double accuracy.
  double first_minimum() const;

private:
  Mat2 basis_;
};

struct Lambda1Row {
  double T = 0;
  double lambda1 = 0;
  double stat = 0;  // log(1 / lambda1) / log T; NaN at T = 1
};

/// lambda1(a_{T^tau} k_x^{-1} Z^2) along the ladder.
std::vector<Lambda1Row> lambda1_track(const SurfacePoint& x, std::span<const double> ladder, double tau);

enum class RegionKind { E_T, F_T, E_plus, F_c, F_infl_minus, F_infl_plus, B_T };

/// Parses "E_T", "F_T", "E_plus", "F_c", "F_infl-", "F_infl+", "B_T".
RegionKind parse_region(std::string_view name);

struct RegionParams {
  double T = 2;
  double c = 1;
  double delta = 0;
  ApproxFunction psi{1.0, 2.0};
  double tau = 2;  // y_T = T^tau for B_T
};

/// Exact where the region is semi-algebraic (u-coordinate regions and all
/// norm windows); the angle test against psi is a floating-point comparison.
/// u-coordinate regions treat v1 <= 0 as outside.
bool region_membership(const IntVec& v, RegionKind kind, const RegionParams& params);
bool region_membership(const std::array<mpq_class, 2>& v, RegionKind kind, const RegionParams& params);
bool region_membership(const Vec2& v, RegionKind kind, const RegionParams& params);

/// u(v) = v2 / v1; v1 must be nonzero.
template <class Scalar>
Scalar u_coordinate(const std::array<Scalar, 2>& v) {
  return v[1] / v[0];
}

/// a_y v with y = s^2, so the flow stays in the scalar's field.
template <class Scalar>
std::array<Scalar, 2> apply_flow_sqrt(const Scalar& s, const std::array<Scalar, 2>& v) {
  return {v[0] / s, v[1] * s};
}

struct TessellationReport {
  int N = 0;
  double T = 0;  // 2^N / c
  std::size_t checked = 0;
  std::size_t in_region = 0;
  std::size_t mismatches = 0;
  std::vector<std::size_t> window_counts;  // points in a_{y_j}^{-1} F_c, j < N
};

/// Checks E+_{T,c} = disjoint union of a_{y_j}^{-1} F_c (j < N, cT = 2^N) on
/// every primitive v in Z^2 with |v| <= radius, in exact rational arithmetic.
/// A point counts as a mismatch unless it lies in exactly one window when it
/// is in E+_{T,c} and in none otherwise.
TessellationReport tessellation_check(double c, int N, double radius);

/// c_ell = (1 + C0 / ell)^(-6).
double sandwich_c(int ell, double C0);

struct SandwichConfig {
  int ell = 100;
  double T = 1024;
  double C0 = 8;
  std::size_t perturbations = 16;      // random p per run
  std::size_t lattice_points = 100000; // rotated-lattice points in the test window
  std::uint64_t seed = 1;
};

struct SandwichWitness {
  int inclusion = 0;  // 1: E+_{T,c} \ Q_2l -> p(E_T \ Q_l); 2: p(E_T \ Q_l) -> E+_{T,1/c}
  Mat2 p{};
  Vec2 v{};
  Vec2 image{};
};

struct SandwichReport {
  double c_ell = 0;
  std::size_t points = 0;
  std::size_t inner_checked = 0;
  std::size_t outer_checked = 0;
  std::size_t violations = 0;
  std::vector<SandwichWitness> witnesses;  // at most 32
};

/// Samples p = [[a, b], [0, 1/a]] with |log a|, |b| < 1/ell and checks both
/// inclusions on points of Z^2 and of randomly rotated copies of Z^2 in the
/// window 1 <= v1 <= 2T, |v2| <= 2.
SandwichReport sandwich_check(const SandwichConfig& config);

struct BirkhoffResult {
  std::vector<std::uint64_t> values;  // F_c(a_{y_j} p k_x^{-1} Z^2), j = 0..N-1
  std::vector<double> averages;       // (1/n) sum_{j<n} values[j], n = 1..N
};

/// Requires 0 < c <= 2 and 1 <= N <= 32.
BirkhoffResult birkhoff_average(double c, const SurfacePoint& x, const Mat2& p, int N);

/// #(g Z^2_pr in F_c) for a nondegenerate g (columns g e1, g e2), computed
/// in 113-bit precision.
std::uint64_t count_F_c(const Mat2& g, double c);

}  // namespace flagcount

#endif
