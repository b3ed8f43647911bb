// Concrete rank-one flag varieties: the projective line, rational quadric
// hypersurfaces and Grassmannians, each in a fixed projective embedding.

#ifndef FLAGCOUNT_VARIETY_HPP
#define FLAGCOUNT_VARIETY_HPP

#include "flagcount/exact_lattice.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flagcount {

enum class VarietyKind { ProjectiveLine, Quadric, Grassmannian };

/// Real representative of a point of X: a unit vector in the ambient space
/// (a normalized decomposable Plücker vector for Grassmannians).
struct SurfacePoint {
  std::vector<double> unit;
};

/// Immutable description of X together with its embedding V.
///
/// d is the real dimension of X, beta the Diophantine exponent, and
/// ambient_dim the dimension of V. Heights are Euclidean norms of primitive
/// integer vectors in V.
class VarietyModel {
public:
  static VarietyModel projective_line();
  /// Rejects forms that are definite over R (no real zeros) and forms in
  /// fewer than three variables.
  static VarietyModel quadric(SymForm form);
  static VarietyModel grassmannian(int ell, int n);

  /// Parses `projline`, `quadric:sphere:<n>`, `quadric:diag:<signs>`,
  /// `quadric:gram:<r0>;<r1>;...` (comma separated rows) and
  /// `grassmannian:<ell>:<n>`. Throws std::invalid_argument.
  static VarietyModel parse(std::string_view spec);

  VarietyKind kind() const { return kind_; }
  int dim() const { return d_; }
  /// beta as an exact fraction (numerator, denominator).
  std::pair<long, long> beta_fraction() const { return beta_; }
  double beta() const { return static_cast<double>(beta_.first) / static_cast<double>(beta_.second); }
  int ambient_dim() const { return ambient_; }
  int ell() const { return ell_; }
  int n() const { return n_; }
  const SymForm& form() const;

  /// Canonical descriptor; parse(descriptor()) reproduces the model.
  std::string descriptor() const;

  /// Lines (Grassmannian with ell = 1, or the projective line): X is a full
  /// projective space and every primitive vector is a point.
  bool is_projective_space() const;

  /// Whether sample_sigma supports this model.
  bool samplable() const;

  /// The base point x0 = [e_chi].
  SurfacePoint base_point() const;

  /// Riemannian volume of X for the metric induced by the ambient projective
  /// angle; sigma_X is this volume measure divided by total_volume().
  double total_volume() const;

  friend bool operator==(const VarietyModel& a, const VarietyModel& b);

private:
  VarietyModel() = default;

  VarietyKind kind_ = VarietyKind::ProjectiveLine;
  int d_ = 1;
  std::pair<long, long> beta_{2, 1};
  int ambient_ = 2;
  int ell_ = 1;
  int n_ = 2;
  std::optional<SymForm> form_;
};

/// Rational point of X: canonical primitive representative and cached height.
struct RationalPoint {
  IntVec rep;
  Integer norm_sq;
  double height = 0;
};

/// Exact cone membership: Q(v) = 0 for quadrics, the quadratic Plücker
/// relations for Grassmannians, always true for projective spaces.
bool on_cone(const VarietyModel& model, const IntVec& v);

/// Evaluates every quadratic Plücker relation of Gr(ell, n) on p; true iff all vanish.
bool plucker_relations_hold(const IntVec& p, int ell, int n);
/// Largest absolute residual of the quadratic Plücker relations on a real vector.
double plucker_residual(std::span<const double> p, int ell, int n);

/// Canonical rational point of [v]. Throws on v = 0 or v off the cone.
RationalPoint make_rational_point(const VarietyModel& model, const IntVec& v);

/// Height H([v]) = norm of the canonical primitive representative.
double height(const VarietyModel& model, const IntVec& v);

/// Projective angle between the lines through x and y, in [0, pi/2]. Neither
/// vector needs to be normalized. Evaluated as atan2(|x ^ y|, |<x, y>|), which
/// equals arccos(|<x, y>|) for unit vectors but keeps full relative accuracy
/// for tiny angles.
double projective_angle(std::span<const double> x, std::span<const double> y);

/// distance between two points of the same model.
double distance(const VarietyModel& model, const SurfacePoint& x, const SurfacePoint& y);

/// Checks the SurfacePoint invariants (unit norm, cone membership).
bool is_valid_point(const VarietyModel& model, const SurfacePoint& x, double tol = 1e-9);

/// Splittable generator: sample i of a run seeded with base_seed uses seed base_seed + i.
using Rng = std::mt19937_64;
Rng make_rng(std::uint64_t base_seed, std::uint64_t index = 0);

/// One draw from the K-invariant probability measure sigma_X.
SurfacePoint sample_sigma(const VarietyModel& model, Rng& rng);

/// Independent Grassmannian sampler: first ell rows of a Haar orthogonal
/// matrix (QR of a Gaussian matrix with the signs of R's diagonal fixed).
SurfacePoint sample_grassmannian_haar(int ell, int n, Rng& rng);

/// Unit-norm Plücker vector of the row span of a real ell x n matrix.
std::vector<double> plucker_unit(const std::vector<std::vector<double>>& rows);

/// Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1).
double unit_ball_volume(int d);

enum class VolumeMode { asymptotic, monte_carlo };

struct VolumeEstimate {
  double value = 0;
  double std_error = 0;
};

/// Distances from x0 of `count` independent sigma_X draws from one stream
/// seeded with base_seed.
std::vector<double> sample_base_distances(const VarietyModel& model, std::size_t count, std::uint64_t base_seed);

struct WeightedDistance {
  double distance = 0;
  double weight = 0;
};

/// Draws concentrated near x0: for every f vanishing on [R, pi/2], the mean
/// of weight * f(distance) is an unbiased estimate of the integral of
/// f(d(x0, x)) against the volume measure. Grassmannians sample a Frobenius
/// ball in the affine chart [I | A], where the volume density is
/// det(I + A A^T)^(-n/2); quadrics sample a spherical cap in each factor.
/// Requires 0 < R <= pi/4.
std::vector<WeightedDistance> sample_near_base(const VarietyModel& model, double R, std::size_t count,
                                               std::uint64_t seed);

/// Volume of the metric ball B_X(r) around x0. asymptotic: kappa1 r^d.
/// monte_carlo: total_volume() times the fraction of sigma_X draws within r.
VolumeEstimate ball_volume(const VarietyModel& model, double r, VolumeMode mode, std::size_t samples = 1u << 20,
                           std::uint64_t seed = 1);

/// Monte Carlo ball volumes for several radii from one shared sample.
std::vector<VolumeEstimate> ball_volumes_mc(const VarietyModel& model, std::span<const double> radii,
                                            std::size_t samples, std::uint64_t seed);

}  // namespace flagcount

#endif
