// Complete enumeration of rational points of bounded height, dyadic shells,
// and the on-disk point cache.

#ifndef FLAGCOUNT_ENUMERATION_HPP
#define FLAGCOUNT_ENUMERATION_HPP

#include "flagcount/variety.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagcount {

/// Smallest integer L with (n < L  <=>  sqrt(n) < T) for every integer n >= 0,
/// i.e. ceil(T^2), computed exactly from the binary value of T.
Integer norm_sq_limit(double T);

/// Canonical primitive cone points of height below a bound, sorted by
/// (height, lexicographic representative). Immutable once built.
class PointSet {
public:
  /// Sorts and validates the points (throws std::invalid_argument on any
  /// invariant violation, including duplicates).
  PointSet(VarietyModel model, double bound, std::vector<RationalPoint> points);

  const VarietyModel& model() const { return model_; }
  double bound() const { return bound_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<RationalPoint>& points() const { return points_; }
  const RationalPoint& operator[](std::size_t i) const { return points_[i]; }

  /// Coordinates of the representative of point i as doubles (exact, since
  /// heights stay far below 2^26).
  std::span<const double> coords(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(model_.ambient_dim()),
            static_cast<std::size_t>(model_.ambient_dim())};
  }

  /// Number of points with height < T (exact comparison); the first that many
  /// points are exactly those.
  std::size_t count_below(double T) const;

  bool contains(const IntVec& canonical_rep) const;

  /// The sub-list of points with height < T.
  PointSet restrict_to(double T) const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.model_ == b.model_ && a.bound_ == b.bound_ && a.same_points(b);
  }

private:
  bool same_points(const PointSet& other) const;

  VarietyModel model_;
  double bound_;
  std::vector<RationalPoint> points_;
  std::vector<double> coords_;
};

struct EnumerationOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned workers = 0;
  /// Refuse runs whose projected candidate count exceeds this.
  double max_candidates = 1e9;
};

/// All canonical primitive v in Z^n with |v| < T (points of P^(n-1)).
PointSet enumerate_projective(int n, double T, const EnumerationOptions& opt = {});

/// All canonical primitive v with Q(v) = 0 and 0 < |v| < T.
PointSet enumerate_quadric(const SymForm& form, double T, const EnumerationOptions& opt = {});

/// All rational ell-subspaces of Q^n with Plücker height < T.
PointSet enumerate_grassmannian(int ell, int n, double T, const EnumerationOptions& opt = {});

/// Dispatches on the model kind.
PointSet enumerate_points(const VarietyModel& model, double T, const EnumerationOptions& opt = {});

/// Dyadic levels T_j = T / 2^j, j = 0, 1, ..., kept while T_j > 1. Shell j
/// is the height window [max(1, T_(j+1)), T_j).
struct ShellSpec {
  double T = 0;
  std::vector<double> levels;

  std::size_t shell_count() const { return levels.size(); }
  double lower(std::size_t j) const;
  double upper(std::size_t j) const { return levels.at(j); }
};

ShellSpec shells(double T);

/// Index of the shell containing a point with the given exact squared height.
/// Throws std::out_of_range for heights outside [1, T).
std::size_t shell_of(const ShellSpec& spec, const Integer& norm_sq);
std::size_t shell_of(const ShellSpec& spec, const RationalPoint& point);

/// Error raised by cache_load; `kind` distinguishes the failure modes.
class CacheError : public std::runtime_error {
public:
  enum class Kind { io, corrupt, model_mismatch, bound_mismatch };
  CacheError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

inline constexpr int kCacheFormatVersion = 1;

void cache_store(const PointSet& set, const std::filesystem::path& path);
PointSet cache_load(const VarietyModel& model, double T, const std::filesystem::path& path);

/// File name used by the harness for a (model, T) cache entry.
std::string cache_file_name(const VarietyModel& model, double T);

}  // namespace flagcount

#endif
