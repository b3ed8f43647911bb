// Counting functions N_psi(x, T) and N(x, r, T), the volume normalizer, and the
// Khintchine / equidistribution experiments built on them.

#ifndef FLAGCOUNT_COUNTING_HPP
#define FLAGCOUNT_COUNTING_HPP

#include "flagcount/enumeration.hpp"
#include "flagcount/stats.hpp"
#include "flagcount/variety.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace flagcount {

/// psi(y) = c * y^(-tau).
struct ApproxFunction {
  double c = 1;
  double tau = 0;

  ApproxFunction() = default;
  ApproxFunction(double c_, double tau_);
  double operator()(double y) const { return tau == 0 ? c : c * std::pow(y, -tau); }
};

/// Raised when a fit or kappa estimate does not have enough nonzero levels.
class InsufficientData : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

struct CountRecord {
  std::size_t sample_index = 0;
  double T = 0;
  std::uint64_t N = 0;
  double Psi = 0;
  double logT = 0;
  double logN = 0;  // -inf when N = 0
  double logPsi = 0;
};

CountRecord make_record(std::size_t sample_index, double T, std::uint64_t N, double Psi);

/// Number of points of `pts` with height < T and distance(x, v) < psi(height).
std::uint64_t count_psi(const SurfacePoint& x, const PointSet& pts, const ApproxFunction& psi, double T);

/// Number of points of `pts` with height < T and distance(x, v) < r.
std::uint64_t count_ball(const SurfacePoint& x, double r, const PointSet& pts, double T);

/// Cumulative counts N_psi(x, T_k) for an increasing ladder, by a linear scan
/// of a point set. psi(height) is cached per point so repeated samples share it.
class ScanCounter {
public:
  ScanCounter(const PointSet& pts, const ApproxFunction& psi);
  std::vector<std::uint64_t> counts(const SurfacePoint& x, std::span<const double> ladder) const;

private:
  const PointSet& pts_;
  std::vector<double> threshold_;
};

/// The same cumulative counts for projective spaces P^(n-1) (projline and
/// Gr(1,n)) without a full enumeration. Points of height below a small cutoff
/// H0 are scanned; above it every qualifying v has a lift with v_i >= 1 along
/// the dominant coordinate i of x, and for each value of v_i only a thin window
/// of the other coordinates can satisfy the angle test. The decision for each
/// candidate is the same floating-point test the scan performs.
class ConeCounter {
public:
  ConeCounter(const VarietyModel& model, const ApproxFunction& psi, double T_max, const EnumerationOptions& opt = {});
  std::vector<std::uint64_t> counts(const SurfacePoint& x, std::span<const double> ladder) const;
  double small_height() const { return h0_; }

private:
  VarietyModel model_;
  ApproxFunction psi_;
  double T_max_;
  double h0_;
  std::optional<PointSet> small_;
};

/// True when the cone backend can serve this model and psi (projective space,
/// tau > 0 or c small enough that the dominant-coordinate lift is valid).
bool cone_supported(const VarietyModel& model, const ApproxFunction& psi);

/// Psi(T) = int_1^T psi(y)^d y^(beta d) dy / y in closed form.
double psi_integral(const VarietyModel& model, const ApproxFunction& psi, double T);

/// True when tau equals beta (the logarithmic regime).
bool is_critical(const VarietyModel& model, const ApproxFunction& psi);

/// Least squares of logN against logT over the top half of the ladder.
LinearFit fit_growth(std::span<const CountRecord> records);

struct KappaEstimate {
  double kappa_hat = 0;
  double spread = 0;  // interquartile range
  bool degenerate = false;
};

/// Median and IQR of N / Psi(T) over the top half of the ladder.
KappaEstimate estimate_kappa(std::span<const CountRecord> records);

enum class CountBackend { automatic, scan, cone };

struct ExperimentConfig {
  VarietyModel model = VarietyModel::projective_line();
  ApproxFunction psi;
  std::vector<double> ladder;
  std::size_t num_samples = 1;
  std::uint64_t base_seed = 0;
  std::vector<double> radii;
  unsigned workers = 0;
  CountBackend backend = CountBackend::automatic;
  std::size_t mc_samples = 1u << 20;

  /// Throws std::invalid_argument on an empty or non-increasing ladder,
  /// num_samples = 0 or radii outside (0, pi/2].
  void validate(bool need_radii = false) const;
};

/// Dyadic ladder T_max / 2^(depth-1), ..., T_max / 2, T_max.
std::vector<double> dyadic_ladder(double T_max, std::size_t depth);

struct SampleSummary {
  std::size_t sample_index = 0;
  std::optional<LinearFit> growth;
  std::optional<KappaEstimate> kappa;
  // Critical regime only: N against log2 T over the whole ladder, and the
  // slope ratio of the top half to the bottom half.
  std::optional<LinearFit> log_law;
  std::optional<double> half_slope_ratio;
};

struct KhintchineResult {
  std::vector<CountRecord> records;  // grouped by sample, ladder order
  std::vector<SampleSummary> samples;
  bool critical = false;
  CountBackend backend_used = CountBackend::scan;
  double expected_slope = 0;  // (beta - tau) d
  double median_slope = 0;    // NaN when no sample has a fit
  double median_kappa = 0;
  // Median over samples of N / Psi at the two highest levels, and their
  // relative difference |a - b| / min(a, b).
  double top_ratio = 0;
  double second_ratio = 0;
  double top_ratio_change = 0;
  double median_log_r2 = 0;
  double median_log_slope = 0;
  double median_half_ratio = 0;
  std::size_t fitted_samples = 0;
};

/// `pts` may be null when the cone backend is used; otherwise it must cover
/// the top of the ladder.
KhintchineResult run_khintchine(const ExperimentConfig& config, const PointSet* pts);

struct EquidistRow {
  std::size_t sample_index = 0;
  double r = 0;
  std::uint64_t count = 0;
  double vol = 0;
  double ratio = 0;  // NaN when no point lies below T
};

struct EquidistResult {
  double T = 0;
  std::vector<EquidistRow> rows;  // grouped by sample, radii order
  std::vector<double> median_ratio;  // per radius
  std::vector<VolumeEstimate> volumes;
  double relative_spread = 0;  // (max - min) / mean of median_ratio
};

/// count_ball(x_i, r, T) / (T^(beta d) ball_volume(r)) for T = ladder.back().
EquidistResult run_equidistribution(const ExperimentConfig& config, const PointSet& pts);

/// Monte Carlo estimate of int_1^T vol(B_X(psi(y))) y^(beta d) dy / y. Each
/// sigma_X draw contributes its exact y-integral, so the only error is
/// sampling error.
VolumeEstimate volume_E_T(const VarietyModel& model, const ApproxFunction& psi, double T, std::size_t mc_samples,
                          std::uint64_t seed = 1);

}  // namespace flagcount

#endif
