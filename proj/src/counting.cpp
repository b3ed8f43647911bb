#include "flagcount/counting.hpp"

#include "flagcount/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>

namespace flagcount {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxConeBound = 1 << 26;
// Decorrelates the volume draws from the sample points, which use
// base_seed + i.
constexpr std::uint64_t kVolumeSeedOffset = 0x9e3779b97f4a7c15ull;

void require_bound(const PointSet& pts, double T) {
  if (pts.bound() < T) throw std::invalid_argument("point set bound is below the requested T");
}

void require_ladder(std::span<const double> ladder) {
  if (ladder.empty()) throw std::invalid_argument("empty ladder");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0) || !std::isfinite(ladder[k])) throw std::invalid_argument("ladder values must be positive");
    if (k > 0 && !(ladder[k] > ladder[k - 1])) throw std::invalid_argument("ladder must be strictly increasing");
  }
}

// Turns per-bin counts into cumulative counts over the ladder.
std::vector<std::uint64_t> accumulate_bins(std::vector<std::uint64_t> bins) {
  std::partial_sum(bins.begin(), bins.end(), bins.begin());
  return bins;
}

i64 gcd64(i64 a, i64 b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    i64 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::vector<double> top_half(std::span<const CountRecord> records, bool logs) {
  std::vector<double> out;
  const std::size_t L = records.size();
  for (std::size_t k = L / 2; k < L; ++k) out.push_back(logs ? records[k].logT : records[k].N / records[k].Psi);
  return out;
}

std::size_t nonzero_levels(std::span<const CountRecord> records) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CountRecord& r) { return r.N > 0; }));
}

LinearFit fit_counts_vs_log2(std::span<const CountRecord> records) {
  std::vector<double> k, n;
  for (const auto& r : records) {
    k.push_back(std::log2(r.T));
    n.push_back(static_cast<double>(r.N));
  }
  return fit_linear(k, n);
}

double median_of(std::vector<double> v) {
  std::erase_if(v, [](double a) { return std::isnan(a); });
  return median(std::move(v));
}

}  // namespace

ApproxFunction::ApproxFunction(double c_, double tau_) : c(c_), tau(tau_) {
  if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("psi: c must be positive");
  if (!(tau >= 0) || !std::isfinite(tau)) throw std::invalid_argument("psi: tau must be non-negative");
}

CountRecord make_record(std::size_t sample_index, double T, std::uint64_t N, double Psi) {
  CountRecord r;
  r.sample_index = sample_index;
  r.T = T;
  r.N = N;
  r.Psi = Psi;
  r.logT = std::log(T);
  r.logN = N > 0 ? std::log(static_cast<double>(N)) : -std::numeric_limits<double>::infinity();
  r.logPsi = std::log(Psi);
  return r;
}

std::uint64_t count_psi(const SurfacePoint& x, const PointSet& pts, const ApproxFunction& psi, double T) {
  require_bound(pts, T);
  const std::size_t end = pts.count_below(T);
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < end; ++i)
    if (projective_angle(x.unit, pts.coords(i)) < psi(pts[i].height)) ++n;
  return n;
}

std::uint64_t count_ball(const SurfacePoint& x, double r, const PointSet& pts, double T) {
  require_bound(pts, T);
  if (!(r >= 0)) throw std::invalid_argument("count_ball: radius must be non-negative");
  const std::size_t end = pts.count_below(T);
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < end; ++i)
    if (projective_angle(x.unit, pts.coords(i)) < r) ++n;
  return n;
}

ScanCounter::ScanCounter(const PointSet& pts, const ApproxFunction& psi) : pts_(pts) {
  threshold_.reserve(pts.size());
  for (const auto& p : pts.points()) threshold_.push_back(psi(p.height));
}

std::vector<std::uint64_t> ScanCounter::counts(const SurfacePoint& x, std::span<const double> ladder) const {
  require_ladder(ladder);
  require_bound(pts_, ladder.back());
  std::vector<std::size_t> ends;
  for (double T : ladder) ends.push_back(pts_.count_below(T));
  std::vector<std::uint64_t> bins(ladder.size(), 0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < ends.back(); ++i) {
    if (projective_angle(x.unit, pts_.coords(i)) < threshold_[i]) {
      while (i >= ends[k]) ++k;
      ++bins[k];
    }
  }
  return accumulate_bins(std::move(bins));
}

namespace {

// Largest angle for which the dominant-coordinate lift is guaranteed: with
// |x_i| >= 1/sqrt(n) any v at angle theta from x has v_i of the sign of x_i
// as soon as tan(theta) < |x_i|.
double cone_angle_limit(int n) { return 0.99 * std::atan(1.0 / std::sqrt(static_cast<double>(n))); }

}  // namespace

bool cone_supported(const VarietyModel& model, const ApproxFunction& psi) {
  if (!model.is_projective_space()) return false;
  return psi.tau > 0 || psi.c < cone_angle_limit(model.ambient_dim());
}

ConeCounter::ConeCounter(const VarietyModel& model, const ApproxFunction& psi, double T_max,
                         const EnumerationOptions& opt)
    : model_(model), psi_(psi), T_max_(T_max) {
  if (!cone_supported(model, psi)) throw std::invalid_argument("cone backend needs a projective space model and a small psi");
  if (!(T_max < kMaxConeBound)) throw std::invalid_argument("cone backend: T exceeds the supported range");
  const double theta_max = cone_angle_limit(model.ambient_dim());
  h0_ = psi.tau > 0 ? std::max(1.0, std::pow(psi.c / theta_max, 1.0 / psi.tau)) : 1.0;
  while (psi_(h0_) > theta_max) h0_ *= 1 + 1e-12;
  small_.emplace(enumerate_points(model, std::min(h0_, T_max), opt));
}

std::vector<std::uint64_t> ConeCounter::counts(const SurfacePoint& x, std::span<const double> ladder) const {
  require_ladder(ladder);
  if (ladder.back() > T_max_) throw std::invalid_argument("cone backend: ladder exceeds the configured bound");
  const int n = model_.ambient_dim();
  if (static_cast<int>(x.unit.size()) != n) throw std::invalid_argument("cone backend: dimension mismatch");

  std::vector<i64> limits;
  for (double T : ladder) limits.push_back(norm_sq_limit(T).get_si());
  const i64 top_limit = limits.back();
  const i64 small_limit = norm_sq_limit(h0_).get_si();
  std::vector<std::uint64_t> bins(ladder.size(), 0);
  auto bin_of = [&](i64 s) {
    return static_cast<std::size_t>(std::upper_bound(limits.begin(), limits.end(), s) - limits.begin());
  };

  // Heights below h0 come from the enumerated set.
  for (std::size_t i = 0; i < small_->size(); ++i) {
    const RationalPoint& p = (*small_)[i];
    if (projective_angle(x.unit, small_->coords(i)) < psi_(p.height)) {
      const i64 s = p.norm_sq.get_si();
      if (s < top_limit) ++bins[bin_of(s)];
    }
  }

  int axis = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(x.unit[j]) > std::abs(x.unit[axis])) axis = j;
  const double xi = std::abs(x.unit[axis]);
  const double sgn = x.unit[axis] > 0 ? 1.0 : -1.0;
  std::vector<int> others;
  std::vector<double> ratio, stretch;
  for (int j = 0; j < n; ++j) {
    if (j == axis) continue;
    others.push_back(j);
    ratio.push_back(sgn * x.unit[j] / xi);
    stretch.push_back(std::sqrt(1 + ratio.back() * ratio.back()));
  }
  const std::size_t m = others.size();
  std::vector<i64> v(n, 0), lo(m), hi(m);
  std::vector<double> vd(n, 0.0);

  auto test = [&]() {
    i128 s = 0;
    for (i64 c : v) s += static_cast<i128>(c) * c;
    if (s < small_limit || s >= top_limit) return;
    for (int j = 0; j < n; ++j) vd[j] = static_cast<double>(v[j]);
    const double h = std::sqrt(static_cast<double>(s));
    if (!(projective_angle(x.unit, vd) < psi_(h))) return;
    i64 g = 0;
    for (i64 c : v) g = gcd64(g, c);
    if (g == 1) ++bins[bin_of(static_cast<i64>(s))];
  };

  // For v with v_axis = t in [b, 2b): |v| >= max(t, h0), so the admissible
  // angle is at most theta = psi(max(b, h0)); then |v| <= t / (xi cos theta
  // - sin theta) and each other coordinate lies within |v| sin theta
  // sqrt(1 + ratio^2) of t * ratio.
  const double t_end = std::sqrt(static_cast<double>(top_limit));
  for (i64 b = 1; static_cast<double>(b) < t_end; b *= 2) {
    const double theta = psi_(std::max(static_cast<double>(b), h0_));
    const double denom = xi * std::cos(theta) - std::sin(theta);
    const double alpha = std::sin(theta) / denom;
    const double cap = T_max_ * std::sin(theta);
    for (i64 t = b; t < 2 * b && static_cast<double>(t) < t_end; ++t) {
      const double td = static_cast<double>(t);
      const double reach = std::min(td * alpha, cap) * (1 + 1e-9) + 1e-9 * td + 1e-9;
      bool empty = false;
      for (std::size_t q = 0; q < m; ++q) {
        const double centre = td * ratio[q];
        const double r = reach * stretch[q];
        lo[q] = static_cast<i64>(std::ceil(centre - r));
        hi[q] = static_cast<i64>(std::floor(centre + r));
        if (lo[q] > hi[q]) {
          empty = true;
          break;
        }
      }
      if (empty) continue;
      v[axis] = t;
      for (std::size_t q = 0; q < m; ++q) v[others[q]] = lo[q];
      while (true) {
        test();
        std::size_t q = 0;
        while (q < m && v[others[q]] == hi[q]) {
          v[others[q]] = lo[q];
          ++q;
        }
        if (q == m) break;
        ++v[others[q]];
      }
    }
  }
  return accumulate_bins(std::move(bins));
}

bool is_critical(const VarietyModel& model, const ApproxFunction& psi) {
  return std::abs(psi.tau - model.beta()) <= 1e-12 * model.beta();
}

double psi_integral(const VarietyModel& model, const ApproxFunction& psi, double T) {
  if (!(T >= 1)) throw std::invalid_argument("psi_integral: T must be at least 1");
  const double d = model.dim();
  const double cd = std::pow(psi.c, d);
  const double lt = std::log(T);
  if (is_critical(model, psi)) return cd * lt;
  const double a = (model.beta() - psi.tau) * d;
  return cd * std::expm1(a * lt) / a;
}

LinearFit fit_growth(std::span<const CountRecord> records) {
  if (nonzero_levels(records) < 4) throw InsufficientData("fit_growth: fewer than 4 levels with N > 0");
  std::vector<double> x, y;
  for (std::size_t k = records.size() / 2; k < records.size(); ++k) {
    if (records[k].N == 0) continue;
    x.push_back(records[k].logT);
    y.push_back(records[k].logN);
  }
  if (x.size() < 2) throw InsufficientData("fit_growth: fewer than 2 nonzero levels in the top half");
  return fit_linear(x, y);
}

KappaEstimate estimate_kappa(std::span<const CountRecord> records) {
  const std::size_t nz = nonzero_levels(records);
  if (nz == 0 && !records.empty()) return {0.0, 0.0, true};
  if (nz < 4) throw InsufficientData("estimate_kappa: fewer than 4 levels with N > 0");
  auto ratios = top_half(records, false);
  KappaEstimate k;
  k.kappa_hat = median(ratios);
  k.spread = quantile(ratios, 0.75) - quantile(ratios, 0.25);
  return k;
}

void ExperimentConfig::validate(bool need_radii) const {
  require_ladder(ladder);
  if (num_samples == 0) throw std::invalid_argument("num_samples must be at least 1");
  if (mc_samples == 0) throw std::invalid_argument("mc_samples must be at least 1");
  if (need_radii && radii.empty()) throw std::invalid_argument("at least one radius is required");
  for (double r : radii)
    if (!(r > 0) || r > std::numbers::pi / 2) throw std::invalid_argument("radii must lie in (0, pi/2]");
}

std::vector<double> dyadic_ladder(double T_max, std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("ladder depth must be at least 1");
  std::vector<double> out(depth);
  for (std::size_t k = 0; k < depth; ++k) out[k] = std::ldexp(T_max, -static_cast<int>(depth - 1 - k));
  return out;
}

KhintchineResult run_khintchine(const ExperimentConfig& config, const PointSet* pts) {
  config.validate();
  if (!config.model.samplable()) throw std::invalid_argument("model does not support sigma_X sampling");
  const auto& ladder = config.ladder;
  const double T_top = ladder.back();

  KhintchineResult res;
  res.critical = is_critical(config.model, config.psi);
  res.expected_slope = (config.model.beta() - config.psi.tau) * config.model.dim();

  CountBackend backend = config.backend;
  if (backend == CountBackend::automatic) {
    if (pts && pts->bound() >= T_top) backend = CountBackend::scan;
    else if (cone_supported(config.model, config.psi)) backend = CountBackend::cone;
    else throw std::invalid_argument("no point set covers the ladder and the cone backend does not apply");
  }
  res.backend_used = backend;

  std::optional<ScanCounter> scan;
  std::optional<ConeCounter> cone;
  if (backend == CountBackend::scan) {
    if (!pts) throw std::invalid_argument("scan backend needs a point set");
    if (!(pts->model() == config.model)) throw std::invalid_argument("point set model differs from the experiment model");
    require_bound(*pts, T_top);
    scan.emplace(*pts, config.psi);
  } else {
    cone.emplace(config.model, config.psi, T_top, EnumerationOptions{config.workers});
  }

  std::vector<double> Psi;
  for (double T : ladder) Psi.push_back(psi_integral(config.model, config.psi, T));

  const std::size_t S = config.num_samples, L = ladder.size();
  std::vector<std::vector<std::uint64_t>> counts(S);
  parallel_for(S, config.workers, [&](std::size_t i, unsigned) {
    Rng rng = make_rng(config.base_seed, i);
    const SurfacePoint x = sample_sigma(config.model, rng);
    counts[i] = scan ? scan->counts(x, ladder) : cone->counts(x, ladder);
  });

  res.records.reserve(S * L);
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t k = 0; k < L; ++k) res.records.push_back(make_record(i, ladder[k], counts[i][k], Psi[k]));

  std::vector<double> slopes, kappas, top, second, r2s, log_slopes, halves;
  for (std::size_t i = 0; i < S; ++i) {
    std::span<const CountRecord> recs(res.records.data() + i * L, L);
    SampleSummary s;
    s.sample_index = i;
    try {
      s.growth = fit_growth(recs);
      slopes.push_back(s.growth->slope);
    } catch (const InsufficientData&) {
    }
    try {
      s.kappa = estimate_kappa(recs);
      if (!s.kappa->degenerate) kappas.push_back(s.kappa->kappa_hat);
    } catch (const InsufficientData&) {
    }
    if (res.critical && L >= 4) {
      s.log_law = fit_counts_vs_log2(recs);
      r2s.push_back(s.log_law->r_squared);
      log_slopes.push_back(s.log_law->slope);
      const std::size_t h = (L + 1) / 2;
      const LinearFit bottom = fit_counts_vs_log2(recs.first(h));
      const LinearFit upper = fit_counts_vs_log2(recs.last(h));
      if (bottom.slope > 0) {
        s.half_slope_ratio = upper.slope / bottom.slope;
        halves.push_back(*s.half_slope_ratio);
      }
    }
    if (L >= 2) {
      top.push_back(recs[L - 1].N / recs[L - 1].Psi);
      second.push_back(recs[L - 2].N / recs[L - 2].Psi);
    }
    res.samples.push_back(s);
  }
  res.fitted_samples = slopes.size();
  res.median_slope = median_of(slopes);
  res.median_kappa = median_of(kappas);
  res.top_ratio = median_of(top);
  res.second_ratio = median_of(second);
  res.top_ratio_change = std::abs(res.top_ratio - res.second_ratio) / std::min(res.top_ratio, res.second_ratio);
  res.median_log_r2 = res.critical ? median_of(r2s) : kNaN;
  res.median_log_slope = res.critical ? median_of(log_slopes) : kNaN;
  res.median_half_ratio = res.critical ? median_of(halves) : kNaN;
  return res;
}

EquidistResult run_equidistribution(const ExperimentConfig& config, const PointSet& pts) {
  config.validate(true);
  if (!config.model.samplable()) throw std::invalid_argument("model does not support sigma_X sampling");
  if (!(pts.model() == config.model)) throw std::invalid_argument("point set model differs from the experiment model");
  EquidistResult res;
  res.T = config.ladder.back();
  require_bound(pts, res.T);
  res.volumes = ball_volumes_mc(config.model, config.radii, config.mc_samples, config.base_seed + kVolumeSeedOffset);
  const double scale = std::pow(res.T, config.model.beta() * config.model.dim());
  const bool any_points = pts.count_below(res.T) > 0;

  const std::size_t S = config.num_samples, R = config.radii.size();
  res.rows.resize(S * R);
  parallel_for(S, config.workers, [&](std::size_t i, unsigned) {
    Rng rng = make_rng(config.base_seed, i);
    const SurfacePoint x = sample_sigma(config.model, rng);
    for (std::size_t k = 0; k < R; ++k) {
      EquidistRow& row = res.rows[i * R + k];
      row.sample_index = i;
      row.r = config.radii[k];
      row.count = count_ball(x, row.r, pts, res.T);
      row.vol = res.volumes[k].value;
      row.ratio = any_points && row.vol > 0 ? static_cast<double>(row.count) / (scale * row.vol) : kNaN;
    }
  });

  for (std::size_t k = 0; k < R; ++k) {
    std::vector<double> v;
    for (std::size_t i = 0; i < S; ++i) v.push_back(res.rows[i * R + k].ratio);
    res.median_ratio.push_back(median_of(v));
  }
  const auto [mn, mx] = std::minmax_element(res.median_ratio.begin(), res.median_ratio.end());
  const double mean = std::accumulate(res.median_ratio.begin(), res.median_ratio.end(), 0.0) / static_cast<double>(R);
  res.relative_spread = (*mx - *mn) / mean;
  return res;
}

VolumeEstimate volume_E_T(const VarietyModel& model, const ApproxFunction& psi, double T, std::size_t mc_samples,
                          std::uint64_t seed) {
  if (!(T >= 1)) throw std::invalid_argument("volume_E_T: T must be at least 1");
  if (mc_samples == 0) throw std::invalid_argument("volume_E_T: need at least one sample");
  if (T == 1) return {0.0, 0.0};
  const double bd = model.beta() * model.dim();
  const double full = std::expm1(bd * std::log(T)) / bd;
  // A draw at distance s lies in B(psi(y)) exactly for y below
  // y* = (c / s)^(1 / tau); its share of the integral is
  // int_1^min(T, y*) y^(bd - 1) dy.
  auto share = [&](double s) {
    if (psi.tau == 0) return s < psi.c ? full : 0.0;
    if (s == 0) return full;
    const double log_y = std::log(psi.c / s) / psi.tau;
    return log_y > 0 ? std::expm1(bd * std::min(std::log(T), log_y)) / bd : 0.0;
  };

  if (psi.c > std::numbers::pi / 4) {
    const double vol = model.total_volume();
    double sum = 0, sum_sq = 0;
    for (double s : sample_base_distances(model, mc_samples, seed)) {
      const double g = vol * share(s);
      sum += g;
      sum_sq += g * g;
    }
    const double m = static_cast<double>(mc_samples);
    const double mean = sum / m;
    return {mean, std::sqrt(std::max(0.0, sum_sq / m - mean * mean) / m)};
  }

  // Small psi: the integral lives in B(c), and mostly near radius psi(T)
  // when the count grows. Stratify by scale: shells psi(2^(j+1)) <= s <
  // psi(2^j) up to y = T, then the core s < psi(T), each sampled near x0 at
  // its own outer radius.
  std::vector<double> edges{psi.c};
  if (psi.tau > 0)
    for (double y = 2; ; y *= 2) {
      edges.push_back(psi(std::min(y, T)));
      if (y >= T) break;
    }
  edges.push_back(0);
  const std::size_t strata = edges.size() - 1;
  const std::size_t per = std::max<std::size_t>(1, mc_samples / strata);
  double total = 0, var = 0;
  for (std::size_t j = 0; j < strata; ++j) {
    const double hi = edges[j], lo = edges[j + 1];
    if (!(hi > 0)) continue;
    double sum = 0, sum_sq = 0;
    for (const auto& [s, weight] : sample_near_base(model, hi, per, seed + j)) {
      if (s < lo || s >= hi) continue;
      const double g = weight * share(s);
      sum += g;
      sum_sq += g * g;
    }
    const double m = static_cast<double>(per);
    const double mean = sum / m;
    total += mean;
    var += std::max(0.0, sum_sq / m - mean * mean) / m;
  }
  return {total, std::sqrt(var)};
}

}  // namespace flagcount
