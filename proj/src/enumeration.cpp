#include "flagcount/enumeration.hpp"

#include "flagcount/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace flagcount {

namespace {

using i64 = std::int64_t;
using i128 = __int128;
using Coords = std::vector<i64>;

// Kernels run in fixed width; coordinates stay below this so every product
// used below fits in 128 bits with room to spare.
constexpr double kMaxKernelBound = 1 << 26;

struct CoordsHash {
  std::size_t operator()(const Coords& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (i64 c : v) {
      h ^= static_cast<std::size_t>(c) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

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

i64 isqrt_floor(i128 n) {
  if (n <= 0) return 0;
  i64 r = static_cast<i64>(std::sqrt(static_cast<long double>(n)));
  while (static_cast<i128>(r) * r > n) --r;
  while (static_cast<i128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

i64 limit_to_i64(const Integer& L) {
  if (!L.fits_slong_p()) throw std::invalid_argument("enumeration bound too large");
  return L.get_si();
}

void check_bound(double T, double scale = 1.0) {
  if (!(T * scale < kMaxKernelBound)) throw std::invalid_argument("enumeration bound exceeds the supported range");
}

std::vector<RationalPoint> to_points(std::vector<Coords>&& raw) {
  std::vector<RationalPoint> pts;
  pts.reserve(raw.size());
  for (auto& c : raw) {
    RationalPoint p;
    p.rep = IntVec::from_int64(c);
    i128 s = 0;
    for (i64 x : c) s += static_cast<i128>(x) * x;
    p.norm_sq = p.rep.norm_sq();
    p.height = std::sqrt(static_cast<double>(s));
    pts.push_back(std::move(p));
  }
  return pts;
}

// Canonical (first nonzero coordinate positive) nonzero integer vectors of
// length n with |v|^2 < limit; emit(v) is called for each. The first
// coordinate is fixed to `first`.
template <class Emit>
void ball_canonical(int n, i64 limit, i64 first, Emit&& emit) {
  Coords v(n, 0);
  v[0] = first;
  const i128 s0 = static_cast<i128>(first) * first;
  if (s0 >= limit) return;
  auto rec = [&](auto&& self, int k, i128 s, bool started) -> void {
    if (k == n) {
      if (started) emit(v);
      return;
    }
    const i64 r = isqrt_floor(limit - 1 - s);
    const i64 lo = started ? -r : 0;
    for (i64 t = lo; t <= r; ++t) {
      v[k] = t;
      self(self, k + 1, s + static_cast<i128>(t) * t, started || t != 0);
    }
    v[k] = 0;
  };
  rec(rec, 1, s0, first != 0);
}

std::vector<Coords> primitive_canonical_ball(int n, i64 limit, unsigned workers) {
  const i64 r0 = isqrt_floor(limit - 1);
  const std::size_t tasks = static_cast<std::size_t>(r0 + 1);
  const unsigned w = resolve_workers(workers);
  std::vector<std::vector<Coords>> buffers(w);
  parallel_for(tasks, w, [&](std::size_t i, unsigned worker) {
    ball_canonical(n, limit, static_cast<i64>(i), [&](const Coords& v) {
      i64 g = 0;
      for (i64 c : v) {
        g = gcd64(g, c);
        if (g == 1) break;
      }
      if (g == 1) buffers[worker].push_back(v);
    });
  });
  std::vector<Coords> out;
  for (auto& b : buffers) out.insert(out.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
  return out;
}

double ball_volume_rn(int n, double r) { return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1) * std::pow(r, n); }

void check_candidates(double projected, const EnumerationOptions& opt) {
  if (projected > opt.max_candidates)
    throw std::invalid_argument("enumeration refused: projected candidate count " + std::to_string(projected) +
                                " exceeds the desk-scale guard");
}

// Bareiss determinant in 128-bit arithmetic; every intermediate is a minor of
// the input, so the Hadamard bound on the rows controls its size.
i128 det128(std::vector<std::vector<i128>> a) {
  const std::size_t n = a.size();
  i128 prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

}  // namespace

Integer norm_sq_limit(double T) {
  if (!(T > 0)) return 0;
  if (!std::isfinite(T)) throw std::invalid_argument("height bound must be finite");
  mpq_class t(T);
  mpq_class sq = t * t;
  Integer q = sq.get_num() / sq.get_den();
  if (q * sq.get_den() != sq.get_num()) q += 1;
  return q;
}

PointSet::PointSet(VarietyModel model, double bound, std::vector<RationalPoint> points)
    : model_(std::move(model)), bound_(bound), points_(std::move(points)) {
  std::sort(points_.begin(), points_.end(), [](const RationalPoint& a, const RationalPoint& b) {
    int c = cmp(a.norm_sq, b.norm_sq);
    return c != 0 ? c < 0 : a.rep < b.rep;
  });
  const Integer limit = norm_sq_limit(bound_);
  const std::size_t dim = static_cast<std::size_t>(model_.ambient_dim());
  coords_.reserve(points_.size() * dim);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const RationalPoint& p = points_[i];
    if (p.rep.size() != dim) throw std::invalid_argument("PointSet: dimension mismatch");
    if (p.rep.norm_sq() != p.norm_sq) throw std::invalid_argument("PointSet: cached squared height is inconsistent");
    if (p.norm_sq >= limit) throw std::invalid_argument("PointSet: point " + to_string(p.rep) + " is not below the bound");
    if (content_gcd(p.rep) != 1 || canonical_sign(p.rep) != p.rep)
      throw std::invalid_argument("PointSet: point " + to_string(p.rep) + " is not canonical primitive");
    if (!on_cone(model_, p.rep)) throw std::invalid_argument("PointSet: point " + to_string(p.rep) + " is off the cone");
    if (i > 0 && points_[i - 1].rep == p.rep) throw std::invalid_argument("PointSet: duplicate point " + to_string(p.rep));
    for (const auto& c : p.rep) coords_.push_back(c.get_d());
  }
}

std::size_t PointSet::count_below(double T) const {
  const Integer limit = norm_sq_limit(T);
  auto it = std::lower_bound(points_.begin(), points_.end(), limit,
                             [](const RationalPoint& p, const Integer& lim) { return p.norm_sq < lim; });
  return static_cast<std::size_t>(it - points_.begin());
}

bool PointSet::contains(const IntVec& rep) const {
  const Integer n = rep.norm_sq();
  auto it = std::lower_bound(points_.begin(), points_.end(), std::pair<const Integer&, const IntVec&>(n, rep),
                             [](const RationalPoint& p, const auto& key) {
                               int c = cmp(p.norm_sq, key.first);
                               return c != 0 ? c < 0 : p.rep < key.second;
                             });
  return it != points_.end() && it->rep == rep;
}

PointSet PointSet::restrict_to(double T) const {
  if (T > bound_) throw std::invalid_argument("restrict_to: bound above the enumerated range");
  std::vector<RationalPoint> pts(points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(count_below(T)));
  return PointSet(model_, T, std::move(pts));
}

bool PointSet::same_points(const PointSet& other) const {
  if (points_.size() != other.points_.size()) return false;
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].rep != other.points_[i].rep) return false;
  return true;
}

PointSet enumerate_projective(int n, double T, const EnumerationOptions& opt) {
  if (n < 2) throw std::invalid_argument("enumerate_projective: need n >= 2");
  VarietyModel model = n == 2 ? VarietyModel::projective_line() : VarietyModel::grassmannian(1, n);
  if (!(T > 1)) return PointSet(std::move(model), T, {});
  check_bound(T);
  check_candidates(ball_volume_rn(n, T) / 2, opt);
  const i64 limit = limit_to_i64(norm_sq_limit(T));
  return PointSet(std::move(model), T, to_points(primitive_canonical_ball(n, limit, opt.workers)));
}

PointSet enumerate_quadric(const SymForm& form, double T, const EnumerationOptions& opt) {
  VarietyModel model = VarietyModel::quadric(form);
  if (!(T > 1)) return PointSet(std::move(model), T, {});
  check_bound(T);
  const int m = static_cast<int>(form.dim());
  check_candidates(ball_volume_rn(m - 1, T), opt);

  std::vector<std::vector<i64>> g(m, std::vector<i64>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (!form(i, j).fits_slong_p() || abs(form(i, j)) > (1 << 20))
        throw std::invalid_argument("enumerate_quadric: form coefficients too large");
      g[i][j] = form(i, j).get_si();
    }

  // Extreme eigenvalues of each trailing block G[k:, k:], for the range of
  // the not-yet-assigned quadratic part over a ball of radius R.
  std::vector<double> lam_min(m + 1, 0.0), lam_max(m + 1, 0.0);
  for (int k = 0; k < m; ++k) {
    const int r = m - k;
    Eigen::MatrixXd block(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) block(i, j) = static_cast<double>(g[k + i][k + j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
    lam_min[k] = es.eigenvalues().minCoeff();
    lam_max[k] = es.eigenvalues().maxCoeff();
  }

  const i64 limit = limit_to_i64(norm_sq_limit(T));
  const i64 r0 = isqrt_floor(limit - 1);
  const unsigned workers = resolve_workers(opt.workers);
  std::vector<std::vector<Coords>> buffers(workers);

  parallel_for(static_cast<std::size_t>(r0 + 1), workers, [&](std::size_t task, unsigned worker) {
    Coords v(m, 0);
    std::vector<i128> lin(m, 0);  // lin[j] = 2 sum_{i assigned} g_ij v_i
    auto& out = buffers[worker];

    auto emit_if_primitive = [&] {
      i64 gg = 0;
      for (i64 c : v) {
        gg = gcd64(gg, c);
        if (gg == 1) break;
      }
      if (gg == 1) out.push_back(v);
    };

    // Can Q(prefix) + (rest) vanish for some rest with |rest|^2 <= budget?
    auto feasible = [&](int k, i128 value, i128 budget) {
      double lin_norm = 0;
      for (int j = k; j < m; ++j) lin_norm += static_cast<double>(lin[j]) * static_cast<double>(lin[j]);
      lin_norm = std::sqrt(lin_norm);
      const double R2 = static_cast<double>(budget);
      const double R = std::sqrt(R2);
      const double a = static_cast<double>(value);
      const double lo = a - lin_norm * R + std::min(0.0, lam_min[k]) * R2;
      const double hi = a + lin_norm * R + std::max(0.0, lam_max[k]) * R2;
      const double slack = 1e-9 * (std::abs(a) + lin_norm * R + (std::abs(lam_min[k]) + std::abs(lam_max[k])) * R2) + 1;
      return lo <= slack && hi >= -slack;
    };

    auto assign = [&](int k, i64 t) {
      for (int j = k + 1; j < m; ++j) lin[j] += 2 * static_cast<i128>(g[k][j]) * t;
    };
    auto unassign = [&](int k, i64 t) {
      for (int j = k + 1; j < m; ++j) lin[j] -= 2 * static_cast<i128>(g[k][j]) * t;
    };

    // Last coordinate: solve g t^2 + l t + value = 0 exactly.
    auto solve_last = [&](i128 value, i128 s, bool started) {
      const int k = m - 1;
      const i128 a = g[k][k], b = lin[k], c = value;
      const i64 rmax = isqrt_floor(limit - 1 - s);
      auto try_t = [&](i128 t) {
        if (t < -rmax || t > rmax) return;
        if (!started && t <= 0) return;
        if (s + t * t >= limit) return;
        if (a * t * t + b * t + c != 0) return;
        v[k] = static_cast<i64>(t);
        emit_if_primitive();
        v[k] = 0;
      };
      if (a == 0) {
        if (b == 0) {
          if (c != 0) return;
          for (i64 t = started ? -rmax : 1; t <= rmax; ++t) try_t(t);
          return;
        }
        if (c % b == 0) try_t(-c / b);
        return;
      }
      const i128 disc = b * b - 4 * a * c;
      if (disc < 0) return;
      const i64 sq = isqrt_floor(disc);
      if (static_cast<i128>(sq) * sq != disc) return;
      for (i128 num : {-b + sq, -b - sq}) {
        if (num % (2 * a) == 0) try_t(num / (2 * a));
        if (sq == 0) break;
      }
    };

    auto rec = [&](auto&& self, int k, i128 value, i128 s, bool started) -> void {
      if (k == m - 1) {
        solve_last(value, s, started);
        return;
      }
      const i64 r = isqrt_floor(limit - 1 - s);
      for (i64 t = started ? -r : 0; t <= r; ++t) {
        const i128 nv = value + static_cast<i128>(g[k][k]) * t * t + lin[k] * t;
        const i128 ns = s + static_cast<i128>(t) * t;
        v[k] = t;
        assign(k, t);
        if (feasible(k + 1, nv, limit - 1 - ns)) self(self, k + 1, nv, ns, started || t != 0);
        unassign(k, t);
      }
      v[k] = 0;
    };

    const i64 t0 = static_cast<i64>(task);
    v[0] = t0;
    const i128 value0 = static_cast<i128>(g[0][0]) * t0 * t0;
    const i128 s0 = static_cast<i128>(t0) * t0;
    assign(0, t0);
    if (feasible(1, value0, limit - 1 - s0)) rec(rec, 1, value0, s0, t0 != 0);
  });

  std::vector<Coords> raw;
  for (auto& b : buffers) raw.insert(raw.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
  return PointSet(std::move(model), T, to_points(std::move(raw)));
}

PointSet enumerate_grassmannian(int ell, int n, double T, const EnumerationOptions& opt) {
  VarietyModel model = VarietyModel::grassmannian(ell, n);
  if (model.ambient_dim() > 20) throw std::invalid_argument("enumerate_grassmannian: C(n, ell) > 20");
  if (!(T > 1)) return PointSet(std::move(model), T, {});

  // Minkowski: the successive minima of the saturated lattice of a subspace of
  // height H satisfy prod lambda_i <= (2^ell / V_ell) H, and each lambda_i >= 1.
  const double minkowski = std::pow(2.0, ell) / unit_ball_volume(ell);
  const double prod_bound = minkowski * T * (1 + 1e-12);
  check_bound(T, minkowski);
  check_candidates(ball_volume_rn(n, prod_bound) / 2, opt);

  const i64 vec_limit = static_cast<i64>(std::floor(prod_bound * prod_bound)) + 1;
  auto vecs = primitive_canonical_ball(n, vec_limit, opt.workers);
  std::vector<double> norms(vecs.size());
  {
    std::vector<std::size_t> order(vecs.size());
    std::iota(order.begin(), order.end(), 0);
    auto nsq = [&](const Coords& c) {
      i128 s = 0;
      for (i64 x : c) s += static_cast<i128>(x) * x;
      return s;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      i128 na = nsq(vecs[a]), nb = nsq(vecs[b]);
      return na != nb ? na < nb : vecs[a] < vecs[b];
    });
    std::vector<Coords> sorted;
    sorted.reserve(vecs.size());
    for (std::size_t i : order) sorted.push_back(std::move(vecs[i]));
    vecs = std::move(sorted);
    for (std::size_t i = 0; i < vecs.size(); ++i) norms[i] = std::sqrt(static_cast<double>(nsq(vecs[i])));
  }

  const double hadamard_sq = prod_bound * prod_bound;
  if (!(hadamard_sq * hadamard_sq < 1e35)) throw std::invalid_argument("enumerate_grassmannian: bound too large");

  const i64 limit = limit_to_i64(norm_sq_limit(T));
  const auto subsets = lex_subsets(n, ell);
  const unsigned workers = resolve_workers(opt.workers);
  std::vector<std::unordered_set<Coords, CoordsHash>> found(workers);

  parallel_for(vecs.size(), workers, [&](std::size_t first, unsigned worker) {
    if (std::pow(norms[first], ell) > prod_bound) return;
    std::vector<std::size_t> chosen{first};
    std::vector<std::vector<i128>> minor(ell, std::vector<i128>(ell));
    Coords p(subsets.size());

    auto leaf = [&] {
      for (std::size_t s = 0; s < subsets.size(); ++s) {
        for (int i = 0; i < ell; ++i)
          for (int j = 0; j < ell; ++j) minor[i][j] = vecs[chosen[i]][subsets[s][j]];
        p[s] = static_cast<i64>(det128(minor));
      }
      i64 gg = 0;
      for (i64 c : p) gg = gcd64(gg, c);
      if (gg == 0) return;  // dependent rows
      i128 s = 0;
      for (i64& c : p) {
        c /= gg;
        s += static_cast<i128>(c) * c;
      }
      if (s >= limit) return;
      for (i64 c : p) {
        if (c > 0) break;
        if (c < 0) {
          for (i64& x : p) x = -x;
          break;
        }
      }
      found[worker].insert(p);
    };

    auto rec = [&](auto&& self, std::size_t start, double prod) -> void {
      const int depth = static_cast<int>(chosen.size());
      if (depth == ell) {
        leaf();
        return;
      }
      for (std::size_t i = start; i < vecs.size(); ++i) {
        // remaining ell - depth vectors all have norm >= norms[i]
        if (prod * std::pow(norms[i], ell - depth) > prod_bound) break;
        chosen.push_back(i);
        self(self, i + 1, prod * norms[i]);
        chosen.pop_back();
      }
    };
    rec(rec, first + 1, norms[first]);
  });

  std::unordered_set<Coords, CoordsHash> all;
  for (auto& f : found) all.insert(f.begin(), f.end());
  std::vector<Coords> raw(all.begin(), all.end());
  return PointSet(std::move(model), T, to_points(std::move(raw)));
}

PointSet enumerate_points(const VarietyModel& model, double T, const EnumerationOptions& opt) {
  switch (model.kind()) {
    case VarietyKind::ProjectiveLine:
      return enumerate_projective(2, T, opt);
    case VarietyKind::Quadric:
      return enumerate_quadric(model.form(), T, opt);
    case VarietyKind::Grassmannian:
      if (model.ell() == 1) return enumerate_projective(model.n(), T, opt);
      return enumerate_grassmannian(model.ell(), model.n(), T, opt);
  }
  throw std::logic_error("unknown model kind");
}

double ShellSpec::lower(std::size_t j) const {
  const double next = levels.at(j) / 2;
  return next > 1 ? next : 1.0;
}

ShellSpec shells(double T) {
  if (!(T > 1)) throw std::invalid_argument("shells: need T > 1");
  ShellSpec spec;
  spec.T = T;
  for (double t = T; t > 1; t /= 2) spec.levels.push_back(t);
  return spec;
}

std::size_t shell_of(const ShellSpec& spec, const Integer& norm_sq) {
  if (norm_sq < 1 || norm_sq >= norm_sq_limit(spec.T)) throw std::out_of_range("shell_of: height outside [1, T)");
  // T_j = T / 2^j is exact in binary, so its limit is exact as well.
  for (std::size_t j = 0; j + 1 < spec.levels.size(); ++j)
    if (norm_sq >= norm_sq_limit(spec.levels[j + 1])) return j;
  return spec.levels.size() - 1;
}

std::size_t shell_of(const ShellSpec& spec, const RationalPoint& point) { return shell_of(spec, point.norm_sq); }

std::string cache_file_name(const VarietyModel& model, double T) {
  std::string d = model.descriptor();
  for (char& c : d) {
    if (c == ':') c = '_';
    else if (c == '+') c = 'p';
    else if (c == '-') c = 'm';
    else if (c == ';') c = 'r';
    else if (c == ',') c = 'c';
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", T);
  std::string t = buf;
  for (char& c : t)
    if (c == '+') c = 'p';
    else if (c == '.') c = 'd';
  return d + "__T" + t + ".pts";
}

void cache_store(const PointSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CacheError(CacheError::Kind::io, "cannot open cache file for writing: " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", set.bound());
  out << "flagcount-pointset " << kCacheFormatVersion << '\n';
  out << "model " << set.model().descriptor() << '\n';
  out << "bound " << buf << '\n';
  out << "bound_sq_limit " << norm_sq_limit(set.bound()) << '\n';
  out << "count " << set.size() << '\n';
  for (const auto& p : set.points()) {
    for (std::size_t i = 0; i < p.rep.size(); ++i) out << (i ? " " : "") << p.rep[i];
    out << '\n';
  }
  out << "end\n";
  if (!out) throw CacheError(CacheError::Kind::io, "failed writing cache file: " + path.string());
}

PointSet cache_load(const VarietyModel& model, double T, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError(CacheError::Kind::io, "cannot open cache file: " + path.string());
  auto corrupt = [&](const std::string& why) { return CacheError(CacheError::Kind::corrupt, "corrupt cache file " + path.string() + ": " + why); };

  std::string line;
  auto header = [&](const std::string& key) {
    if (!std::getline(in, line)) throw corrupt("missing '" + key + "' header");
    if (line.rfind(key + " ", 0) != 0) throw corrupt("expected '" + key + "' header");
    return line.substr(key.size() + 1);
  };

  if (header("flagcount-pointset") != std::to_string(kCacheFormatVersion)) throw corrupt("unsupported format version");
  const std::string descriptor = header("model");
  const std::string bound_text = header("bound");
  const std::string limit_text = header("bound_sq_limit");
  const std::string count_text = header("count");

  VarietyModel stored = [&] {
    try {
      return VarietyModel::parse(descriptor);
    } catch (const std::exception& e) {
      throw corrupt(std::string("bad model descriptor: ") + e.what());
    }
  }();
  if (!(stored == model))
    throw CacheError(CacheError::Kind::model_mismatch,
                     "cache model " + descriptor + " does not match requested " + model.descriptor());
  double bound = 0;
  std::size_t count = 0;
  try {
    std::size_t used = 0;
    bound = std::stod(bound_text, &used);
    if (used != bound_text.size()) throw std::invalid_argument("trailing characters");
    count = std::stoull(count_text, &used);
    if (used != count_text.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw corrupt("unparsable bound or count");
  }
  Integer stored_limit;
  if (stored_limit.set_str(limit_text, 10) != 0 || stored_limit != norm_sq_limit(bound))
    throw corrupt("bound_sq_limit inconsistent with bound");
  if (bound != T)
    throw CacheError(CacheError::Kind::bound_mismatch, "cache bound " + bound_text + " does not match requested bound");

  const std::size_t dim = static_cast<std::size_t>(model.ambient_dim());
  std::vector<RationalPoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw corrupt("truncated point list");
    std::istringstream row(line);
    std::vector<Integer> coords;
    std::string tok;
    while (row >> tok) {
      Integer z;
      if (z.set_str(tok, 10) != 0) throw corrupt("bad integer '" + tok + "'");
      coords.push_back(std::move(z));
    }
    if (coords.size() != dim) throw corrupt("wrong coordinate count on point line");
    RationalPoint p;
    p.rep = IntVec(std::move(coords));
    p.norm_sq = p.rep.norm_sq();
    p.height = std::sqrt(p.norm_sq.get_d());
    pts.push_back(std::move(p));
  }
  if (!std::getline(in, line) || line != "end") throw corrupt("missing end marker");
  std::vector<IntVec> order;
  order.reserve(pts.size());
  for (const auto& p : pts) order.push_back(p.rep);
  try {
    PointSet set(model, T, std::move(pts));
    for (std::size_t i = 0; i < order.size(); ++i)
      if (set[i].rep != order[i]) throw corrupt("points are not in canonical order");
    return set;
  } catch (const std::invalid_argument& e) {
    throw corrupt(e.what());
  }
}

}  // namespace flagcount
