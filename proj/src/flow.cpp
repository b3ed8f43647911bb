#include "flagcount/flow.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace flagcount {

namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;
using QVec = std::array<Quad, 2>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxCoefficientRange = 5e7;

double to_double(double v) { return v; }
double to_double(const mpq_class& v) { return v.get_d(); }
[[maybe_unused]] double to_double(const Quad& v) { return static_cast<double>(v); }

template <class S>
S from_double(double v) {
  return S(v);
}

template <class S>
S abs_of(const S& v) {
  return v < 0 ? S(-v) : v;
}

// The region predicates, written once for double, Quad and exact rationals.
// Norm windows and u-coordinate inequalities are evaluated in S; the angle
// test against psi uses double, as the counting module does.
template <class S>
struct Regions {
  const RegionParams& p;

  static S norm_sq(const S& a, const S& b) { return a * a + b * b; }

  static double angle(const S& a, const S& b) { return std::atan2(std::abs(to_double(b)), std::abs(to_double(a))); }

  static double height(const S& a, const S& b) { return std::sqrt(to_double(norm_sq(a, b))); }

  bool e_plus(const S& a, const S& b, double c) const {
    if (!(a > 0)) return false;
    const S cs = from_double<S>(c);
    return a >= 1 && a < cs * from_double<S>(p.T) && abs_of(b) * a < cs;
  }

  bool f_c(const S& a, const S& b) const {
    if (!(a > 0)) return false;
    return a >= 1 && a < 2 && abs_of(b) * a < from_double<S>(p.c);
  }

  // 1 <= |v| < T (E_T) or max(1, T/2) <= |v| < T (F_T), on the positive
  // cone, with d(x0, [v]) < psi(|v|).
  bool e_t(const S& a, const S& b, bool shell) const {
    if (!(a > 0)) return false;
    const S n2 = norm_sq(a, b);
    const S T = from_double<S>(p.T);
    S lower = 1;
    if (shell) {
      const S half = T / 2;
      if (half > lower) lower = half;
    }
    if (n2 < lower * lower || !(n2 < T * T)) return false;
    return angle(a, b) < p.psi(height(a, b));
  }

  bool f_infl(const S& a, const S& b, bool plus) const {
    if (!(a > 0)) return false;
    const double k = 1 + p.delta;
    const S n2 = norm_sq(a, b);
    const S lo = plus ? from_double<S>(p.T / (2 * k)) : from_double<S>(k * p.T / 2);
    const S hi = plus ? from_double<S>(k * p.T) : from_double<S>(p.T / k);
    if (!(n2 > lo * lo) || !(n2 < hi * hi)) return false;
    const double h = height(a, b);
    const double bound = plus ? k * p.psi(h / k) : p.psi(k * h) / k;
    return angle(a, b) < bound;
  }

  bool b_t(const S& a, const S& b) const;

  bool operator()(const S& a, const S& b, RegionKind kind) const {
    switch (kind) {
      case RegionKind::E_T:
        return e_t(a, b, false);
      case RegionKind::F_T:
        return e_t(a, b, true);
      case RegionKind::E_plus:
        return e_plus(a, b, p.c);
      case RegionKind::F_c:
        return f_c(a, b);
      case RegionKind::F_infl_minus:
        return f_infl(a, b, false);
      case RegionKind::F_infl_plus:
        return f_infl(a, b, true);
      case RegionKind::B_T:
        return b_t(a, b);
    }
    return false;
  }
};

// B_T = a_{y_T} F_T, so w is in B_T iff a_{y_T}^{-1} w = (s w1, w2 / s) is in
// F_T with s = sqrt(y_T).
template <class S>
bool Regions<S>::b_t(const S& a, const S& b) const {
  const double y = std::pow(p.T, p.tau);
  const S s = from_double<S>(std::sqrt(y));
  return e_t(a * s, b / s, true);
}

template <>
bool Regions<mpq_class>::b_t(const mpq_class& a, const mpq_class& b) const {
  const double y = std::pow(p.T, p.tau);
  const mpq_class s(std::sqrt(y));
  if (s * s != mpq_class(y)) throw std::invalid_argument("B_T on rationals needs y_T = T^tau with an exact square root");
  return e_t(mpq_class(a * s), mpq_class(b / s), true);
}

void validate_params(const RegionParams& p) {
  if (!(p.T > 0)) throw std::invalid_argument("region: T must be positive");
  if (!(p.c > 0)) throw std::invalid_argument("region: c must be positive");
  if (!(p.delta >= 0)) throw std::invalid_argument("region: delta must be non-negative");
}

template <class S>
S dot(const std::array<S, 2>& u, const std::array<S, 2>& v) {
  return u[0] * v[0] + u[1] * v[1];
}

// Calls visit(alpha, beta, w) for the lattice points w = alpha b1 + beta b2 in
// a box that may satisfy lo <= w <= hi; the caller applies the exact test.
// b1, b2 are Gauss-reduced first so the coefficient ranges stay short.
template <class S, class Visit>
void lattice_points_in_box(std::array<S, 2> b1, std::array<S, 2> b2, const std::array<S, 2>& lo,
                           const std::array<S, 2>& hi, Visit&& visit) {
  gauss_reduce(b1, b2);
  using std::abs;
  using std::ceil;
  using std::floor;
  using std::sqrt;
  const S det = b1[0] * b2[1] - b1[1] * b2[0];
  if (det == 0) throw std::invalid_argument("degenerate lattice");
  S R = 0;
  for (const S& x : {lo[0], hi[0]})
    for (const S& y : {lo[1], hi[1]}) R = std::max(R, S(sqrt(x * x + y * y)));
  const S amax = R * sqrt(dot(b2, b2)) / abs(det);
  const S bmax = R * sqrt(dot(b1, b1)) / abs(det);
  if (amax > kMaxCoefficientRange || bmax > kMaxCoefficientRange)
    throw std::runtime_error("lattice box enumeration: coefficient range too large");
  const auto A = static_cast<std::int64_t>(ceil(amax));
  const auto B = static_cast<std::int64_t>(ceil(bmax));
  for (std::int64_t alpha = -A; alpha <= A; ++alpha) {
    const S sa(alpha);
    S blo = -S(B), bhi = S(B);
    for (int r = 0; r < 2; ++r) {
      if (b2[r] == 0) continue;
      S t1 = (lo[r] - sa * b1[r]) / b2[r];
      S t2 = (hi[r] - sa * b1[r]) / b2[r];
      if (t2 < t1) std::swap(t1, t2);
      blo = std::max(blo, t1);
      bhi = std::min(bhi, t2);
    }
    if (bhi < blo) continue;
    const auto bstart = static_cast<std::int64_t>(floor(blo)) - 1;
    const auto bend = static_cast<std::int64_t>(ceil(bhi)) + 1;
    for (std::int64_t beta = std::max(bstart, -B); beta <= std::min(bend, B); ++beta) {
      const S sb(beta);
      visit(alpha, beta, std::array<S, 2>{sa * b1[0] + sb * b2[0], sa * b1[1] + sb * b2[1]});
    }
  }
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

}  // namespace

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

Mat2 inverse(const Mat2& m) {
  const double d = det(m);
  if (d == 0) throw std::invalid_argument("singular matrix");
  return {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
}

Mat2 transpose(const Mat2& m) { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

FlowSpec::FlowSpec(double tau_, double T_) : tau(tau_), T(T_) {
  if (!(tau > 0) || tau > 2) throw std::invalid_argument("flow: tau must lie in (0, 2]");
  if (!(T > 0)) throw std::invalid_argument("flow: T must be positive");
  y_T = std::pow(T, tau);
}

Mat2 rotation_section(const SurfacePoint& x) {
  if (x.unit.size() != 2) throw std::invalid_argument("rotation_section: expects a point of P^1");
  double theta = std::atan2(x.unit[1], x.unit[0]);
  if (theta < 0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  const double c = std::cos(theta), s = std::sin(theta);
  return {{{c, -s}, {s, c}}};
}

Mat2 diag_flow(double y) {
  if (!(y > 0)) throw std::invalid_argument("diag_flow: y must be positive");
  const double r = std::sqrt(y);
  return {{{1 / r, 0}, {0, r}}};
}

Lattice2::Lattice2(const Mat2& basis) : basis_(basis) {
  if (!(std::abs(std::abs(det(basis)) - 1) <= 1e-9)) throw std::invalid_argument("Lattice2: basis must be unimodular");
}

double Lattice2::first_minimum() const {
  QVec a{Quad(basis_[0][0]), Quad(basis_[1][0])};
  QVec b{Quad(basis_[0][1]), Quad(basis_[1][1])};
  gauss_reduce(a, b);
  const Quad m = std::min(dot(a, a), dot(b, b));
  return static_cast<double>(sqrt(m));
}

std::vector<Lambda1Row> lambda1_track(const SurfacePoint& x, std::span<const double> ladder, double tau) {
  if (!(tau > 0) || tau > 2) throw std::invalid_argument("lambda1_track: tau must lie in (0, 2]");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] >= 1)) throw std::invalid_argument("lambda1_track: ladder values must be at least 1");
    if (k > 0 && !(ladder[k] > ladder[k - 1])) throw std::invalid_argument("lambda1_track: ladder must be increasing");
  }
  const Mat2 kinv = transpose(rotation_section(x));
  std::vector<Lambda1Row> out;
  for (double T : ladder) {
    const FlowSpec spec(tau, T);
    const Lattice2 lattice(diag_flow(spec.y_T) * kinv);
    Lambda1Row row;
    row.T = T;
    row.lambda1 = lattice.first_minimum();
    row.stat = T > 1 ? std::log(1 / row.lambda1) / std::log(T) : kNaN;
    out.push_back(row);
  }
  return out;
}

RegionKind parse_region(std::string_view name) {
  if (name == "E_T") return RegionKind::E_T;
  if (name == "F_T") return RegionKind::F_T;
  if (name == "E_plus") return RegionKind::E_plus;
  if (name == "F_c") return RegionKind::F_c;
  if (name == "F_infl-") return RegionKind::F_infl_minus;
  if (name == "F_infl+") return RegionKind::F_infl_plus;
  if (name == "B_T") return RegionKind::B_T;
  throw std::invalid_argument("unknown region '" + std::string(name) + "'");
}

bool region_membership(const std::array<mpq_class, 2>& v, RegionKind kind, const RegionParams& params) {
  validate_params(params);
  return Regions<mpq_class>{params}(v[0], v[1], kind);
}

bool region_membership(const IntVec& v, RegionKind kind, const RegionParams& params) {
  if (v.size() != 2) throw std::invalid_argument("region_membership: expects a vector in Z^2");
  return region_membership(std::array<mpq_class, 2>{mpq_class(v[0]), mpq_class(v[1])}, kind, params);
}

bool region_membership(const Vec2& v, RegionKind kind, const RegionParams& params) {
  validate_params(params);
  return Regions<double>{params}(v[0], v[1], kind);
}

double sandwich_c(int ell, double C0) {
  if (ell < 1) throw std::invalid_argument("sandwich: ell must be positive");
  return std::pow(1 + C0 / ell, -6.0);
}

SandwichReport sandwich_check(const SandwichConfig& cfg) {
  if (!(cfg.T > 1)) throw std::invalid_argument("sandwich: T must exceed 1");
  if (!(cfg.C0 > 0)) throw std::invalid_argument("sandwich: C0 must be positive");
  SandwichReport rep;
  rep.c_ell = sandwich_c(cfg.ell, cfg.C0);
  const double c = rep.c_ell;
  const double delta = 1.0 / cfg.ell;
  const double q_inner = cfg.C0 * cfg.ell, q_outer = 2 * cfg.C0 * cfg.ell;

  // Test points: Z^2 itself (including the axis) and rotated copies of it.
  std::vector<Vec2> pts;
  const Vec2 lo{1, -2}, hi{2 * cfg.T, 2};
  auto collect = [&](const Mat2& g) {
    lattice_points_in_box<double>({g[0][0], g[1][0]}, {g[0][1], g[1][1]}, lo, hi,
                                  [&](std::int64_t, std::int64_t, const Vec2& w) {
                                    if (w[0] >= lo[0] && w[0] <= hi[0] && w[1] >= lo[1] && w[1] <= hi[1])
                                      pts.push_back(w);
                                  });
  };
  collect({{{1, 0}, {0, 1}}});
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> angle(0, std::numbers::pi);
  while (pts.size() < cfg.lattice_points) {
    const double t = angle(rng);
    collect({{{std::cos(t), std::sin(t)}, {-std::sin(t), std::cos(t)}}});
  }
  rep.points = pts.size();

  RegionParams params;
  params.T = cfg.T;
  params.psi = ApproxFunction(1.0, 2.0);
  const Regions<double> in{params};
  std::uniform_real_distribution<double> small(-delta, delta);
  auto note = [&](int which, const Mat2& p, const Vec2& v, const Vec2& img) {
    ++rep.violations;
    if (rep.witnesses.size() < 32) rep.witnesses.push_back({which, p, v, img});
  };
  for (std::size_t s = 0; s < cfg.perturbations; ++s) {
    const double a = std::exp(small(rng));
    const double b = small(rng);
    const Mat2 p{{{a, b}, {0, 1 / a}}};
    const Mat2 pinv = inverse(p);
    for (const Vec2& w : pts) {
      const double n = std::hypot(w[0], w[1]);
      if (n > q_outer && in.e_plus(w[0], w[1], c)) {
        ++rep.inner_checked;
        const Vec2 v = pinv * w;
        if (!(in.e_t(v[0], v[1], false) && std::hypot(v[0], v[1]) > q_inner)) note(1, p, w, v);
      }
      if (n > q_inner && in.e_t(w[0], w[1], false)) {
        ++rep.outer_checked;
        const Vec2 img = p * w;
        if (!in.e_plus(img[0], img[1], 1 / c)) note(2, p, w, img);
      }
    }
  }
  return rep;
}

std::uint64_t count_F_c(const Mat2& g, double c) {
  if (!(c > 0)) throw std::invalid_argument("F_c: c must be positive");
  RegionParams params;
  params.c = c;
  const Regions<Quad> in{params};
  const QVec b1{Quad(g[0][0]), Quad(g[1][0])}, b2{Quad(g[0][1]), Quad(g[1][1])};
  const Quad cq(c);
  std::uint64_t count = 0;
  lattice_points_in_box<Quad>(b1, b2, {Quad(1), Quad(-cq)}, {Quad(2), cq},
                              [&](std::int64_t alpha, std::int64_t beta, const QVec& w) {
                                if (in.f_c(w[0], w[1]) && gcd64(alpha, beta) == 1) ++count;
                              });
  return count;
}

TessellationReport tessellation_check(double c, int N, double radius) {
  if (!(c > 0)) throw std::invalid_argument("tessellation: c must be positive");
  if (N < 1 || N > 62) throw std::invalid_argument("tessellation: N must lie in [1, 62]");
  if (!(radius >= 1) || radius > 1e4) throw std::invalid_argument("tessellation: radius must lie in [1, 1e4]");
  TessellationReport rep;
  rep.N = N;
  rep.T = std::ldexp(1.0, N) / c;
  rep.window_counts.assign(static_cast<std::size_t>(N), 0);
  RegionParams params;
  params.T = rep.T;
  params.c = c;
  const Regions<mpq_class> in{params};
  const auto R = static_cast<std::int64_t>(std::floor(radius));
  const std::int64_t r2 = static_cast<std::int64_t>(std::floor(radius * radius));
  for (std::int64_t a = -R; a <= R; ++a) {
    for (std::int64_t b = -R; b <= R; ++b) {
      if (a * a + b * b > r2 || std::gcd(a, b) != 1) continue;
      ++rep.checked;
      const mpq_class v1(a), v2(b);
      const bool inside = in.e_plus(v1, v2, c);
      int hits = 0;
      for (int j = 0; j < N; ++j) {
        mpq_class scale(1);
        scale.get_num() <<= j;
        // a_{y_j} v = (v1 / 2^j, 2^j v2)
        if (in.f_c(mpq_class(v1 / scale), mpq_class(v2 * scale))) {
          ++hits;
          ++rep.window_counts[static_cast<std::size_t>(j)];
        }
      }
      if (inside) ++rep.in_region;
      if (inside ? hits != 1 : hits != 0) ++rep.mismatches;
    }
  }
  return rep;
}

BirkhoffResult birkhoff_average(double c, const SurfacePoint& x, const Mat2& p, int N) {
  if (!(c > 0) || c > 2) throw std::invalid_argument("birkhoff: c must lie in (0, 2]");
  if (N < 1 || N > 32) throw std::invalid_argument("birkhoff: N must lie in [1, 32]");
  const Mat2 base = p * transpose(rotation_section(x));
  BirkhoffResult res;
  double sum = 0;
  for (int j = 0; j < N; ++j) {
    // a_{y_j} with y_j = 4^j scales the rows by 2^-j and 2^j, exactly.
    Mat2 g = base;
    for (int col = 0; col < 2; ++col) {
      g[0][col] = std::ldexp(g[0][col], -j);
      g[1][col] = std::ldexp(g[1][col], j);
    }
    const std::uint64_t f = count_F_c(g, c);
    res.values.push_back(f);
    sum += static_cast<double>(f);
    res.averages.push_back(sum / (j + 1));
  }
  return res;
}

}  // namespace flagcount
