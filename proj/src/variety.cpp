#include "flagcount/variety.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace flagcount {

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Volume of the unit sphere S^(k-1) in R^k.
double sphere_area(int k) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k);
}

long gcd_long(long a, long b) {
  while (b) {
    long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

long parse_long(const std::string& s, std::string_view what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("invalid integer '" + s + "' in " + std::string(what));
  return v;
}

// Signed Plücker coordinate p(I + {j}) for sorted I; zero when j is in I.
template <class Scalar>
Scalar signed_coord(const std::vector<int>& base, int j, const std::map<unsigned, int>& index,
                    std::span<const Scalar> p) {
  unsigned mask = 0;
  int above = 0;
  for (int i : base) {
    if (i == j) return Scalar(0);
    mask |= 1u << i;
    if (i > j) ++above;
  }
  mask |= 1u << j;
  const Scalar& v = p[index.at(mask)];
  return (above % 2) ? Scalar(-v) : v;
}

// Calls f(value) for every quadratic Plücker relation of Gr(ell, n).
template <class Scalar, class F>
void for_each_plucker_relation(std::span<const Scalar> p, int ell, int n, F&& f) {
  std::map<unsigned, int> index;
  auto subsets = lex_subsets(n, ell);
  if (p.size() != subsets.size()) throw std::invalid_argument("plucker relations: wrong vector length");
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    unsigned mask = 0;
    for (int i : subsets[s]) mask |= 1u << i;
    index[mask] = static_cast<int>(s);
  }
  for (const auto& small : lex_subsets(n, ell - 1)) {
    for (const auto& big : lex_subsets(n, ell + 1)) {
      Scalar total(0);
      for (int k = 0; k <= ell; ++k) {
        const int j = big[k];
        Scalar a = signed_coord<Scalar>(small, j, index, p);
        if (a == Scalar(0)) continue;
        std::vector<int> rest;
        rest.reserve(ell);
        for (int t = 0; t <= ell; ++t)
          if (t != k) rest.push_back(big[t]);
        unsigned mask = 0;
        for (int i : rest) mask |= 1u << i;
        Scalar term = a * p[index.at(mask)];
        if (k % 2) total -= term;
        else total += term;
      }
      f(total);
    }
  }
}

double det_real(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

std::vector<double> normalized(std::vector<double> v) {
  double s = 0;
  for (double c : v) s += c * c;
  s = std::sqrt(s);
  if (!(s > 0)) throw std::runtime_error("cannot normalize a zero vector");
  for (double& c : v) c /= s;
  return v;
}

std::vector<double> gaussian_unit(int k, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(k);
  double s = 0;
  do {
    s = 0;
    for (double& c : v) {
      c = normal(rng);
      s += c * c;
    }
  } while (!(s > 0));
  s = std::sqrt(s);
  for (double& c : v) c /= s;
  return v;
}

}  // namespace

VarietyModel VarietyModel::projective_line() {
  VarietyModel m;
  m.kind_ = VarietyKind::ProjectiveLine;
  m.d_ = 1;
  m.beta_ = {2, 1};
  m.ambient_ = 2;
  m.ell_ = 1;
  m.n_ = 2;
  return m;
}

VarietyModel VarietyModel::quadric(SymForm form) {
  if (form.dim() < 3) throw std::invalid_argument("quadric: need at least three variables");
  if (form.positive_index() == 0 || form.negative_index() == 0)
    throw std::invalid_argument("quadric: form is definite over R, its only zero is v = 0");
  VarietyModel m;
  m.kind_ = VarietyKind::Quadric;
  m.ambient_ = static_cast<int>(form.dim());
  m.d_ = m.ambient_ - 2;
  m.beta_ = {1, 1};
  m.form_ = std::move(form);
  return m;
}

VarietyModel VarietyModel::grassmannian(int ell, int n) {
  if (ell < 1 || ell >= n) throw std::invalid_argument("grassmannian: need 1 <= ell < n");
  if (n > 24) throw std::invalid_argument("grassmannian: n too large");
  VarietyModel m;
  m.kind_ = VarietyKind::Grassmannian;
  m.ell_ = ell;
  m.n_ = n;
  m.d_ = ell * (n - ell);
  long num = n, den = static_cast<long>(ell) * (n - ell);
  long g = gcd_long(num, den);
  m.beta_ = {num / g, den / g};
  m.ambient_ = static_cast<int>(binomial(n, ell));
  return m;
}

VarietyModel VarietyModel::parse(std::string_view spec) {
  auto parts = split(spec, ':');
  if (parts.size() == 1 && parts[0] == "projline") return projective_line();
  if (parts.size() == 3 && parts[0] == "grassmannian") {
    long ell = parse_long(parts[1], "grassmannian spec");
    long n = parse_long(parts[2], "grassmannian spec");
    if (ell < 1 || n > 24 || ell >= n) throw std::invalid_argument("grassmannian spec needs 1 <= ell < n <= 24");
    return grassmannian(static_cast<int>(ell), static_cast<int>(n));
  }
  if (parts.size() == 3 && parts[0] == "quadric") {
    if (parts[1] == "sphere") {
      long n = parse_long(parts[2], "quadric:sphere spec");
      if (n < 1 || n > 30) throw std::invalid_argument("quadric:sphere:<n> needs 1 <= n <= 30");
      std::vector<long> diag(n + 2, 1);
      diag.back() = -1;
      return quadric(SymForm::diagonal(diag));
    }
    if (parts[1] == "diag") {
      const std::string& signs = parts[2];
      if (signs.size() < 3 || signs.size() > 32) throw std::invalid_argument("quadric:diag needs 3..32 signs");
      std::vector<long> diag;
      for (char c : signs) {
        if (c == '+') diag.push_back(1);
        else if (c == '-') diag.push_back(-1);
        else throw std::invalid_argument("quadric:diag signs must be '+' or '-'");
      }
      return quadric(SymForm::diagonal(diag));
    }
    if (parts[1] == "gram") {
      std::vector<std::vector<Integer>> g;
      for (const auto& row : split(parts[2], ';')) {
        std::vector<Integer> r;
        for (const auto& e : split(row, ',')) r.emplace_back(parse_long(e, "quadric:gram spec"));
        g.push_back(std::move(r));
      }
      return quadric(SymForm(std::move(g)));
    }
  }
  throw std::invalid_argument("unrecognized model spec '" + std::string(spec) + "'");
}

const SymForm& VarietyModel::form() const {
  if (!form_) throw std::logic_error("model has no quadratic form");
  return *form_;
}

std::string VarietyModel::descriptor() const {
  switch (kind_) {
    case VarietyKind::ProjectiveLine:
      return "projline";
    case VarietyKind::Grassmannian:
      return "grassmannian:" + std::to_string(ell_) + ":" + std::to_string(n_);
    case VarietyKind::Quadric: {
      const SymForm& q = *form_;
      if (q.is_unit_diagonal()) {
        std::string s = "quadric:diag:";
        for (std::size_t i = 0; i < q.dim(); ++i) s += q(i, i) > 0 ? '+' : '-';
        return s;
      }
      std::ostringstream os;
      os << "quadric:gram:";
      for (std::size_t i = 0; i < q.dim(); ++i) {
        if (i) os << ';';
        for (std::size_t j = 0; j < q.dim(); ++j) os << (j ? "," : "") << q(i, j);
      }
      return os.str();
    }
  }
  return {};
}

bool VarietyModel::is_projective_space() const {
  return kind_ == VarietyKind::ProjectiveLine || (kind_ == VarietyKind::Grassmannian && ell_ == 1);
}

bool VarietyModel::samplable() const {
  return kind_ != VarietyKind::Quadric || form_->is_unit_diagonal();
}

SurfacePoint VarietyModel::base_point() const {
  std::vector<double> u(ambient_, 0.0);
  if (kind_ == VarietyKind::Quadric) {
    const SymForm& q = *form_;
    if (!q.is_unit_diagonal()) throw std::invalid_argument("base point needs a +-1 diagonal form");
    std::size_t plus = q.dim(), minus = q.dim();
    for (std::size_t i = 0; i < q.dim(); ++i) {
      if (q(i, i) > 0 && plus == q.dim()) plus = i;
      if (q(i, i) < 0 && minus == q.dim()) minus = i;
    }
    u[plus] = std::numbers::sqrt2 / 2;
    u[minus] = std::numbers::sqrt2 / 2;
  } else {
    u[0] = 1.0;  // e_1, or e_1 ^ ... ^ e_ell (first lexicographic subset)
  }
  return SurfacePoint{std::move(u)};
}

double VarietyModel::total_volume() const {
  switch (kind_) {
    case VarietyKind::ProjectiveLine:
      return std::numbers::pi;
    case VarietyKind::Quadric: {
      if (!form_->is_unit_diagonal()) throw std::invalid_argument("total_volume needs a +-1 diagonal form");
      // [u : w] with |u| = |w| = 1 is (S^(p-1) x S^(q-1)) / +-1. A tangent
      // vector (u', w') / sqrt 2 has squared length (|u'|^2 + |w'|^2) / 2, so
      // lengths shrink by 1 / sqrt 2 against the product round metric.
      const int p = form_->positive_index(), q = form_->negative_index();
      return 0.5 * sphere_area(p) * sphere_area(q) * std::pow(0.5, 0.5 * d_);
    }
    case VarietyKind::Grassmannian: {
      // vol O(n) / (vol O(ell) vol O(n - ell)) with vol O(k) = prod_{i<=k} |S^(i-1)|
      double v = 1;
      for (int i = n_ - ell_ + 1; i <= n_; ++i) v *= sphere_area(i);
      for (int i = 1; i <= ell_; ++i) v /= sphere_area(i);
      return v;
    }
  }
  return 0;
}

bool operator==(const VarietyModel& a, const VarietyModel& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case VarietyKind::ProjectiveLine:
      return true;
    case VarietyKind::Grassmannian:
      return a.ell_ == b.ell_ && a.n_ == b.n_;
    case VarietyKind::Quadric:
      return *a.form_ == *b.form_;
  }
  return false;
}

bool plucker_relations_hold(const IntVec& p, int ell, int n) {
  bool ok = true;
  std::span<const Integer> coords(p.coords().data(), p.size());
  for_each_plucker_relation<Integer>(coords, ell, n, [&](const Integer& v) {
    if (sgn(v) != 0) ok = false;
  });
  return ok;
}

double plucker_residual(std::span<const double> p, int ell, int n) {
  double worst = 0;
  for_each_plucker_relation<double>(p, ell, n, [&](double v) { worst = std::max(worst, std::abs(v)); });
  return worst;
}

bool on_cone(const VarietyModel& model, const IntVec& v) {
  if (static_cast<int>(v.size()) != model.ambient_dim()) return false;
  switch (model.kind()) {
    case VarietyKind::ProjectiveLine:
      return true;
    case VarietyKind::Quadric:
      return sgn(eval_form(model.form(), v)) == 0;
    case VarietyKind::Grassmannian:
      if (model.ell() == 1 || model.ell() == model.n() - 1) return true;
      return plucker_relations_hold(v, model.ell(), model.n());
  }
  return false;
}

RationalPoint make_rational_point(const VarietyModel& model, const IntVec& v) {
  if (static_cast<int>(v.size()) != model.ambient_dim())
    throw std::invalid_argument("rational point: dimension mismatch");
  if (v.is_zero()) throw std::invalid_argument("rational point: zero vector");
  if (!on_cone(model, v)) throw std::invalid_argument("rational point: vector " + to_string(v) + " is not on the cone");
  RationalPoint pt;
  pt.rep = canonical_primitive(v);
  pt.norm_sq = pt.rep.norm_sq();
  pt.height = std::sqrt(pt.norm_sq.get_d());
  return pt;
}

double height(const VarietyModel& model, const IntVec& v) { return make_rational_point(model, v).height; }

double projective_angle(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("projective_angle: dimension mismatch");
  const std::size_t n = x.size();
  double dot = 0, wedge = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += x[i] * y[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = x[i] * y[j] - x[j] * y[i];
      wedge += w * w;
    }
  }
  return std::atan2(std::sqrt(wedge), std::abs(dot));
}

double distance(const VarietyModel& model, const SurfacePoint& x, const SurfacePoint& y) {
  if (static_cast<int>(x.unit.size()) != model.ambient_dim() || static_cast<int>(y.unit.size()) != model.ambient_dim())
    throw std::invalid_argument("distance: dimension mismatch");
  return projective_angle(x.unit, y.unit);
}

bool is_valid_point(const VarietyModel& model, const SurfacePoint& x, double tol) {
  if (static_cast<int>(x.unit.size()) != model.ambient_dim()) return false;
  double s = 0;
  for (double c : x.unit) s += c * c;
  if (std::abs(std::sqrt(s) - 1) > 1e-12) return false;
  switch (model.kind()) {
    case VarietyKind::ProjectiveLine:
      return true;
    case VarietyKind::Quadric: {
      const SymForm& q = model.form();
      double v = 0;
      for (std::size_t i = 0; i < q.dim(); ++i)
        for (std::size_t j = 0; j < q.dim(); ++j) v += q(i, j).get_d() * x.unit[i] * x.unit[j];
      return std::abs(v) <= tol;
    }
    case VarietyKind::Grassmannian:
      return plucker_residual(x.unit, model.ell(), model.n()) <= tol;
  }
  return false;
}

Rng make_rng(std::uint64_t base_seed, std::uint64_t index) { return Rng(base_seed + index); }

std::vector<double> plucker_unit(const std::vector<std::vector<double>>& rows) {
  const int ell = static_cast<int>(rows.size());
  const int n = static_cast<int>(rows.at(0).size());
  auto subsets = lex_subsets(n, ell);
  std::vector<double> p(subsets.size());
  std::vector<std::vector<double>> minor(ell, std::vector<double>(ell));
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (int i = 0; i < ell; ++i)
      for (int j = 0; j < ell; ++j) minor[i][j] = rows[i][subsets[s][j]];
    p[s] = det_real(minor);
  }
  return normalized(std::move(p));
}

SurfacePoint sample_sigma(const VarietyModel& model, Rng& rng) {
  switch (model.kind()) {
    case VarietyKind::ProjectiveLine: {
      std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
      const double t = angle(rng);
      return SurfacePoint{{std::cos(t), std::sin(t)}};
    }
    case VarietyKind::Quadric: {
      const SymForm& q = model.form();
      if (!q.is_unit_diagonal()) throw std::invalid_argument("sample_sigma: quadric sampling needs a +-1 diagonal form");
      auto u = gaussian_unit(q.positive_index(), rng);
      auto w = gaussian_unit(q.negative_index(), rng);
      std::vector<double> out(q.dim());
      std::size_t iu = 0, iw = 0;
      for (std::size_t i = 0; i < q.dim(); ++i)
        out[i] = (q(i, i) > 0 ? u[iu++] : w[iw++]) * (std::numbers::sqrt2 / 2);
      return SurfacePoint{std::move(out)};
    }
    case VarietyKind::Grassmannian: {
      const int ell = model.ell(), n = model.n();
      std::normal_distribution<double> normal;
      std::vector<std::vector<double>> rows(ell, std::vector<double>(n));
      for (auto& r : rows)
        for (double& c : r) c = normal(rng);
      // Modified Gram–Schmidt; R has a positive diagonal by construction.
      for (int i = 0; i < ell; ++i) {
        for (int j = 0; j < i; ++j) {
          double d = 0;
          for (int t = 0; t < n; ++t) d += rows[i][t] * rows[j][t];
          for (int t = 0; t < n; ++t) rows[i][t] -= d * rows[j][t];
        }
        rows[i] = normalized(std::move(rows[i]));
      }
      return SurfacePoint{plucker_unit(rows)};
    }
  }
  return {};
}

SurfacePoint sample_grassmannian_haar(int ell, int n, Rng& rng) {
  if (ell < 1 || ell >= n) throw std::invalid_argument("sample_grassmannian_haar: need 1 <= ell < n");
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (auto& r : a)
    for (double& c : r) c = normal(rng);
  // Householder QR; q accumulates H_0 H_1 ... so that a = q r.
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) q[i][i] = 1.0;
  for (int k = 0; k < n - 1; ++k) {
    double norm = 0;
    for (int i = k; i < n; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    if (norm == 0) continue;
    std::vector<double> v(n, 0.0);
    const double alpha = a[k][k] > 0 ? -norm : norm;
    for (int i = k; i < n; ++i) v[i] = a[i][k];
    v[k] -= alpha;
    double vv = 0;
    for (int i = k; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0) continue;
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int i = k; i < n; ++i) s += v[i] * a[i][j];
      s = 2 * s / vv;
      for (int i = k; i < n; ++i) a[i][j] -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int t = k; t < n; ++t) s += q[i][t] * v[t];
      s = 2 * s / vv;
      for (int t = k; t < n; ++t) q[i][t] -= s * v[t];
    }
  }
  // Fix signs so that diag(r) > 0; then q is Haar distributed.
  std::vector<std::vector<double>> cols(ell, std::vector<double>(n));
  for (int j = 0; j < ell; ++j) {
    const double s = a[j][j] < 0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) cols[j][i] = s * q[i][j];
  }
  return SurfacePoint{plucker_unit(cols)};
}

double unit_ball_volume(int d) { return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

std::vector<double> sample_base_distances(const VarietyModel& model, std::size_t count, std::uint64_t base_seed) {
  if (!model.samplable()) throw std::invalid_argument("model does not support sigma_X sampling");
  const SurfacePoint x0 = model.base_point();
  Rng rng = make_rng(base_seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(distance(model, x0, sample_sigma(model, rng)));
  return out;
}

namespace {

// int_0^a sin^m t dt by the reduction formula.
double sin_power_integral(int m, double a) {
  if (m == 0) return a;
  if (m == 1) return 1 - std::cos(a);
  return (-std::pow(std::sin(a), m - 1) * std::cos(a) + (m - 1) * sin_power_integral(m - 2, a)) / m;
}

// Area of the cap of half-angle a around e_1 on S^(k-1); for k = 1 the cap is {+1}.
double cap_area(int k, double a) {
  if (k == 1) return 1;
  return sphere_area(k - 1) * sin_power_integral(k - 2, a);
}

// Uniform draw from that cap; a <= pi/2.
std::vector<double> cap_point(int k, double a, Rng& rng) {
  std::vector<double> v(k, 0.0);
  if (k == 1) {
    v[0] = 1;
    return v;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0;
  do {
    t = a * unif(rng);
  } while (k > 2 && unif(rng) >= std::pow(std::sin(t) / std::sin(a), k - 2));
  v[0] = std::cos(t);
  if (k == 2) {
    v[1] = unif(rng) < 0.5 ? std::sin(t) : -std::sin(t);
  } else {
    const auto g = gaussian_unit(k - 1, rng);
    for (int i = 1; i < k; ++i) v[i] = std::sin(t) * g[i - 1];
  }
  return v;
}

}  // namespace

std::vector<WeightedDistance> sample_near_base(const VarietyModel& model, double R, std::size_t count,
                                               std::uint64_t seed) {
  if (!(R > 0) || R > std::numbers::pi / 4) throw std::invalid_argument("sample_near_base: R must lie in (0, pi/4]");
  if (!model.samplable()) throw std::invalid_argument("model does not support sigma_X sampling");
  const SurfacePoint x0 = model.base_point();
  Rng rng = make_rng(seed);
  std::vector<WeightedDistance> out;
  out.reserve(count);
  if (model.kind() == VarietyKind::Quadric) {
    // cos d = |<u, u0> + <w, w0>| / 2, so d < R puts both factors (or both
    // negatives) within the half-angle a of cos a = 2 cos R - 1. The two
    // copies are identified in X and the metric is 1 / sqrt 2 times the
    // product metric.
    const SymForm& q = model.form();
    const int p = q.positive_index(), m = q.negative_index();
    const double a = std::acos(2 * std::cos(R) - 1);
    const double weight = std::pow(0.5, 0.5 * model.dim()) * cap_area(p, a) * cap_area(m, a);
    for (std::size_t i = 0; i < count; ++i) {
      const auto u = cap_point(p, a, rng);
      const auto w = cap_point(m, a, rng);
      std::vector<double> x(q.dim());
      std::size_t iu = 0, iw = 0;
      for (std::size_t j = 0; j < q.dim(); ++j)
        x[j] = (q(j, j) > 0 ? u[iu++] : w[iw++]) * (std::numbers::sqrt2 / 2);
      out.push_back({distance(model, x0, SurfacePoint{std::move(x)}), weight});
    }
    return out;
  }
  // Projective line and Grassmannians: rows e_i + sum_j A_ij e_(ell+j). The
  // Plücker norm squared is det(I + A A^T) >= 1 + |A|_F^2 and equals 1 / cos^2 d,
  // so d < R forces |A|_F < tan R.
  const int ell = model.kind() == VarietyKind::Grassmannian ? model.ell() : 1;
  const int n = model.kind() == VarietyKind::Grassmannian ? model.n() : 2;
  const int k = ell * (n - ell);
  const double rad = std::tan(R);
  const double ball = unit_ball_volume(k) * std::pow(rad, k);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> rows(ell, std::vector<double>(n));
  std::vector<std::vector<double>> gram(ell, std::vector<double>(ell));
  for (std::size_t i = 0; i < count; ++i) {
    const auto dir = gaussian_unit(k, rng);
    const double r = rad * std::pow(unif(rng), 1.0 / k);
    for (int a = 0; a < ell; ++a) {
      std::fill(rows[a].begin(), rows[a].end(), 0.0);
      rows[a][a] = 1;
      for (int b = 0; b < n - ell; ++b) rows[a][ell + b] = r * dir[a * (n - ell) + b];
    }
    for (int a = 0; a < ell; ++a)
      for (int b = 0; b < ell; ++b) {
        double s = 0;
        for (int t = 0; t < n; ++t) s += rows[a][t] * rows[b][t];
        gram[a][b] = s;
      }
    const double weight = ball * std::pow(det_real(gram), -0.5 * n);
    const SurfacePoint x = model.kind() == VarietyKind::Grassmannian
                               ? SurfacePoint{plucker_unit(rows)}
                               : SurfacePoint{normalized(rows[0])};
    out.push_back({distance(model, x0, x), weight});
  }
  return out;
}

std::vector<VolumeEstimate> ball_volumes_mc(const VarietyModel& model, std::span<const double> radii,
                                            std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("ball_volume: need at least one sample");
  for (double r : radii)
    if (!(r > 0) || r > std::numbers::pi / 2) throw std::invalid_argument("ball_volume: radius must be in (0, pi/2]");
  auto dist = sample_base_distances(model, samples, seed);
  std::sort(dist.begin(), dist.end());
  const double vol = model.total_volume();
  const double m = static_cast<double>(samples);
  std::vector<VolumeEstimate> out;
  for (double r : radii) {
    const auto k = std::lower_bound(dist.begin(), dist.end(), r) - dist.begin();
    const double frac = static_cast<double>(k) / m;
    out.push_back({vol * frac, vol * std::sqrt(frac * (1 - frac) / m)});
  }
  return out;
}

VolumeEstimate ball_volume(const VarietyModel& model, double r, VolumeMode mode, std::size_t samples,
                           std::uint64_t seed) {
  if (!(r > 0) || r > std::numbers::pi / 2) throw std::invalid_argument("ball_volume: radius must be in (0, pi/2]");
  if (mode == VolumeMode::asymptotic) return {unit_ball_volume(model.dim()) * std::pow(r, model.dim()), 0.0};
  const double radii[] = {r};
  return ball_volumes_mc(model, radii, samples, seed).front();
}

}  // namespace flagcount
