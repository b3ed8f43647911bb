#include "flagcount/exact_lattice.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <tuple>

namespace flagcount {

IntVec::IntVec(std::initializer_list<long> coords) {
  coords_.reserve(coords.size());
  for (long c : coords) coords_.emplace_back(c);
}

IntVec IntVec::from_int64(std::span<const std::int64_t> coords) {
  std::vector<Integer> out;
  out.reserve(coords.size());
  for (std::int64_t c : coords) {
    // mpz_class has no int64 constructor on every platform; go through long.
    static_assert(sizeof(long) == sizeof(std::int64_t));
    out.emplace_back(static_cast<long>(c));
  }
  return IntVec(std::move(out));
}

bool IntVec::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const Integer& c) { return sgn(c) == 0; });
}

Integer IntVec::norm_sq() const {
  Integer s = 0;
  for (const auto& c : coords_) s += c * c;
  return s;
}

IntVec IntVec::operator-() const {
  IntVec out = *this;
  for (auto& c : out.coords_) c = -c;
  return out;
}

std::vector<double> IntVec::to_double() const {
  std::vector<double> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) out.push_back(c.get_d());
  return out;
}

std::vector<std::int64_t> IntVec::to_int64() const {
  std::vector<std::int64_t> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) {
    if (!c.fits_slong_p()) throw std::overflow_error("IntVec coordinate exceeds 64 bits");
    out.push_back(c.get_si());
  }
  return out;
}

bool operator<(const IntVec& a, const IntVec& b) {
  return std::lexicographical_compare(a.coords_.begin(), a.coords_.end(), b.coords_.begin(),
                                      b.coords_.end(),
                                      [](const Integer& x, const Integer& y) { return cmp(x, y) < 0; });
}

std::ostream& operator<<(std::ostream& os, const IntVec& v) {
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os << ')';
}

std::string to_string(const IntVec& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Integer content_gcd(const IntVec& v) {
  Integer g = 0;
  for (const auto& c : v) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

std::pair<IntVec, Integer> primitivize(const IntVec& v) {
  Integer g = content_gcd(v);
  if (sgn(g) == 0) throw std::invalid_argument("primitivize: zero vector");
  IntVec out = v;
  if (g != 1) {
    for (std::size_t i = 0; i < out.size(); ++i) mpz_divexact(out[i].get_mpz_t(), out[i].get_mpz_t(), g.get_mpz_t());
  }
  return {std::move(out), std::move(g)};
}

IntVec canonical_sign(const IntVec& v) {
  for (const auto& c : v) {
    int s = sgn(c);
    if (s > 0) return v;
    if (s < 0) return -v;
  }
  throw std::invalid_argument("canonical_sign: zero vector");
}

IntVec canonical_primitive(const IntVec& v) { return canonical_sign(primitivize(v).first); }

std::vector<std::vector<int>> lex_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

Integer determinant(const IntMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  for (const auto& row : m)
    if (row.size() != n) throw std::invalid_argument("determinant: matrix is not square");
  // Bareiss fraction-free elimination.
  IntMatrix a = m;
  Integer prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (sgn(a[k][k]) == 0) {
      std::size_t p = k + 1;
      while (p < n && sgn(a[p][k]) == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer t = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = a[k][k];
  }
  Integer d = a[n - 1][n - 1];
  return sign > 0 ? d : Integer(-d);
}

IntVec plucker(const IntMatrix& rows) {
  const std::size_t ell = rows.size();
  if (ell == 0) throw std::invalid_argument("plucker: no rows");
  const std::size_t n = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != n) throw std::invalid_argument("plucker: rows of unequal length");
  if (ell >= n) throw std::invalid_argument("plucker: need 1 <= ell < n");
  auto subsets = lex_subsets(static_cast<int>(n), static_cast<int>(ell));
  IntVec out(subsets.size());
  IntMatrix minor(ell, IntVec(ell));
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (std::size_t i = 0; i < ell; ++i)
      for (std::size_t j = 0; j < ell; ++j) minor[i][j] = rows[i][subsets[s][j]];
    out[s] = determinant(minor);
  }
  return out;
}

namespace {

// Congruence diagonalization over Q; returns (det, p, q).
std::tuple<Integer, int, int> inertia(const std::vector<std::vector<Integer>>& gram) {
  const std::size_t n = gram.size();
  std::vector<std::vector<mpq_class>> a(n, std::vector<mpq_class>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = gram[i][j];
  int p = 0, q = 0;
  mpq_class det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (sgn(a[k][k]) == 0) {
      std::size_t piv = n;
      for (std::size_t j = k + 1; j < n; ++j)
        if (sgn(a[j][j]) != 0) { piv = j; break; }
      if (piv != n) {
        std::swap(a[k], a[piv]);
        for (auto& row : a) std::swap(row[k], row[piv]);
      } else {
        std::size_t off = n;
        for (std::size_t j = k + 1; j < n; ++j)
          if (sgn(a[k][j]) != 0) { off = j; break; }
        if (off == n) return {Integer(0), p, q};
        // e_k <- e_k + e_off, a congruence with determinant 1.
        for (std::size_t j = 0; j < n; ++j) a[k][j] += a[off][j];
        for (std::size_t i = 0; i < n; ++i) a[i][k] += a[i][off];
      }
    }
    const mpq_class pivot = a[k][k];
    det *= pivot;
    (sgn(pivot) > 0 ? p : q) += 1;
    for (std::size_t i = k + 1; i < n; ++i) {
      mpq_class f = a[i][k] / pivot;
      if (sgn(f) == 0) continue;
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
    for (std::size_t j = k + 1; j < n; ++j) a[k][j] = 0;
    for (std::size_t i = k + 1; i < n; ++i) a[i][k] = 0;
  }
  // Swaps are paired row/column permutations, so det is unchanged.
  return {Integer(det.get_num() / det.get_den()), p, q};
}

}  // namespace

SymForm::SymForm(std::vector<std::vector<Integer>> gram) : gram_(std::move(gram)) {
  const std::size_t n = gram_.size();
  if (n < 2) throw std::invalid_argument("SymForm: dimension must be at least 2");
  for (const auto& row : gram_)
    if (row.size() != n) throw std::invalid_argument("SymForm: gram matrix is not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (gram_[i][j] != gram_[j][i]) throw std::invalid_argument("SymForm: gram matrix is not symmetric");
  auto [d, p, q] = inertia(gram_);
  if (sgn(d) == 0) throw std::invalid_argument("SymForm: singular form");
  det_ = d;
  p_ = p;
  q_ = q;
}

SymForm SymForm::diagonal(std::span<const long> entries) {
  std::vector<std::vector<Integer>> g(entries.size(), std::vector<Integer>(entries.size(), 0));
  for (std::size_t i = 0; i < entries.size(); ++i) g[i][i] = entries[i];
  return SymForm(std::move(g));
}

bool SymForm::is_diagonal() const {
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      if (i != j && sgn(gram_[i][j]) != 0) return false;
  return true;
}

bool SymForm::is_unit_diagonal() const {
  if (!is_diagonal()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (abs(gram_[i][i]) != 1) return false;
  return true;
}

Integer eval_form(const SymForm& q, const IntVec& v) {
  if (v.size() != q.dim()) throw std::invalid_argument("eval_form: dimension mismatch");
  Integer s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (sgn(v[i]) == 0) continue;
    Integer row = q(i, i) * v[i];
    for (std::size_t j = i + 1; j < v.size(); ++j) row += 2 * q(i, j) * v[j];
    s += row * v[i];
  }
  return s;
}

double first_minimum(const Basis2& basis) {
  const double det = basis.det();
  if (!(std::abs(det) > 0) || !std::isfinite(det)) throw std::invalid_argument("first_minimum: degenerate basis");
  auto a = basis.a;
  auto b = basis.b;
  gauss_reduce(a, b);
  return std::sqrt(a[0] * a[0] + a[1] * a[1]);
}

namespace {

std::vector<std::vector<double>> gram_of(const std::vector<std::vector<double>>& rows) {
  const std::size_t k = rows.size();
  std::vector<std::vector<double>> g(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < rows[i].size(); ++t) s += rows[i][t] * rows[j][t];
      g[i][j] = s;
    }
  return g;
}

// Gauss–Jordan inverse of a small SPD matrix; throws if (numerically) singular.
std::vector<std::vector<double>> spd_inverse(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  double scale = 0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i][i]));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (!(std::abs(a[piv][c]) > 1e-13 * scale)) throw std::invalid_argument("first_minimum: degenerate basis");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

}  // namespace

double first_minimum(const std::vector<std::vector<double>>& basis) {
  const std::size_t k = basis.size();
  if (k == 0 || k > 4) throw std::invalid_argument("first_minimum: rank must be in [1, 4]");
  const std::size_t m = basis[0].size();
  for (const auto& r : basis)
    if (r.size() != m || m < k) throw std::invalid_argument("first_minimum: inconsistent basis shape");

  if (k == 2 && m == 2) return first_minimum(Basis2{{basis[0][0], basis[0][1]}, {basis[1][0], basis[1][1]}});

  auto g = gram_of(basis);
  auto ginv = spd_inverse(g);
  if (k == 1) return std::sqrt(g[0][0]);

  double best = g[0][0];
  for (std::size_t i = 1; i < k; ++i) best = std::min(best, g[i][i]);

  // |c_i| <= R sqrt((G^-1)_ii) for any coefficient vector of norm <= R.
  std::vector<long> bound(k);
  for (std::size_t i = 0; i < k; ++i) bound[i] = static_cast<long>(std::floor(std::sqrt(best * ginv[i][i]) + 1e-9));

  std::vector<long> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = -bound[i];
  while (true) {
    bool zero = std::all_of(c.begin(), c.end(), [](long x) { return x == 0; });
    if (!zero) {
      double s = 0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) s += static_cast<double>(c[i]) * static_cast<double>(c[j]) * g[i][j];
      if (s < best) best = s;
    }
    std::size_t i = 0;
    while (i < k && c[i] == bound[i]) {
      c[i] = -bound[i];
      ++i;
    }
    if (i == k) break;
    ++c[i];
  }
  return std::sqrt(best);
}

}  // namespace flagcount
