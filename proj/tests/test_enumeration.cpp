#include <doctest.h>

#include "flagcount/enumeration.hpp"
#include "support/oracles.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace flagcount;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("flagcount_enum_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("norm_sq_limit is ceil(T^2)") {
  CHECK(norm_sq_limit(2.5) == 7);
  CHECK(norm_sq_limit(3) == 9);
  CHECK(norm_sq_limit(1) == 1);
  // The double nearest sqrt 2 lies above sqrt 2, so a point of height sqrt 2 counts.
  CHECK(norm_sq_limit(std::sqrt(2.0)) == 3);
}

TEST_CASE("enumerate_projective") {
  const PointSet s = enumerate_projective(2, 2.5);
  CHECK(s.size() == 8);
  CHECK(oracle::to_set(s) == oracle::RepSet{{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {1, 2}, {2, -1}, {1, -2}});
  CHECK(oracle::to_set(s) == oracle::projective(2, 2.5));
  CHECK(enumerate_projective(2, 1.05).size() == 2);
  // Below 1.5 in Z^3: the three axes and the six (1, +-1, 0)-type vectors of
  // height sqrt 2 = 1.414...
  CHECK(enumerate_projective(3, 1.5).size() == 9);
  CHECK(oracle::to_set(enumerate_projective(3, 1.5)) == oracle::projective(3, 1.5));
  CHECK(enumerate_projective(3, 1.4).size() == 3);
  CHECK(enumerate_projective(2, 1).empty());
  CHECK(enumerate_projective(2, 0.5).empty());
  // Sorted by height, then lexicographically.
  CHECK(s[0].rep == IntVec{0, 1});
  CHECK(s[1].rep == IntVec{1, 0});
  CHECK(s[2].rep == IntVec{1, -1});
}

TEST_CASE("enumerate_quadric") {
  const SymForm circle = SymForm::diagonal(std::vector<long>{1, 1, -1});
  const PointSet s = enumerate_quadric(circle, 10);
  CHECK(s.size() == 12);
  CHECK(oracle::to_set(s) == oracle::quadric_diag({1, 1, -1}, 10));
  std::size_t light = 0;
  for (const auto& p : s.points()) light += p.norm_sq == 2;
  CHECK(light == 4);
  CHECK(enumerate_quadric(circle, 1.2).empty());

  const SymForm sphere = SymForm::diagonal(std::vector<long>{1, 1, 1, -1});
  const PointSet t = enumerate_quadric(sphere, 2);
  CHECK(oracle::to_set(t) == oracle::quadric_diag({1, 1, 1, -1}, 2));
  CHECK(t.contains(IntVec{1, 0, 0, 1}));
  CHECK(t.contains(IntVec{1, 0, 0, -1}));
  CHECK(t.size() == 6);

  // A non-diagonal isotropic form: the hyperbolic plane plus a square.
  const SymForm h(std::vector<std::vector<Integer>>{{0, 1, 0}, {1, 0, 0}, {0, 0, -1}});
  const PointSet u = enumerate_quadric(h, 9);
  oracle::RepSet expected = oracle::box_points(3, 9, oracle::limit_of(9), [](const oracle::Rep& v) {
    return 2 * v[0] * v[1] - v[2] * v[2] == 0;
  });
  CHECK(oracle::to_set(u) == expected);
}

TEST_CASE("enumerate_grassmannian") {
  // Plücker vectors of planes in Q^3 are all primitive vectors of Z^3: the
  // three coordinate planes, plus six planes of height sqrt 2 below 1.5.
  CHECK(enumerate_grassmannian(2, 3, 1.4).size() == 3);
  CHECK(oracle::to_set(enumerate_grassmannian(2, 3, 1.5)) == oracle::projective(3, 1.5));
  for (double T : {2.0, 3.5, 7.0}) {
    const PointSet lines = enumerate_grassmannian(1, 3, T);
    const PointSet proj = enumerate_projective(3, T);
    CHECK(oracle::to_set(lines) == oracle::to_set(proj));
  }
  const PointSet g = enumerate_grassmannian(2, 4, 4);
  CHECK(oracle::to_set(g) == oracle::grassmannian_2_4_pairs(4));
  CHECK_THROWS_AS(enumerate_grassmannian(3, 7, 2), std::invalid_argument);  // C(7,3) = 35 > 20
}

TEST_CASE("enumeration guards") {
  EnumerationOptions tight;
  tight.max_candidates = 1000;
  CHECK_THROWS_AS(enumerate_projective(3, 100, tight), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_quadric(SymForm::diagonal(std::vector<long>{1, 1, 1}), 5), std::invalid_argument);
}

TEST_CASE("shells") {
  const ShellSpec s = shells(8);
  REQUIRE(s.levels == std::vector<double>{8, 4, 2});
  CHECK(s.lower(0) == 4);
  CHECK(s.lower(2) == 1);
  CHECK(shell_of(s, Integer(25)) == 0);
  CHECK(shell_of(s, Integer(1)) == 2);
  CHECK(shell_of(s, Integer(16)) == 0);
  CHECK(shell_of(s, Integer(15)) == 1);
  CHECK_THROWS_AS(shell_of(s, Integer(64)), std::out_of_range);
  CHECK_THROWS_AS(shell_of(s, Integer(0)), std::out_of_range);

  const PointSet pts = enumerate_projective(2, 8);
  std::vector<std::size_t> counts(s.shell_count(), 0);
  for (const auto& p : pts.points()) ++counts[shell_of(s, p)];
  CHECK(counts[0] + counts[1] + counts[2] == pts.size());
  CHECK(counts[2] == pts.count_below(2));
}

TEST_CASE("PointSet invariants are enforced") {
  const auto circle = VarietyModel::parse("quadric:sphere:1");
  auto pt = make_rational_point(circle, IntVec{3, 4, 5});
  CHECK_NOTHROW(PointSet(circle, 10, {pt}));
  CHECK_THROWS_AS(PointSet(circle, 10, {pt, pt}), std::invalid_argument);
  CHECK_THROWS_AS(PointSet(circle, 7, {pt}), std::invalid_argument);  // height sqrt 50 >= 7
  RationalPoint bad = pt;
  bad.rep = IntVec{6, 8, 10};
  bad.norm_sq = 200;
  CHECK_THROWS_AS(PointSet(circle, 20, {bad}), std::invalid_argument);
  RationalPoint off = pt;
  off.rep = IntVec{1, 1, 1};
  off.norm_sq = 3;
  CHECK_THROWS_AS(PointSet(circle, 10, {off}), std::invalid_argument);
}

TEST_CASE("cache round trip and error kinds") {
  TempDir dir;
  const auto model = VarietyModel::parse("quadric:sphere:2");
  const PointSet s = enumerate_points(model, 20);
  const auto path = dir.path / cache_file_name(model, 20);
  cache_store(s, path);
  CHECK(cache_load(model, 20, path) == s);

  auto kind_of = [&](const VarietyModel& m, double T, const std::filesystem::path& p) {
    try {
      cache_load(m, T, p);
    } catch (const CacheError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  CHECK(kind_of(VarietyModel::projective_line(), 20, path) == static_cast<int>(CacheError::Kind::model_mismatch));
  CHECK(kind_of(model, 21, path) == static_cast<int>(CacheError::Kind::bound_mismatch));
  CHECK(kind_of(model, 20, dir.path / "missing.pts") == static_cast<int>(CacheError::Kind::io));

  const std::string text = slurp(path);
  const auto truncated = dir.path / "truncated.pts";
  std::ofstream(truncated) << text.substr(0, text.size() / 2);
  CHECK(kind_of(model, 20, truncated) == static_cast<int>(CacheError::Kind::corrupt));

  // A point edited off the cone is caught by validation.
  std::string edited = text;
  const auto pos = edited.rfind('\n', edited.size() - 2);
  edited = edited.substr(0, pos + 1) + "1 1 1 1\n";
  const auto tampered = dir.path / "tampered.pts";
  std::ofstream(tampered) << edited;
  CHECK(kind_of(model, 20, tampered) == static_cast<int>(CacheError::Kind::corrupt));

  const auto garbage = dir.path / "garbage.pts";
  std::ofstream(garbage) << "hello\n";
  CHECK(kind_of(model, 20, garbage) == static_cast<int>(CacheError::Kind::corrupt));
}

TEST_CASE("enumeration is deterministic across worker counts") {
  const auto g = VarietyModel::grassmannian(2, 4);
  EnumerationOptions one{1}, four{4};
  CHECK(enumerate_points(g, 6, one) == enumerate_points(g, 6, four));
  const auto q = VarietyModel::parse("quadric:diag:++--");
  CHECK(enumerate_points(q, 15, one) == enumerate_points(q, 15, four));
}
