#include <doctest.h>

#include "flagcount/counting.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace flagcount;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<CountRecord> synthetic(const std::vector<double>& ladder, const std::function<double(double)>& N,
                                   const std::function<double(double)>& Psi) {
  std::vector<CountRecord> out;
  for (double T : ladder) out.push_back(make_record(0, T, static_cast<std::uint64_t>(std::llround(N(T))), Psi(T)));
  return out;
}

}  // namespace

TEST_CASE("ApproxFunction") {
  const ApproxFunction psi(2, 1.5);
  CHECK(psi(4) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ApproxFunction(0.3, 0)(1e9) == 0.3);
  CHECK_THROWS_AS(ApproxFunction(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ApproxFunction(1, -0.5), std::invalid_argument);
}

TEST_CASE("count_psi limiting cases") {
  const auto s2 = VarietyModel::parse("quadric:sphere:2");
  const PointSet pts = enumerate_points(s2, 40);
  Rng rng = make_rng(3);
  const SurfacePoint x = sample_sigma(s2, rng);
  // psi(y) = 100 y^-0.5 > pi/2 for every height below 40.
  CHECK(count_psi(x, pts, ApproxFunction(100, 0.5), 40) == pts.size());
  CHECK(count_psi(x, pts, ApproxFunction(100, 0.5), 20) == pts.count_below(20));
  CHECK(count_psi(x, pts, ApproxFunction(1e-300, 0.5), 40) == 0);
  CHECK_THROWS_AS(count_psi(x, pts, ApproxFunction(1, 0.5), 41), std::invalid_argument);
}

TEST_CASE("count_psi at the golden ratio matches a brute-force scan") {
  const double phi = (1 + std::sqrt(5.0)) / 2;
  const auto p1 = VarietyModel::projective_line();
  const double n = std::hypot(1.0, 1 / phi);
  const SurfacePoint x{{1 / n, 1 / phi / n}};
  const PointSet pts = enumerate_points(p1, 100);
  const ApproxFunction psi(1, 2);
  const std::uint64_t got = count_psi(x, pts, psi, 100);
  const std::uint64_t expected = oracle::count_psi_arccos(x.unit, oracle::projective(2, 100), 1, 2, 100);
  CHECK(got == expected);
  CHECK(got > 0);
  // Every hit is a ratio of consecutive Fibonacci numbers or a small-height
  // point, so the count grows like log T: a handful here.
  CHECK(got < 20);
}

TEST_CASE("count_ball limiting cases and partition additivity") {
  const auto circle = VarietyModel::parse("quadric:sphere:1");
  const PointSet pts = enumerate_points(circle, 10000);
  Rng rng = make_rng(17);
  const SurfacePoint x = sample_sigma(circle, rng);
  CHECK(count_ball(x, 2.0, pts, 10000) == pts.size());
  CHECK(count_ball(x, 0, pts, 10000) == 0);
  CHECK_THROWS_AS(count_ball(x, -0.1, pts, 10000), std::invalid_argument);

  // Tile the circle [cos t : sin t : 1] by K arcs of parameter length 2 pi / K.
  // The ambient angle to the arc centre is arccos(cos^2(dt / 2)), so the arc
  // is the open ball of radius arccos(cos^2(pi / (2K))) about its centre. A
  // random offset keeps rational points off the arc ends.
  std::uniform_real_distribution<double> unif(0, 2 * kPi);
  for (int K : {3, 8, 50}) {
    const double offset = unif(rng);
    const double r = std::acos(std::pow(std::cos(kPi / (2 * K)), 2));
    std::uint64_t sum = 0;
    for (int k = 0; k < K; ++k) {
      const double t = offset + 2 * kPi * k / K;
      const SurfacePoint c{{std::cos(t) / std::sqrt(2.0), std::sin(t) / std::sqrt(2.0), 1 / std::sqrt(2.0)}};
      sum += count_ball(c, r, pts, 10000);
    }
    INFO("K = " << K);
    CHECK(sum == pts.size());
  }
}

TEST_CASE("psi_integral closed forms") {
  const auto p1 = VarietyModel::projective_line();
  CHECK(psi_integral(p1, ApproxFunction(3, 2), 100) == doctest::Approx(3 * std::log(100.0)).epsilon(1e-14));
  const auto s2 = VarietyModel::parse("quadric:sphere:2");
  CHECK(psi_integral(s2, ApproxFunction(0.5, 1), 50) == doctest::Approx(0.25 * std::log(50.0)).epsilon(1e-14));
  CHECK(psi_integral(s2, ApproxFunction(1, 0), 10) == doctest::Approx((100.0 - 1) / 2).epsilon(1e-14));
  const auto g24 = VarietyModel::grassmannian(2, 4);  // beta d = 4
  CHECK(psi_integral(g24, ApproxFunction(1, 0), 3) == doctest::Approx((81.0 - 1) / 4).epsilon(1e-14));
  CHECK(psi_integral(p1, ApproxFunction(1, 1), 1) == 0);
  CHECK(is_critical(g24, ApproxFunction(1, 1)));
  CHECK_FALSE(is_critical(g24, ApproxFunction(1, 0.9)));
  // Supercritical: the integral converges as T grows.
  CHECK(psi_integral(p1, ApproxFunction(1, 3), 1e12) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fit_growth") {
  const auto ladder = dyadic_ladder(1 << 12, 8);
  const auto sq = synthetic(ladder, [](double T) { return T * T; }, [](double) { return 1.0; });
  const LinearFit f = fit_growth(sq);
  CHECK(f.slope == doctest::Approx(2).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1).epsilon(1e-12));
  CHECK(f.points == 4);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise;
  const auto noisy =
      synthetic(ladder, [&](double T) { return 7 * std::pow(T, 1.5) * (1 + 0.01 * noise(rng)); }, [](double) { return 1.0; });
  CHECK(std::abs(fit_growth(noisy).slope - 1.5) < 0.05);

  const auto flat = synthetic(ladder, [](double) { return 5.0; }, [](double) { return 1.0; });
  CHECK(fit_growth(flat).slope == doctest::Approx(0).scale(1));

  auto sparse = sq;
  for (std::size_t k = 0; k < 5; ++k) sparse[k].N = 0;
  CHECK_THROWS_AS(fit_growth(sparse), InsufficientData);
  CHECK_THROWS_AS(fit_growth(std::span<const CountRecord>(sq).first(3)), InsufficientData);
}

TEST_CASE("estimate_kappa") {
  const auto p1 = VarietyModel::projective_line();
  const ApproxFunction psi(1, 1);
  auto Psi = [&](double T) { return psi_integral(p1, psi, T); };
  const auto exact = synthetic(dyadic_ladder(1 << 20, 8), [&](double T) { return 3 * Psi(T); }, Psi);
  // N is rounded to an integer, so the ratio is 3 only up to 1 / Psi.
  const KappaEstimate k = estimate_kappa(exact);
  CHECK(k.kappa_hat == doctest::Approx(3).epsilon(1e-5));
  CHECK(k.spread < 1e-5);
  CHECK_FALSE(k.degenerate);

  // N = 3 Psi (1 + Psi^-0.3): the estimate approaches 3 as the ladder grows.
  double previous = 1e9;
  for (int top : {10, 16, 22, 28}) {
    const auto ladder = dyadic_ladder(std::ldexp(1.0, top), 8);
    const auto recs = synthetic(ladder, [&](double T) { return 3 * Psi(T) * (1 + std::pow(Psi(T), -0.3)); }, Psi);
    const double err = std::abs(estimate_kappa(recs).kappa_hat - 3);
    CHECK(err < previous);
    // The relative error at every level is at most Psi^-0.3 at the bottom.
    CHECK(err <= 3 * std::pow(Psi(ladder.front()), -0.3));
    previous = err;
  }

  const auto zero = synthetic(dyadic_ladder(1024, 6), [](double) { return 0.0; }, Psi);
  const KappaEstimate z = estimate_kappa(zero);
  CHECK(z.degenerate);
  CHECK(z.kappa_hat == 0);
}

TEST_CASE("make_record") {
  const CountRecord r = make_record(4, 8, 0, 2);
  CHECK(r.sample_index == 4);
  CHECK(std::isinf(r.logN));
  CHECK(r.logN < 0);
  CHECK(r.logT == doctest::Approx(std::log(8.0)));
  CHECK(make_record(0, 8, 3, 2).logN == doctest::Approx(std::log(3.0)));
}

TEST_CASE("ExperimentConfig validation and ladders") {
  CHECK(dyadic_ladder(1024, 3) == std::vector<double>{256, 512, 1024});
  CHECK_THROWS_AS(dyadic_ladder(1024, 0), std::invalid_argument);
  ExperimentConfig cfg;
  cfg.ladder = {4, 8};
  CHECK_NOTHROW(cfg.validate());
  cfg.ladder = {8, 4};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.ladder = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.ladder = {4, 8};
  cfg.num_samples = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.num_samples = 1;
  cfg.radii = {0.1, 2.0};
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);
  cfg.radii = {};
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);
}

TEST_CASE("run_khintchine small cases") {
  ExperimentConfig cfg;
  cfg.model = VarietyModel::parse("quadric:sphere:2");
  cfg.psi = ApproxFunction(1, 0.5);
  cfg.ladder = {16};
  cfg.num_samples = 3;
  const PointSet pts = enumerate_points(cfg.model, 16);
  const KhintchineResult one = run_khintchine(cfg, &pts);
  CHECK(one.records.size() == 3);
  CHECK(one.fitted_samples == 0);
  CHECK(std::isnan(one.median_slope));
  for (const auto& s : one.samples) CHECK_FALSE(s.growth.has_value());

  cfg.ladder = dyadic_ladder(16, 3);
  cfg.num_samples = 1;
  const KhintchineResult tiny = run_khintchine(cfg, &pts);
  CHECK(tiny.records.size() == 3);
  CHECK(tiny.expected_slope == doctest::Approx(1.0));
  CHECK_FALSE(tiny.critical);

  // The point set must reach the top of the ladder.
  cfg.ladder = {8, 32};
  CHECK_THROWS_AS(run_khintchine(cfg, &pts), std::invalid_argument);
}

TEST_CASE("run_khintchine is deterministic and backend independent") {
  ExperimentConfig cfg;
  cfg.model = VarietyModel::projective_line();
  cfg.psi = ApproxFunction(1, 2);
  cfg.ladder = dyadic_ladder(2048, 6);
  cfg.num_samples = 40;
  cfg.base_seed = 5;
  const PointSet pts = enumerate_points(cfg.model, 2048);
  cfg.backend = CountBackend::scan;
  const KhintchineResult scan = run_khintchine(cfg, &pts);
  CHECK(scan.critical);
  CHECK(scan.backend_used == CountBackend::scan);
  cfg.backend = CountBackend::cone;
  const KhintchineResult cone = run_khintchine(cfg, nullptr);
  CHECK(cone.backend_used == CountBackend::cone);
  REQUIRE(scan.records.size() == cone.records.size());
  for (std::size_t i = 0; i < scan.records.size(); ++i) CHECK(scan.records[i].N == cone.records[i].N);

  // Sample i draws x from seed base_seed + i.
  Rng rng = make_rng(5, 7);
  const SurfacePoint x7 = sample_sigma(cfg.model, rng);
  CHECK(scan.records[7 * 6 + 5].N == count_psi(x7, pts, cfg.psi, 2048));

  cfg.backend = CountBackend::automatic;
  CHECK(run_khintchine(cfg, nullptr).backend_used == CountBackend::cone);
  CHECK(run_khintchine(cfg, &pts).backend_used == CountBackend::scan);

  cfg.model = VarietyModel::parse("quadric:sphere:2");
  cfg.psi = ApproxFunction(1, 0.5);
  cfg.backend = CountBackend::cone;
  CHECK_THROWS_AS(run_khintchine(cfg, nullptr), std::invalid_argument);
}

TEST_CASE("cone backend") {
  const auto p1 = VarietyModel::projective_line();
  CHECK(cone_supported(p1, ApproxFunction(1, 2)));
  CHECK(cone_supported(VarietyModel::grassmannian(1, 4), ApproxFunction(1, 1)));
  CHECK_FALSE(cone_supported(VarietyModel::parse("quadric:sphere:2"), ApproxFunction(1, 0.5)));
  CHECK_FALSE(cone_supported(p1, ApproxFunction(5, 0)));

  const PointSet pts = enumerate_points(p1, 1 << 12);
  const auto ladder = dyadic_ladder(1 << 12, 6);
  Rng rng = make_rng(8);
  for (int i = 0; i < 20; ++i) {
    const SurfacePoint x = sample_sigma(p1, rng);
    for (const ApproxFunction& psi : {ApproxFunction(1, 2), ApproxFunction(0.3, 1.2), ApproxFunction(4, 2.5)}) {
      const ConeCounter cone(p1, psi, 1 << 12);
      CHECK(cone.counts(x, ladder) == ScanCounter(pts, psi).counts(x, ladder));
    }
  }
  // Rational x (on an axis, and on the diagonal) is the worst case for ties.
  for (const SurfacePoint& x : {SurfacePoint{{1, 0}}, SurfacePoint{{0, 1}},
                                SurfacePoint{{std::sqrt(0.5), std::sqrt(0.5)}}}) {
    const ApproxFunction psi(1, 2);
    CHECK(ConeCounter(p1, psi, 1 << 12).counts(x, ladder) == ScanCounter(pts, psi).counts(x, ladder));
  }
}

TEST_CASE("run_equidistribution") {
  ExperimentConfig cfg;
  cfg.model = VarietyModel::parse("quadric:sphere:1");
  cfg.ladder = {500};
  cfg.num_samples = 4;
  cfg.radii = {kPi / 2, 0.3};
  cfg.mc_samples = 1 << 16;
  const PointSet pts = enumerate_points(cfg.model, 500);
  const EquidistResult res = run_equidistribution(cfg, pts);
  REQUIRE(res.rows.size() == 8);
  CHECK(res.rows[0].r == kPi / 2);
  CHECK(res.rows[1].r == 0.3);
  // r = pi/2 covers X, so the ratio is the total count over T^(beta d) vol(X).
  const double whole = static_cast<double>(pts.size()) / (500 * cfg.model.total_volume());
  CHECK(res.rows[0].count == pts.size());
  CHECK(res.rows[0].ratio == doctest::Approx(whole).epsilon(1e-12));

  ExperimentConfig empty = cfg;
  empty.ladder = {1.2};
  const PointSet none = enumerate_points(cfg.model, 1.2);
  const EquidistResult e = run_equidistribution(empty, none);
  for (const auto& row : e.rows) CHECK(std::isnan(row.ratio));
}

TEST_CASE("volume_E_T") {
  const auto s2 = VarietyModel::parse("quadric:sphere:2");
  const ApproxFunction psi(0.05, 0.5);
  CHECK(volume_E_T(s2, psi, 1, 1000).value == 0);
  // With a fixed seed each draw's share is nondecreasing in T.
  double previous = 0;
  for (double T : {2.0, 8.0, 32.0, 128.0}) {
    const double v = volume_E_T(s2, psi, T, 1 << 16, 4).value;
    CHECK(v >= previous);
    previous = v;
  }
  CHECK(previous > volume_E_T(s2, psi, 2, 1 << 16, 4).value);
  // On S^2 the point (u, 1) / sqrt 2 has cos d = cos^2(a / 2) for the angle a
  // of u to the pole, and areas shrink by 1/2: the ball of radius r has
  // volume pi (1 - cos a) with a = 2 arccos(sqrt(cos r)). With tau = 0 the
  // integral is that volume times (T^2 - 1) / 2, and the estimate is exact.
  const ApproxFunction flat(0.3, 0);
  const double a = 2 * std::acos(std::sqrt(std::cos(0.3)));
  const VolumeEstimate exact = volume_E_T(s2, flat, 10, 1 << 12, 2);
  CHECK(exact.value == doctest::Approx(kPi * (1 - std::cos(a)) * 99 / 2).epsilon(1e-12));

  // Tiny balls are in the asymptotic regime: the integral is kappa_1 Psi(T)
  // up to a relative O(psi(1)^2) correction.
  for (const char* spec : {"quadric:sphere:2", "grassmannian:1:3", "grassmannian:2:4", "projline"}) {
    const auto m = VarietyModel::parse(spec);
    const ApproxFunction tiny(0.01, 0.5 * m.beta());
    const VolumeEstimate est = volume_E_T(m, tiny, 300, 1 << 20, 9);
    const double expected = unit_ball_volume(m.dim()) * psi_integral(m, tiny, 300);
    INFO(spec << ": " << est.value << " +- " << est.std_error << " vs " << expected);
    CHECK(est.std_error < 0.01 * est.value);
    CHECK(std::abs(est.value - expected) < 3 * est.std_error + 1e-4 * expected);
  }

  // Large psi(1) falls back to plain sigma_X sampling.
  const ApproxFunction wide(1.2, 1);
  const VolumeEstimate w = volume_E_T(s2, wide, 4, 1 << 18, 3);
  CHECK(w.value > 0);
  CHECK(w.std_error > 0);
}
