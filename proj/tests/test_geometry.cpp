#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "renormlab/geometry.hpp"

using namespace renormlab;
using Map = map::CircleMap<double>;

namespace {

Map tuned(const cf::ContinuedFraction& rho, int depth) {
  auto fam = map::arnold_cubic<double>();
  return fam.at(map::tune_to_rotation(fam, rho, depth));
}

template <typename Fam>
double deep_tune(const Fam& fam, const cf::ContinuedFraction& rho,
                 std::size_t levels) {
  auto c5 = cf::convergents(rho, 5), c6 = cf::convergents(rho, 6);
  double lo = map::critical_cycle_parameter(
      fam, static_cast<std::int64_t>(c5.p), static_cast<std::int64_t>(c5.q));
  double hi = map::critical_cycle_parameter(
      fam, static_cast<std::int64_t>(c6.p), static_cast<std::int64_t>(c6.q));
  if (hi < lo) std::swap(lo, hi);
  return pairs::tune_by_renormalization(fam, rho, levels, lo, hi, 4, 48);
}

std::int64_t q_at(const cf::ContinuedFraction& rho, std::size_t m) {
  return m == 0 ? 1
               : static_cast<std::int64_t>(cf::convergents(rho, m).q);
}

}  // namespace

TEST_CASE("partition counts and labels") {
  auto golden = cf::ContinuedFraction::golden();
  auto f = tuned(golden, 16);

  auto p1 = geometry::partition(f, 1);
  CHECK(p1.atoms.size() == 3);  // q_1 + q_2 = 1 + 2

  auto p5 = geometry::partition(f, 5);
  CHECK(p5.q_m == q_at(golden, 5));
  CHECK(p5.q_m1 == q_at(golden, 6));
  CHECK(static_cast<std::int64_t>(p5.atoms.size()) == p5.q_m + p5.q_m1);

  // generation census: q_{m+1} shallow copies of I_m, q_m deep copies
  // of I_{m+1}, indices each appearing exactly once
  std::set<std::int64_t> deep_idx, shallow_idx;
  for (const auto& a : p5.atoms) {
    CHECK(a.length > 0);
    if (a.deep)
      deep_idx.insert(a.index);
    else
      shallow_idx.insert(a.index);
  }
  CHECK(static_cast<std::int64_t>(deep_idx.size()) == p5.q_m);
  CHECK(static_cast<std::int64_t>(shallow_idx.size()) == p5.q_m1);
  CHECK(*deep_idx.rbegin() == p5.q_m - 1);
  CHECK(*shallow_idx.rbegin() == p5.q_m1 - 1);
}

TEST_CASE("partition lengths sum to one") {
  auto f = tuned(cf::ContinuedFraction::silver(), 12);
  auto part = geometry::partition(f, 5);
  std::int64_t expect = q_at(cf::ContinuedFraction::silver(), 5) +
                        q_at(cf::ContinuedFraction::silver(), 6);
  CHECK(static_cast<std::int64_t>(part.atoms.size()) == expect);
  CHECK(std::abs(part.total_length() - 1.0) < 1e-12);
}

TEST_CASE("deeper partitions refine shallower ones") {
  auto f = tuned(cf::ContinuedFraction::golden(), 16);
  auto coarse = geometry::partition(f, 4);
  auto fine = geometry::partition(f, 5);
  std::set<double> fine_starts;
  for (const auto& a : fine.atoms) fine_starts.insert(a.start);
  for (const auto& a : coarse.atoms)
    CHECK(fine_starts.count(a.start) == 1);
}

TEST_CASE("comparability constants are bounded and stable") {
  auto fam = map::arnold_cubic<double>();
  auto f = fam.at(deep_tune(fam, cf::ContinuedFraction::golden(), 18));
  auto s10 = geometry::bounds_stats(geometry::partition(f, 10));
  auto s14 = geometry::bounds_stats(geometry::partition(f, 14));
  CHECK(s10.k_max >= 1.0);
  CHECK(s10.k_min >= 1.0);
  CHECK(s10.k_min <= s10.k_max);
  // bounded geometry: the constant settles as the level grows
  CHECK(std::abs(s14.k_max - s10.k_max) < 0.1 * s10.k_max);
  std::int64_t total = 0;
  for (auto c : s10.hist) total += c;
  CHECK(total == static_cast<std::int64_t>(
                     geometry::partition(f, 10).atoms.size()));
}

TEST_CASE("scaling ratios contract and settle") {
  auto fam1 = map::arnold_cubic<double>();
  auto fam2 = map::two_harmonic<double>(0.1);
  auto golden = cf::ContinuedFraction::golden();
  auto r1 = geometry::scaling_ratios(
      fam1.at(deep_tune(fam1, golden, 18)), 12);
  auto r2 = geometry::scaling_ratios(
      fam2.at(deep_tune(fam2, golden, 18)), 12);
  for (auto s : r1.ratios) {
    CHECK(s > 0);
    CHECK(s < 1);
  }
  CHECK(r1.limit > 0);
  CHECK(r1.limit < 1);
  CHECK(r1.drift < 1e-3);
  // universal limit across families
  CHECK(std::abs(r1.limit - r2.limit) < 1e-2);
}

TEST_CASE("conjugacy through matched partitions") {
  auto fam1 = map::arnold_cubic<double>();
  auto fam2 = map::two_harmonic<double>(0.1);
  auto golden = cf::ContinuedFraction::golden();
  auto f1 = fam1.at(deep_tune(fam1, golden, 14));
  auto f2 = fam2.at(deep_tune(fam2, golden, 14));
  auto psi = geometry::build_conjugacy(f1, f2, 8);

  CHECK(psi(0.0) == 0.0);
  CHECK(psi(1.0) == doctest::Approx(1.0).epsilon(1e-12));

  // strictly monotone on a grid
  double prev = psi(0.0);
  for (int i = 1; i <= 200; ++i) {
    double cur = psi(i / 200.0);
    CHECK(cur > prev);
    prev = cur;
  }

  // exact conjugation on the matched orbit: psi(f1^i(0)) = f2^i(0)
  auto o1 = f1.start(0.0);
  auto o2 = f2.start(0.0);
  for (int i = 0; i < 40; ++i) {
    CHECK(psi(o1.frac) == doctest::Approx(o2.frac).epsilon(1e-12));
    f1.step(o1);
    f2.step(o2);
  }
}

TEST_CASE("conjugacy refuses mismatched combinatorics") {
  auto f1 = tuned(cf::ContinuedFraction::golden(), 12);
  auto f2 = tuned(cf::ContinuedFraction::silver(), 12);
  CHECK_THROWS_AS(geometry::build_conjugacy(f1, f2, 4), error);
}

TEST_CASE("identity regularity is detected exactly") {
  auto f = tuned(cf::ContinuedFraction::golden(), 16);
  auto fit = geometry::regularity_fit(f, f, 10);
  CHECK(fit.exact_identity);
  CHECK(fit.s_limit == 1.0);
}

TEST_CASE("cross-family regularity fit") {
  auto fam1 = map::arnold_cubic<double>();
  auto fam2 = map::two_harmonic<double>(0.1);
  auto golden = cf::ContinuedFraction::golden();
  auto f1 = fam1.at(deep_tune(fam1, golden, 18));
  auto f2 = fam2.at(deep_tune(fam2, golden, 18));
  auto fit = geometry::regularity_fit(f1, f2, 14);
  CHECK_FALSE(fit.exact_identity);
  CHECK(fit.mu_hat > 0);
  CHECK(fit.mu_hat < 1);
  CHECK(fit.lambda_hat > 0);
  CHECK(fit.lambda_hat < 1);
  CHECK(fit.alpha_hat > 0.05);
  // residuals decay over the fitted window
  double first = as_double(std::abs(fit.t[fit.window_lo] - fit.s_limit));
  double last = as_double(std::abs(fit.t[fit.window_hi] - fit.s_limit));
  CHECK(last < first);
}

TEST_CASE("renormalization convergence rate") {
  auto fam1 = map::arnold_cubic<double>();
  auto fam2 = map::two_harmonic<double>(0.1);
  auto golden = cf::ContinuedFraction::golden();
  auto f1 = fam1.at(deep_tune(fam1, golden, 18));
  auto f2 = fam2.at(deep_tune(fam2, golden, 18));

  auto same = geometry::renorm_convergence(f1, f1, 8);
  CHECK(same.exact_identity);

  auto conv = geometry::renorm_convergence(f1, f2, 12);
  CHECK_FALSE(conv.exact_identity);
  CHECK(conv.mu > 0);
  CHECK(conv.mu < 1);
  CHECK(conv.c > 0);
  CHECK(conv.r2 >= 0.98);
}

TEST_CASE("parameter-scaling ratios alternate and estimate the multiplier") {
  auto fam = map::arnold_cubic<double>();
  auto golden = cf::ContinuedFraction::golden();
  auto est = geometry::delta_estimate(fam, golden, 12);
  REQUIRE(est.ratios.size() >= 8);
  for (auto& r : est.ratios) CHECK(r < 0);  // anchors alternate sides
  CHECK(est.delta_hat > 2.5);
  CHECK(est.delta_hat < 3.2);

  auto silver = geometry::delta_estimate(fam, cf::ContinuedFraction::silver(),
                                         10);
  CHECK(silver.delta_hat > 6.0);
  CHECK(silver.delta_hat < 7.7);
}

TEST_CASE("variation recurrence base cases") {
  auto f = tuned(cf::ContinuedFraction::golden(), 12);
  std::function<double(double)> one = [](double) { return 1.0; };
  auto v1 = geometry::propagate_variation(f, one, 1, 64);
  CHECK(v1.scale_exp == 0);
  for (auto val : v1.v) CHECK(val == 1.0);

  // v_2(x) = f'(f(x)) v(x) + v(f(x)) against a direct evaluation
  std::function<double(double)> vf = [](double x) {
    return 1.0 + 0.25 * std::sin(2 * pi_v<double>() * x);
  };
  auto v2 = geometry::propagate_variation(f, vf, 2, 64);
  for (std::size_t j = 0; j < v2.x.size(); ++j) {
    double x = v2.x[j];
    double y = f.lift(x);
    y -= std::floor(y);
    double expect = f.eval(y, 1) * vf(x) + vf(y);
    CHECK(v2.v[j] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("variation stays above its initial infimum") {
  auto f = tuned(cf::ContinuedFraction::golden(), 12);
  std::function<double(double)> vf = [](double x) {
    return 1.0 + 0.5 * std::sin(2 * pi_v<double>() * x);
  };
  auto v50 = geometry::propagate_variation(f, vf, 50, 128);
  CHECK(std::ldexp(as_double(v50.min_value()), v50.scale_exp) >= 0.5 - 1e-12);
}

TEST_CASE("return-interval minima of the variation grow") {
  auto f = tuned(cf::ContinuedFraction::golden(), 14);
  std::function<double(double)> one = [](double) { return 1.0; };
  auto golden = cf::ContinuedFraction::golden();
  double prev_min = 0;
  for (std::size_t k = 1; k <= 6; ++k) {
    auto c = cf::convergents(golden, k);
    auto qk = static_cast<std::int64_t>(c.q);
    auto pk = static_cast<std::int64_t>(c.p);
    double d = f.iterate(0.0, qk, pk);
    double a = std::min(0.0, d), b = std::max(0.0, d);
    std::vector<double> grid;
    for (int j = 1; j < 33; ++j) grid.push_back(a + (b - a) * j / 33.0);
    auto field = geometry::propagate_variation(f, one, qk, grid);
    double m = std::ldexp(as_double(field.min_value()), field.scale_exp);
    CHECK(m >= prev_min);
    prev_min = m;
  }
}
