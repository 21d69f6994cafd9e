#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "renormlab/circlemap.hpp"
#include "renormlab/schema.hpp"

using namespace renormlab;
using map::arnold_cubic;
using map::two_harmonic;

TEST_CASE("arnold-cubic validates; wrong-sign coefficient rejected") {
  auto fam = arnold_cubic<double>();
  CHECK_NOTHROW((void)fam.at(0.25));
  double a = 1.0 / (2 * pi_v<double>());
  CHECK_THROWS_AS((void)map::build_map(0.1, {{a, 0.0}}), error);
  CHECK_NOTHROW((void)two_harmonic<double>(0.1).at(0.3));
}

TEST_CASE("eval closed forms") {
  auto f = arnold_cubic<double>().at(0.5);
  CHECK(f.eval(0.0, 0) == doctest::Approx(0.5));
  CHECK(f.eval(0.0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f.eval(0.0, 2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f.eval(0.0, 3) > 0);
  // lift'(1/4) = 1 - cos(pi/2) = 1
  CHECK(f.eval(0.25, 1) == doctest::Approx(1.0));
  // degree one
  CHECK(f.eval(1.3, 0) == doctest::Approx(f.eval(0.3, 0) + 1.0));
}

TEST_CASE("theta is a pure translation") {
  auto fam = arnold_cubic<double>();
  auto f0 = fam.at(0.0);
  auto f = fam.at(0.37);
  for (double x : {0.0, 0.1, 0.6, 0.93})
    CHECK(f.eval(x, 0) - f0.eval(x, 0) == doctest::Approx(0.37));
}

TEST_CASE("iterate splits whole and fractional parts") {
  auto f = arnold_cubic<double>().at(0.61);
  double direct = f.lift(f.lift(f.lift(0.0)));
  CHECK(f.iterate(0.0, 3) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(f.iterate(0.0, 3, 1) == doctest::Approx(direct - 1).epsilon(1e-13));
}

TEST_CASE("iterate_derivative matches finite differences") {
  auto f = arnold_cubic<double>().at(0.61);
  double x = 0.3, h = 1e-6;
  double fd = (f.iterate(x + h, 5) - f.iterate(x - h, 5)) / (2 * h);
  CHECK(f.iterate_derivative(x, 5) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("rotation number of theta=0 is zero and rational") {
  auto f = arnold_cubic<double>().at(0.0);
  auto r = map::rotation_number(f, 1e-9);
  CHECK(r.rho == 0.0);
  CHECK(r.rational);
}

TEST_CASE("critical_cycle_parameter basics") {
  auto fam = arnold_cubic<double>();
  CHECK(map::critical_cycle_parameter(fam, 0, 1) == 0.0);
  double t = map::critical_cycle_parameter(fam, 1, 2);
  // residual check: lift_t^2(0) = 1
  CHECK(fam.at(t).iterate(0.0, 2, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)map::critical_cycle_parameter(fam, 2, 4), error);
}

TEST_CASE("tongue anchors increase along Fibonacci fractions") {
  auto fam = arnold_cubic<double>();
  auto g = cf::ContinuedFraction::golden();
  double prev = -1;
  for (std::size_t n = 2; n <= 12; ++n) {
    auto c = cf::convergents(g, n);
    double t = map::critical_cycle_parameter(
        fam, static_cast<std::int64_t>(c.p), static_cast<std::int64_t>(c.q));
    if (n % 2 == 0) {
      // even-index convergents approach from below
      CHECK(t > prev);
    }
    if (n % 2 == 0) prev = t;
  }
}

TEST_CASE("rational tuning detected by rotation_number") {
  auto fam = arnold_cubic<double>();
  double t = map::critical_cycle_parameter(fam, 1, 2);
  auto r = map::rotation_number(fam.at(t), 1e-9);
  CHECK(r.rational);
  CHECK(r.rho == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("golden-tuned rotation number matches the golden mean") {
  auto fam = arnold_cubic<double>();
  double t = map::tune_to_rotation(fam, cf::ContinuedFraction::golden(), 24);
  auto r = map::rotation_number(fam.at(t), 1e-11);
  double target = cf::value<double>(cf::ContinuedFraction::golden(), 20);
  CHECK(std::abs(r.rho - target) < 1e-8);
  REQUIRE(r.digits.size() >= 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r.digits[i] == 1);
}

TEST_CASE("silver-tuned digit stream") {
  auto fam = arnold_cubic<double>();
  double t = map::tune_to_rotation(fam, cf::ContinuedFraction::silver(), 10);
  auto ds = map::detail::rotation_digits(fam.at(t), 10);
  REQUIRE(ds.digits.size() >= 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(ds.digits[i] == 2);
}

TEST_CASE("mixed digit stream [3,1,2,...]") {
  auto fam = arnold_cubic<double>();
  cf::ContinuedFraction target({3, 1, 2}, {1});
  double t = map::tune_to_rotation(fam, target, 9);
  auto ds = map::detail::rotation_digits(fam.at(t), 8);
  REQUIRE(ds.digits.size() >= 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(ds.digits[i] == target.term(i));
}

TEST_CASE("rotation number monotone in theta") {
  auto fam = arnold_cubic<double>();
  double prev = -1;
  for (double t : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
    auto r = map::rotation_number(fam.at(t), 1e-7);
    CHECK(r.rho >= prev - 1e-9);
    prev = r.rho;
  }
}

TEST_CASE("tuning brackets: golden depth 2 between 1/2 and 2/3 anchors") {
  auto fam = arnold_cubic<double>();
  double t = map::tune_to_rotation(fam, cf::ContinuedFraction::golden(), 2);
  double lo = map::critical_cycle_parameter(fam, 1, 2);
  double hi = map::critical_cycle_parameter(fam, 2, 3);
  CHECK(t > lo);
  CHECK(t < hi);
}

TEST_CASE("extended-precision tuning agrees with binary64 to ~1e-15") {
  auto famd = arnold_cubic<double>();
  auto fame = arnold_cubic<ext>();
  double td = map::tune_to_rotation(famd, cf::ContinuedFraction::golden(), 8);
  ext te = map::tune_to_rotation(fame, cf::ContinuedFraction::golden(), 8);
  CHECK(std::abs(td - as_double(te)) < 1e-13);
}

TEST_CASE("map json round trip") {
  auto f = two_harmonic<double>(0.1).at(0.377001);
  auto j = schema::map_to_json(f);
  auto back = schema::map_from_json<double>(j);
  CHECK(back.theta() == f.theta());
  REQUIRE(back.harmonics().size() == 2);
  CHECK(back.harmonics()[1].a == f.harmonics()[1].a);
}
