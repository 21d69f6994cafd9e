#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>

#include "renormlab/contfrac.hpp"

using namespace renormlab;
using cf::ContinuedFraction;

TEST_CASE("golden convergents are Fibonacci") {
  auto g = ContinuedFraction::golden();
  auto c = cf::convergents(g, 7);
  CHECK(static_cast<long long>(c.p) == 13);
  CHECK(static_cast<long long>(c.q) == 21);
  // p_2/q_2 = [1,1] = 1/2 under the declared recurrence (q_1 = r_0).
  CHECK(cf::value<double>(g, 2) == doctest::Approx(0.5));
  CHECK(cf::value<double>(g, 3) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("single-term fractions") {
  auto c = cf::convergents(ContinuedFraction({3}), 1);
  CHECK(static_cast<long long>(c.p) == 1);
  CHECK(static_cast<long long>(c.q) == 3);
  CHECK(cf::value<double>(ContinuedFraction({2}), 1) == 0.5);
}

TEST_CASE("silver converges to sqrt(2)-1") {
  double v = cf::value<double>(ContinuedFraction::silver(), 20);
  CHECK(std::abs(v - (std::sqrt(2.0) - 1.0)) < 1e-12);
}

TEST_CASE("value in extended precision") {
  ext v = cf::value<ext>(ContinuedFraction::silver(), 60);
  ext target = sqrt(ext(2)) - 1;
  CHECK(abs(v - target) < ext("1e-38"));
}

TEST_CASE("alternating-period cross-check") {
  // [1,2,1,2,1,2] by exact hand fraction: work bottom-up.
  // x = 1/(1+1/(2+1/(1+1/(2+1/(1+1/2))))) = 17/27... verify by recurrence.
  ContinuedFraction c({1, 2, 1, 2, 1, 2});
  auto v = cf::convergents(c, 6);
  // recurrence: q: 1,1,3,4,11,15,41 ; p: 0,1,2,3,8,11,30
  CHECK(static_cast<long long>(v.p) == 30);
  CHECK(static_cast<long long>(v.q) == 41);
}

TEST_CASE("determinant identity") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> term(1, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> terms;
    for (int i = 0; i < 30; ++i) terms.push_back(term(rng));
    ContinuedFraction c(terms);
    for (std::size_t m = 0; m + 1 <= 30; ++m) {
      auto a = cf::convergents(c, m);
      auto b = cf::convergents(c, m + 1);
      cf::int128 det = a.p * b.q - b.p * a.q;
      CHECK((det == 1 || det == -1));
    }
  }
}

TEST_CASE("adjacent convergent gap bound") {
  ContinuedFraction c({1, 3, 2, 1, 1, 4, 1, 2, 9, 1, 1, 1});
  for (std::size_t m = 1; m + 1 <= 12; ++m) {
    auto a = cf::convergents(c, m);
    auto b = cf::convergents(c, m + 1);
    double gap = std::abs(cf::value<double>(c, m) - cf::value<double>(c, m + 1));
    double bound = 1.0 / (static_cast<double>(a.q) * static_cast<double>(b.q));
    // equality holds exactly (determinant identity); allow roundoff
    CHECK(gap <= bound + 1e-15);
  }
}

TEST_CASE("gauss_expand on golden fixed point") {
  double x = (std::sqrt(5.0) - 1.0) / 2.0;
  auto e = cf::gauss_expand(x, 20);
  REQUIRE(e.cf.head_size() >= 15);
  for (std::size_t i = 0; i < 15; ++i) CHECK(e.cf.term(i) == 1);
}

TEST_CASE("gauss_expand on one half terminates") {
  auto e = cf::gauss_expand(0.5, 5);
  REQUIRE(e.cf.head_size() == 1);
  CHECK(e.cf.term(0) == 2);
  CHECK(e.precision_exhausted);
}

TEST_CASE("gauss_expand pi minus three") {
  double x = 3.14159265358979323846 - 3.0;
  auto e = cf::gauss_expand(x, 4);
  REQUIRE(e.cf.head_size() >= 4);
  CHECK(e.cf.term(0) == 7);
  CHECK(e.cf.term(1) == 15);
  CHECK(e.cf.term(2) == 1);
  CHECK(e.cf.term(3) == 292);
}

TEST_CASE("round trip value -> gauss_expand") {
  // Gauss-map error grows like q_25^2, up to ~1e50 for terms <= 10;
  // 70 digits keeps the worst case comfortably below digit boundaries.
  using big = boost::multiprecision::number<
      boost::multiprecision::cpp_bin_float<70>,
      boost::multiprecision::et_off>;
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> term(1, 10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> terms;
    for (int i = 0; i < 30; ++i) terms.push_back(term(rng));
    ContinuedFraction c(terms);
    big x = cf::value<big>(c, 30);
    auto e = cf::gauss_expand(x, 25, big("1e-45"));
    REQUIRE(e.cf.head_size() >= 25);
    for (std::size_t i = 0; i < 25; ++i) CHECK(e.cf.term(i) == c.term(i));
  }
}

TEST_CASE("is_bounded_type") {
  CHECK(cf::is_bounded_type(ContinuedFraction::golden(), 1, 100));
  CHECK_FALSE(cf::is_bounded_type(ContinuedFraction({1, 1, 5, 1}), 2, 4));
  double x = 3.14159265358979323846 - 3.0;
  auto e = cf::gauss_expand(x, 4);
  CHECK_FALSE(cf::is_bounded_type(e.cf, 100, 4));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS((void)ContinuedFraction({0, 1}), error);
  CHECK_THROWS_AS((void)ContinuedFraction({2}).term(1), error);
  CHECK_THROWS_AS((void)cf::convergents(ContinuedFraction::golden(), 200),
                  error);  // overflow past 128 bits
  CHECK_THROWS_AS((void)cf::gauss_expand(1.5, 3), error);
}

TEST_CASE("json round trip") {
  auto g = ContinuedFraction::golden();
  auto back = ContinuedFraction::from_json(g.to_json());
  CHECK(back.period() == g.period());
  ContinuedFraction finite({3, 1, 2});
  auto b2 = ContinuedFraction::from_json(finite.to_json());
  CHECK(b2.head() == finite.head());
  CHECK_FALSE(b2.infinite());
}
