#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "sfl/mask.hpp"
#include "sfl/rational.hpp"

using namespace sfl;

TEST_CASE("mask basic operations") {
  Mask a(70);
  REQUIRE(a.none());
  a.set(0);
  a.set(3);
  a.set(69);
  REQUIRE(a.count() == 3);
  REQUIRE(a.test(69));
  REQUIRE_FALSE(a.test(1));
  REQUIRE(a.first() == 0);
  a.reset(0);
  REQUIRE(a.first() == 3);
  REQUIRE(a.to_indices() == std::vector<int>{3, 69});
}

TEST_CASE("mask set algebra matches std::set on random draws") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 100);
    Mask a(n), b(n);
    std::set<int> sa, sb;
    for (int i = 0; i < n; ++i) {
      if (rng() & 1) {
        a.set(i);
        sa.insert(i);
      }
      if (rng() & 1) {
        b.set(i);
        sb.insert(i);
      }
    }
    std::set<int> si, su, sd;
    for (int v : sa) {
      if (sb.count(v)) si.insert(v);
      if (!sb.count(v)) sd.insert(v);
    }
    su = sa;
    su.insert(sb.begin(), sb.end());
    auto as_set = [](const Mask& m) {
      auto idx = m.to_indices();
      return std::set<int>(idx.begin(), idx.end());
    };
    REQUIRE(as_set(a & b) == si);
    REQUIRE(as_set(a | b) == su);
    REQUIRE(as_set(a.and_not(b)) == sd);
    REQUIRE(a.intersects(b) == !si.empty());
    REQUIRE(a.is_subset_of(a | b));
    REQUIRE((a & b).is_subset_of(a));
  }
}

TEST_CASE("mask complement and full") {
  Mask a = Mask::full(5);
  REQUIRE(a.count() == 5);
  a.reset(2);
  Mask c = a.complement();
  REQUIRE(c.to_indices() == std::vector<int>{2});
}

TEST_CASE("mask ordering is little-endian integer order") {
  // members {0,3,4} -> 25, {2,3,5} -> 44, {1,4,5} -> 50
  Mask a(6), b(6), c(6);
  for (int y : {0, 3, 4}) a.set(y);
  for (int y : {2, 3, 5}) b.set(y);
  for (int y : {1, 4, 5}) c.set(y);
  REQUIRE(a < b);
  REQUIRE(b < c);
  REQUIRE_FALSE(c < a);
  REQUIRE(a == a);
}

TEST_CASE("mask hash distinguishes close masks") {
  Mask a(64), b(64);
  a.set(0);
  b.set(1);
  REQUIRE(a.hash() != b.hash());
}

TEST_CASE("rational parse and format round-trip") {
  REQUIRE(format_rational(parse_rational("2/6")) == "1/3");
  REQUIRE(format_rational(parse_rational("-4/8")) == "-1/2");
  REQUIRE(format_rational(parse_rational("7")) == "7");
  REQUIRE(format_rational(parse_rational("0/5")) == "0");
  REQUIRE(parse_rational("1/3") + parse_rational("2/3") == 1);
  REQUIRE_THROWS_AS(parse_rational("1/0"), ParseError);
  REQUIRE_THROWS_AS(parse_rational("a/b"), ParseError);
  REQUIRE_THROWS_AS(parse_rational(""), ParseError);
  REQUIRE_THROWS_AS(make_rational(1, 0), ConfigError);
}

TEST_CASE("floor_to_bits is the exact dyadic floor") {
  // floor(16 * 1/3) = 5
  REQUIRE(floor_to_bits(make_rational(1, 3), 4) == make_rational(5, 16));
  REQUIRE(floor_to_bits(make_rational(3, 4), 2) == make_rational(3, 4));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Rational x = make_rational(static_cast<long long>(rng() % 1000),
                               1 + static_cast<long long>(rng() % 999));
    int bits = 1 + static_cast<int>(rng() % 40);
    Rational f = floor_to_bits(x, bits);
    Rational step = make_rational(Int(1), Int(1) << bits);
    REQUIRE(f <= x);
    REQUIRE(x < f + step);
  }
}

TEST_CASE("approx_exp_neg close to exp(-x) and within [0,1]") {
  for (double xd : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0}) {
    Rational x(static_cast<long long>(xd * 4), 4);
    Rational r = approx_exp_neg(x, 96);
    REQUIRE(r >= 0);
    REQUIRE(r <= 1);
    REQUIRE(std::abs(to_double(r) - std::exp(-xd)) < 1e-12);
  }
}

TEST_CASE("approx_ln close to log") {
  for (long long n : {2, 3, 7, 100, 10000}) {
    Rational r = approx_ln(Int(n), 64);
    REQUIRE(std::abs(to_double(r) - std::log(static_cast<double>(n))) < 1e-9);
  }
  REQUIRE(approx_ln(Int(1), 64) == 0);
}

TEST_CASE("approx_sqrt close to sqrt and nonnegative") {
  for (double xd : {0.25, 0.5, 1.0, 2.0, 9.0, 144.0}) {
    Rational x(static_cast<long long>(xd * 4), 4);
    Rational r = approx_sqrt(x, 64);
    REQUIRE(r >= 0);
    REQUIRE(std::abs(to_double(r) - std::sqrt(xd)) < 1e-9);
  }
}
