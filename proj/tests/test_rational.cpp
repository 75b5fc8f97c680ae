#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pmask/rational.hpp"

using namespace pmask;

TEST_CASE("rational parsing") {
  CHECK(rat_parse("3") == Rat(3));
  CHECK(rat_parse("-2") == Rat(-2));
  CHECK(rat_parse("0.05") == Rat(1, 20));
  CHECK(rat_parse("0.5") == Rat(1, 2));
  CHECK(rat_parse("1/20") == Rat(1, 20));
  CHECK(rat_parse("-3/6") == Rat(-1, 2));
  CHECK(rat_parse("2.25") == Rat(9, 4));
  CHECK_FALSE(rat_parse("").has_value());
  CHECK_FALSE(rat_parse("1/0").has_value());
  CHECK_FALSE(rat_parse("1.2.3").has_value());
  CHECK_FALSE(rat_parse("x").has_value());
}

TEST_CASE("rational formatting is canonical") {
  CHECK(rat_to_string(Rat(2, 4)) == "1/2");
  CHECK(rat_to_string(Rat(4, 2)) == "2");
  CHECK(rat_to_string(Rat(-1, 3)) == "-1/3");
  CHECK(rat_is_integer(Rat(6, 3)));
  CHECK_FALSE(rat_is_integer(Rat(1, 3)));
}

namespace {

// Independent fraction oracle: numerator/denominator pairs reduced by gcd,
// combined with plain big-integer cross multiplication.
struct Frac {
  BigInt num, den;
  static Frac make(BigInt n, BigInt d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    BigInt g = boost::multiprecision::gcd(n < 0 ? BigInt(-n) : n, d);
    if (g == 0) g = 1;
    return {n / g, d / g};
  }
  Frac add(const Frac& o) const { return make(num * o.den + o.num * den, den * o.den); }
  Frac sub(const Frac& o) const { return make(num * o.den - o.num * den, den * o.den); }
  Frac mul(const Frac& o) const { return make(num * o.num, den * o.den); }
  Frac div(const Frac& o) const { return make(num * o.den, den * o.num); }
};

}  // namespace

TEST_CASE("rational arithmetic agrees with a big-integer fraction oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-40, 40), den(1, 40), op(0, 3);
  Rat value(1);
  Frac oracle{1, 1};
  for (int step = 0; step < 2000; ++step) {
    Rat operand(num(rng), den(rng));
    Frac frac = Frac::make(numerator(operand), denominator(operand));
    switch (op(rng)) {
      case 0:
        value += operand;
        oracle = oracle.add(frac);
        break;
      case 1:
        value -= operand;
        oracle = oracle.sub(frac);
        break;
      case 2:
        value *= operand;
        oracle = oracle.mul(frac);
        break;
      default:
        if (operand == 0) continue;
        value /= operand;
        oracle = oracle.div(frac);
        break;
    }
    REQUIRE(numerator(value) == oracle.num);
    REQUIRE(denominator(value) == oracle.den);
  }
}
