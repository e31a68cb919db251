#include "stablepool/error.hpp"
#include "stablepool/money.hpp"

#include "doctest.h"

using namespace stablepool;

TEST_CASE("decimal parsing is exact at base-unit precision") {
    CHECK(Amount::eth("2").units() == static_cast<u128>(2'000'000'000'000'000'000ULL));
    CHECK(Amount::eth("0.5").units() == static_cast<u128>(500'000'000'000'000'000ULL));
    CHECK(Amount::eth("1e-18").units() == 1);
    CHECK(Amount::stable("200").units() == 200'000'000);
    CHECK(Amount::value("1.5E+1").units() == 15'000'000);
    CHECK_THROWS_AS(Amount::stable("0.0000001"), Error);
    CHECK_THROWS_AS(Amount::eth("-1"), Error);
    CHECK_THROWS_AS(Amount::eth("1.2.3"), Error);
    CHECK_THROWS_AS(Amount::eth(""), Error);
}

TEST_CASE("decimal rendering") {
    CHECK(Amount::eth("1.333333333333333333").to_decimal() == "1.333333333333333333");
    CHECK(Amount::stable("200").to_decimal() == "200");
    CHECK(SignedAmount(-80'000'000, Currency::Value).to_decimal() == "-80");
    CHECK(SignedAmount(-1, Currency::Value).to_decimal() == "-0.000001");
    CHECK(u128_to_string(~u128{0}) == "340282366920938463463374607431768211455");
}

TEST_CASE("arithmetic refuses mixed currencies and negative results") {
    const auto one_eth = Amount::eth("1");
    const auto one_stable = Amount::stable("1");
    CHECK_THROWS_AS(one_eth + one_stable, Error);
    CHECK_THROWS_AS(one_eth - Amount::eth("2"), Error);
    CHECK_THROWS_AS((void)(one_eth < one_stable), Error);
    CHECK((Amount::eth("2") - one_eth) == one_eth);
}

TEST_CASE("price conversions floor to base units") {
    // 2 ETH at 100 -> 200 STABLE
    CHECK(eth_to_value(Amount::eth("2"), 100, Currency::Stable) == Amount::stable("200"));
    // one wei at 100 is 1e-16 VALUE, below the 1e-6 base unit
    CHECK(eth_to_value(Amount(1, Currency::Eth), 100).is_zero());
    // 200 STABLE at 150 -> 1.333... ETH floored at 1e-18
    CHECK(value_to_eth(Amount::stable("200"), 150).units() == static_cast<u128>(1333333333333333333ULL));
    CHECK(value_to_eth(Amount::stable("200"), 150, Rounding::Ceil).units() ==
          static_cast<u128>(1333333333333333334ULL));
    // non-terminating binary price: 0.1 is not exact, conversion uses its exact double value
    const auto v = eth_to_value(Amount::eth("10"), 0.1);
    CHECK((v.units() == 999'999 || v.units() == 1'000'000));
    CHECK_THROWS_AS(eth_to_value(Amount::eth("1"), 0.0), Error);
    CHECK_THROWS_AS(value_to_eth(Amount::eth("1"), 10.0), Error);
}

TEST_CASE("scale with ceil rounding") {
    CHECK(scale(Amount::eth("3"), 1.5, Rounding::Ceil) == Amount::eth("4.5"));
    CHECK(scale(Amount(3, Currency::Eth), 0.5, Rounding::Ceil).units() == 2);
    CHECK(scale(Amount(3, Currency::Eth), 0.5).units() == 1);
}

TEST_CASE("signed differences") {
    const auto d = SignedAmount::difference(Amount::value("120"), Amount::value("200"));
    CHECK(d.units() == -80'000'000);
    CHECK(d.magnitude() == Amount::value("80"));
    CHECK((-d).units() == 80'000'000);
}
