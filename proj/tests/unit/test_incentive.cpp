#include "stablepool/error.hpp"
#include "stablepool/incentive.hpp"

#include "close.hpp"
#include "direct_oracle.hpp"
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace stablepool;
using namespace stablepool::incentive;
using testing_support::rel_close;

namespace {

DistributionInput make_input(std::vector<double> fills, double limit, double amount) {
    DistributionInput in;
    in.total_limit = limit;
    in.cumulated_amount = amount;
    for (std::size_t i = 0; i < fills.size(); ++i) in.fills.push_back({"inv" + std::to_string(i), fills[i]});
    return in;
}

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("compute_incentive evaluates exp(filled - T) / filled") {
    CHECK(compute_incentive(4, 4) == 0.25);
    // 50-digit values: e^-3/2 and e^-2/3
    CHECK(rel_close(compute_incentive(2, 5), 0.02489353418393197149, 1e-15));
    CHECK(rel_close(compute_incentive(3, 5), 0.045111761078870897298, 1e-15));
}

TEST_CASE("compute_incentive rejects bad inputs") {
    CHECK(kind_of([] { compute_incentive(0, 5); }) == ErrorKind::Domain);
    CHECK(kind_of([] { compute_incentive(-1, 5); }) == ErrorKind::Domain);
    CHECK(kind_of([] { compute_incentive(1, 0); }) == ErrorKind::Domain);
    CHECK(kind_of([] { compute_incentive(702, 1); }) == ErrorKind::Overflow);
    CHECK(std::isfinite(compute_incentive(700.5, 1)));
}

TEST_CASE("single investor takes the whole margin") {
    const auto r = compute_distribution(make_input({5}, 5, 100));
    REQUIRE(r.per_investor.size() == 1);
    CHECK(r.per_investor[0].fraction == 1.0);
    CHECK(r.per_investor[0].final_incentive == 100.0);
}

TEST_CASE("equal fills split evenly") {
    const auto r = compute_distribution(make_input({2, 2, 2}, 6, 30));
    for (const auto& s : r.per_investor) CHECK(rel_close(s.final_incentive, 10.0, 1e-14));
}

TEST_CASE("two investors {2,3} with T = 5") {
    const auto up = compute_distribution(make_input({2, 3}, 5, 10));
    CHECK(rel_close(up.per_investor[0].fraction, 0.3555950173551955006, 1e-14));
    CHECK(rel_close(up.per_investor[1].fraction, 0.6444049826448044994, 1e-14));
    CHECK(rel_close(up.per_investor[0].final_incentive, 3.555950173551955006, 1e-14));
    CHECK(rel_close(up.per_investor[1].final_incentive, 6.444049826448044994, 1e-14));
    CHECK(rel_close(up.lsum, 0.02489353418393197149 + 0.045111761078870897298, 1e-14));

    const auto down = compute_distribution(make_input({2, 3}, 5, -10));
    CHECK(rel_close(down.per_investor[0].final_incentive, -3.555950173551955006, 1e-14));
    CHECK(rel_close(down.per_investor[1].final_incentive, -6.444049826448044994, 1e-14));
    CHECK(down.per_investor[0].fraction == up.per_investor[0].fraction);
}

TEST_CASE("distribution input validation") {
    CHECK(kind_of([] { compute_distribution(make_input({}, 5, 1)); }) == ErrorKind::Domain);
    CHECK(kind_of([] { compute_distribution(make_input({2, 0}, 5, 1)); }) == ErrorKind::Domain);
    CHECK(kind_of([] { compute_distribution(make_input({3, 3}, 5, 1)); }) == ErrorKind::Domain);
    CHECK(kind_of([] { compute_distribution(make_input({1}, 5, NAN)); }) == ErrorKind::Domain);
}

TEST_CASE("direct evaluation underflows where log-space does not") {
    const auto in = make_input({2, 3}, 800, 10);
    CHECK(kind_of([&] { compute_distribution(in, Evaluation::Direct); }) == ErrorKind::Underflow);
    const auto r = compute_distribution(in);
    CHECK(r.lsum == 0.0);
    CHECK(rel_close(r.per_investor[0].fraction, 0.3555950173551955006, 1e-14));
    CHECK(rel_close(r.per_investor[0].fraction + r.per_investor[1].fraction, 1.0, 1e-15));
}

TEST_CASE("direct and log-space agree away from underflow") {
    const auto in = make_input({1.5, 4, 7.25}, 20, 1234.5);
    const auto a = compute_distribution(in);
    const auto b = compute_distribution(in, Evaluation::Direct);
    for (std::size_t i = 0; i < 3; ++i) CHECK(rel_close(a.per_investor[i].fraction, b.per_investor[i].fraction, 1e-13));
}

TEST_CASE("pool_return looks the investor up by id") {
    auto in = make_input({5}, 5, 0);
    CHECK(pool_return("inv0", in) == 0.0);
    in = make_input({2, 3}, 5, 10);
    CHECK(rel_close(pool_return("inv0", in), 3.555950173551955006, 1e-14));
    in.cumulated_amount = -10;
    CHECK(rel_close(pool_return("inv1", in), -6.444049826448044994, 1e-14));
    CHECK(kind_of([&] { pool_return("nobody", in); }) == ErrorKind::NotFound);
}

TEST_CASE("hold_baseline") {
    CHECK(hold_baseline(1, 100, 100) == 0.0);
    CHECK(hold_baseline(2, 100, 150) == 100.0);
    CHECK(hold_baseline(3, 200, 150) == -150.0);
    CHECK(kind_of([] { hold_baseline(0, 100, 100); }) == ErrorKind::Domain);
    CHECK(kind_of([] { hold_baseline(1, -1, 100); }) == ErrorKind::Domain);
}

TEST_CASE("dust fills: the smaller fill gets the larger fraction") {
    const auto r = compute_distribution(make_input({0.01, 0.5}, 1, 1));
    CHECK(r.per_investor[0].fraction > r.per_investor[1].fraction);
    CHECK(rel_close(r.per_investor[0].fraction, 0.96838576419849813141, 1e-13));
}

TEST_CASE("property: normalization, conservation, T-invariance, symmetry") {
    std::mt19937_64 rng(20261018);
    std::uniform_int_distribution<int> count(1, 8);
    std::uniform_real_distribution<double> fill(1, 50), slack(0, 20), amount(-1e4, 1e4);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> fills(static_cast<std::size_t>(count(rng)));
        for (auto& f : fills) f = fill(rng);
        const double limit = std::accumulate(fills.begin(), fills.end(), 0.0) + slack(rng);
        const double a = amount(rng);
        const auto r = compute_distribution(make_input(fills, limit, a));

        double fsum = 0, isum = 0;
        for (const auto& s : r.per_investor) {
            fsum += s.fraction;
            isum += s.final_incentive;
        }
        CHECK(rel_close(fsum, 1.0, 1e-12));
        CHECK(rel_close(isum, a, 1e-9, 1e-9));

        const auto shifted = compute_distribution(make_input(fills, limit + 10, a));
        for (std::size_t i = 0; i < fills.size(); ++i) {
            CHECK(rel_close(shifted.per_investor[i].fraction, r.per_investor[i].fraction, 1e-12));
        }

        auto perm = fills;
        std::reverse(perm.begin(), perm.end());
        const auto rev = compute_distribution(make_input(perm, limit, a));
        for (std::size_t i = 0; i < fills.size(); ++i) {
            CHECK(rev.per_investor[fills.size() - 1 - i].fraction == doctest::Approx(r.per_investor[i].fraction).epsilon(1e-14));
        }
    }
}

TEST_CASE("property: fraction increases with fill above one ETH") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> fill(1, 40);
    for (int trial = 0; trial < 300; ++trial) {
        const double other = fill(rng);
        double x = fill(rng), y = fill(rng);
        if (x > y) std::swap(x, y);
        if (y - x < 1e-9) continue;
        const double limit = other + y + 1;
        const auto lo = compute_distribution(make_input({x, other}, limit, 1));
        const auto hi = compute_distribution(make_input({y, other}, limit, 1));
        CHECK(lo.per_investor[0].fraction < hi.per_investor[0].fraction);
    }
}

TEST_CASE("find_crossing returns the smallest crossing") {
    // Roots at 1.5 and 3.5; the grid brackets both.
    const auto f = [](double x) { return (x - 1.5) * (x - 3.5); };
    const auto root = find_crossing(f, {1, 5});
    REQUIRE(root);
    CHECK(*root == doctest::Approx(1.5).epsilon(1e-14));
    CHECK_FALSE(find_crossing([](double) { return 0.0; }, {1, 2}));
    CHECK_FALSE(find_crossing([](double x) { return x; }, {1, 2}));
    CHECK(kind_of([] { find_crossing([](double x) { return x; }, {2, 2}); }) == ErrorKind::Domain);
}

TEST_CASE("find_threshold on the frozen sweep fixture") {
    ThresholdQuery q;
    q.background_fills = {2, 3};
    q.total_limit = 10;
    q.price_start = 100;
    q.price_end = 110;
    q.margin = 50;
    q.search_domain = {1, 5};
    const auto x = find_threshold(q);
    REQUIRE(x);
    // 50-digit root of the marginal advantage, bracketed by a 1e6-point grid.
    CHECK(std::abs(*x - 1.037442028479901262974718) < 1e-9);
    CHECK(std::abs(marginal_advantage(q, *x)) < 1e-9);
}

TEST_CASE("find_threshold edge cases") {
    ThresholdQuery q;
    q.background_fills = {2, 3};
    q.total_limit = 10;
    q.price_start = 100;
    q.price_end = 110;
    q.margin = 0;
    q.search_domain = {1, 5};
    CHECK_FALSE(find_threshold(q));

    q.margin = 50;
    q.search_domain = {3, 3};
    CHECK(kind_of([&] { find_threshold(q); }) == ErrorKind::Domain);
    q.search_domain = {0.5, 3};
    CHECK(kind_of([&] { find_threshold(q); }) == ErrorKind::Domain);
    q.search_domain = {1, 5.5};
    CHECK(kind_of([&] { find_threshold(q); }) == ErrorKind::Domain);
}

TEST_CASE("partition threshold splits the {2,3} pool") {
    const auto in = make_input({2, 3}, 5, 50);
    const auto x = partition_threshold(in, 100, 110, {1, 5});
    REQUIRE(x);
    CHECK(std::abs(*x - 2.766657572663205862299962) < 1e-9);
    CHECK_FALSE(partition_threshold(make_input({2, 3}, 5, 0), 100, 100, {1, 5}));
}

TEST_CASE("oracle agrees with the engine on a mixed input") {
    const std::vector<double> fills{1, 2.5, 9, 30};
    const auto o = oracle::evaluate(fills, 45, -777);
    const auto r = compute_distribution(make_input(fills, 45, -777));
    for (std::size_t i = 0; i < fills.size(); ++i) {
        CHECK(rel_close(r.per_investor[i].fraction, o.fraction[i], 1e-12));
        CHECK(rel_close(r.per_investor[i].raw_incentive, o.raw[i], 1e-13));
    }
}
