#include "stablepool/market.hpp"

#include "stablepool/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stablepool::market {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0; }

}  // namespace

GbmStep gbm_step(const GbmParams& params, double price, std::mt19937_64 generator) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z = params.volatility > 0 ? normal(generator) : 0.0;
    return {price * std::exp(params.drift + params.volatility * z), generator};
}

PricePath PricePath::deterministic(std::vector<PricePoint> points, std::uint64_t horizon) {
    if (points.empty()) throw Error(ErrorKind::Domain, "deterministic path needs at least one point");
    if (points.front().tick != 0) throw Error(ErrorKind::Domain, "deterministic path must start at tick 0");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!positive_finite(points[i].price)) throw Error(ErrorKind::Domain, "path prices must be positive");
        if (i > 0 && points[i].tick <= points[i - 1].tick) {
            throw Error(ErrorKind::Domain, "path ticks must be strictly increasing");
        }
    }
    PricePath path;
    const std::uint64_t last = std::max(horizon, points.back().tick);
    if (last > 10'000'000) throw Error(ErrorKind::Domain, "path horizon too long");
    path.prices_.resize(last + 1);
    std::size_t k = 0;
    for (std::uint64_t t = 0; t <= last; ++t) {
        while (k + 1 < points.size() && points[k + 1].tick <= t) ++k;
        path.prices_[t] = points[k].price;
    }
    path.points_ = std::move(points);
    return path;
}

PricePath PricePath::gbm(const GbmParams& params, std::uint64_t horizon) {
    if (!positive_finite(params.start)) throw Error(ErrorKind::Domain, "GBM start price must be positive");
    if (!std::isfinite(params.drift)) throw Error(ErrorKind::Domain, "GBM drift must be finite");
    if (!std::isfinite(params.volatility) || params.volatility < 0) {
        throw Error(ErrorKind::Domain, "GBM volatility must be non-negative");
    }
    if (horizon > 10'000'000) throw Error(ErrorKind::Domain, "path horizon too long");
    PricePath path;
    path.gbm_ = params;
    path.prices_.reserve(horizon + 1);
    path.prices_.push_back(params.start);
    std::mt19937_64 generator(params.seed);
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        auto step = gbm_step(params, path.prices_.back(), std::move(generator));
        if (!positive_finite(step.price)) {
            throw Error(ErrorKind::Domain, "GBM price left the positive finite range at tick " + std::to_string(t));
        }
        path.prices_.push_back(step.price);
        generator = std::move(step.generator);
    }
    return path;
}

double PricePath::price(std::uint64_t tick) const {
    if (tick >= prices_.size()) {
        throw Error(ErrorKind::HorizonExceeded,
                    "tick " + std::to_string(tick) + " beyond horizon " + std::to_string(horizon()));
    }
    return prices_[tick];
}

std::string policy_name(const AgentPolicy& policy) {
    return std::visit(overloaded{[](const MaxFill&) { return std::string("max_fill"); },
                                 [](const FixedFraction&) { return std::string("fixed_fraction"); },
                                 [](const UniformRandom&) { return std::string("uniform_random"); }},
                      policy);
}

const Amount& policy_budget(const AgentPolicy& policy) {
    return std::visit([](const auto& p) -> const Amount& { return p.budget; }, policy);
}

u128 uniform_u128(std::mt19937_64& generator, u128 lo, u128 hi) {
    if (lo > hi) throw Error(ErrorKind::Domain, "empty uniform range");
    const u128 span = hi - lo;
    if (span <= std::numeric_limits<std::uint64_t>::max()) {
        std::uniform_int_distribution<std::uint64_t> dist(0, static_cast<std::uint64_t>(span));
        return lo + dist(generator);
    }
    const u128 all_ones = ~u128{0};
    const auto draw128 = [&] { return (static_cast<u128>(generator()) << 64) | generator(); };
    if (span == all_ones) return draw128();
    // Reject the incomplete top bucket.
    const u128 range = span + 1;
    const u128 limit = all_ones - (all_ones % range);
    for (;;) {
        const u128 draw = draw128();
        if (draw < limit) return lo + draw % range;
    }
}

Amount decide_fill(const AgentPolicy& policy, const Amount& remaining_capacity, const Amount& min_fill) {
    const Amount zero(0, Currency::Eth);
    const Amount& budget = policy_budget(policy);
    if (remaining_capacity < min_fill || budget < min_fill) return zero;
    const Amount ceiling = std::min(budget, remaining_capacity);

    return std::visit(
        overloaded{
            [&](const MaxFill&) { return ceiling; },
            [&](const FixedFraction& p) {
                if (!(p.fraction > 0 && p.fraction <= 1)) {
                    throw Error(ErrorKind::Domain, "fixed fraction must lie in (0, 1]");
                }
                const Amount wanted = scale(p.budget, p.fraction);
                return std::clamp(wanted, min_fill, ceiling);
            },
            [&](const UniformRandom& p) {
                std::mt19937_64 generator(p.seed);
                return Amount(uniform_u128(generator, min_fill.units(), ceiling.units()), Currency::Eth);
            }},
        policy);
}

}  // namespace stablepool::market
