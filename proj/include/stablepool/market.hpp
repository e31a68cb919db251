#pragma once

// Price paths and investor fill policies.

#include "stablepool/money.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stablepool::market {

// Name of the random generator recorded in run manifests.
inline constexpr const char* kGeneratorName = "std::mt19937_64 + std::normal_distribution<double> (libstdc++)";

struct PricePoint {
    std::uint64_t tick = 0;
    double price = 0.0;
};

struct GbmParams {
    double start = 0.0;
    double drift = 0.0;       // log-price drift per tick
    double volatility = 0.0;  // log-price standard deviation per sqrt(tick)
    std::uint64_t seed = 0;
};

// One log-normal step: ln S' = ln S + drift + volatility * Z, Z ~ N(0, 1).
// The generator is taken by value and returned advanced.
struct GbmStep {
    double price = 0.0;
    std::mt19937_64 generator;
};
GbmStep gbm_step(const GbmParams& params, double price, std::mt19937_64 generator);

class PricePath {
public:
    // Piecewise-constant path through the points; ticks strictly increasing,
    // the first at tick 0. Horizon is the last point's tick unless larger.
    static PricePath deterministic(std::vector<PricePoint> points, std::uint64_t horizon = 0);
    static PricePath gbm(const GbmParams& params, std::uint64_t horizon);

    // Price at `tick`; HorizonExceeded past the horizon.
    double price(std::uint64_t tick) const;
    std::uint64_t horizon() const noexcept { return static_cast<std::uint64_t>(prices_.size() - 1); }
    bool is_gbm() const noexcept { return gbm_.has_value(); }
    const std::optional<GbmParams>& gbm_params() const noexcept { return gbm_; }
    const std::vector<PricePoint>& points() const noexcept { return points_; }

private:
    std::vector<double> prices_;  // one per tick, 0..horizon
    std::optional<GbmParams> gbm_;
    std::vector<PricePoint> points_;
};

inline double next_price(const PricePath& path, std::uint64_t tick) { return path.price(tick); }

struct MaxFill {
    Amount budget{0, Currency::Eth};
};

struct FixedFraction {
    Amount budget{0, Currency::Eth};
    double fraction = 1.0;  // (0, 1]
};

struct UniformRandom {
    Amount budget{0, Currency::Eth};
    std::uint64_t seed = 0;
};

using AgentPolicy = std::variant<MaxFill, FixedFraction, UniformRandom>;

std::string policy_name(const AgentPolicy& policy);
const Amount& policy_budget(const AgentPolicy& policy);

// Fill chosen from the agent's own budget, the capacity it can see and the
// pool minimum. Zero means the agent abstains.
Amount decide_fill(const AgentPolicy& policy, const Amount& remaining_capacity, const Amount& min_fill);

// Uniform integer in [lo, hi] by rejection from 64-bit draws.
u128 uniform_u128(std::mt19937_64& generator, u128 lo, u128 hi);

}  // namespace stablepool::market
