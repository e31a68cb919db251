#pragma once

// End-to-end episodes: pool round -> mint -> price evolution -> redeem/settle,
// plus the pool-vs-hold sweep around the break-even fill.

#include "stablepool/incentive.hpp"
#include "stablepool/ledger.hpp"
#include "stablepool/market.hpp"
#include "stablepool/money.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stablepool::harness {

inline constexpr const char* kArtifactName = "stablepool";
inline constexpr const char* kArtifactVersion = "0.1.0";

struct AgentSpec {
    std::string id;
    market::AgentPolicy policy;
};

struct PoolSpec {
    Amount total_limit{0, Currency::Eth};
    Amount min_fill{0, Currency::Eth};
};

struct UserSpec {
    std::string id = "user";
    Amount collateral_eth{0, Currency::Eth};
    std::uint64_t mint_tick = 0;
    std::uint64_t redeem_tick = 1;
};

struct SweepSpec {
    double fill_lo = 1.0;
    double fill_hi = 1.0;
    int steps = 2;
};

struct Scenario {
    std::string name;
    PoolSpec pool;
    std::vector<AgentSpec> agents;
    UserSpec user;
    market::PricePath price;
    std::optional<SweepSpec> sweep;
    std::uint64_t seed = 0;
    double backing_ratio = 1.0;
};

// Throws ErrorKind::Scenario on malformed input or violated scenario
// invariants. `seed_override` replaces the file's seed before anything is
// derived from it.
Scenario parse_scenario(std::string_view json_text, std::optional<std::uint64_t> seed_override = std::nullopt);
Scenario load_scenario(const std::filesystem::path& path,
                       std::optional<std::uint64_t> seed_override = std::nullopt);
// Canonical JSON echo of a scenario with every derived seed made explicit;
// parsing it back reproduces the same scenario.
std::string scenario_json(const Scenario& scenario);

struct EpisodeRow {
    std::string investor_id;
    double filled = 0.0;  // ETH
    double fraction = 0.0;
    double pool_pnl = 0.0;  // VALUE
    double hold_pnl = 0.0;  // VALUE
    double advantage = 0.0;  // pool_pnl - hold_pnl
    bool slashed = false;
    Amount filled_eth{0, Currency::Eth};
    SignedAmount pool_pnl_exact{0, Currency::Value};
};

struct ExcludedInvestor {
    std::string investor_id;
    std::string reason;
};

// ETH base units entering and leaving one episode.
struct EthFlow {
    Amount user_collateral{0, Currency::Eth};
    Amount investor_principal{0, Currency::Eth};
    Amount user_payout{0, Currency::Eth};
    Amount investor_payout{0, Currency::Eth};  // returned principal plus rewards
    Amount dust{0, Currency::Eth};

    Amount total_in() const { return user_collateral + investor_principal; }
    Amount total_out() const { return user_payout + investor_payout + dust; }
};

struct CurvePoint {
    double fill = 0.0;
    double pool_pnl = 0.0;
    double hold_pnl = 0.0;
};

struct SweepResult {
    std::vector<CurvePoint> curve;
    std::optional<double> threshold;
    incentive::ThresholdQuery query;
};

struct EpisodeReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    double price_start = 0.0;
    double price_end = 0.0;
    SignedAmount margin{0, Currency::Value};
    std::vector<EpisodeRow> rows;  // ordered by investor id
    bool peg_held = true;
    // Break-even fill inside the realized pool.
    std::optional<double> threshold;
    std::optional<Amount> shortfall;
    std::vector<ExcludedInvestor> excluded;
    Amount stable_issued{0, Currency::Stable};
    EthFlow eth;
    ledger::LedgerState ledger;
    std::optional<SweepResult> sweep;
};

EpisodeReport run_episode(const Scenario& scenario);
// run_episode plus the marginal-investor curve over the configured sweep and
// its threshold. NoSweep when the scenario has none.
EpisodeReport run_sweep(const Scenario& scenario);

// Writes episode.csv, curve.csv (sweep runs only) and manifest.json into
// `directory`, creating it if needed. Returns the written paths.
std::vector<std::filesystem::path> export_report(const EpisodeReport& report, const Scenario& scenario,
                                                 const std::filesystem::path& directory);

std::string episode_csv(const EpisodeReport& report);
std::string curve_csv(const SweepResult& sweep);
std::string manifest_json(const EpisodeReport& report, const Scenario& scenario);

}  // namespace stablepool::harness
