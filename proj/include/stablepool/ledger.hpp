#pragma once

// 1:1 stablecoin issuance against ETH, backed by an Active collateral pool.
//
// A user locks ETH and receives STABLE at face value; the pool round that
// backs the batch absorbs every price move. Redemption pays the user the face
// value in ETH and settles the backing pool with the batch margin in the same
// step.

#include "stablepool/money.hpp"
#include "stablepool/pool.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stablepool::ledger {

enum class BatchStatus { Outstanding, Redeemed };

struct IssuanceBatch {
    std::string batch_id;
    std::string user_id;
    Amount collateral_eth{0, Currency::Eth};
    Amount stable_issued{0, Currency::Stable};
    double price_at_mint = 0.0;  // VALUE per ETH
    pool::PoolState backing_pool;
    BatchStatus status = BatchStatus::Outstanding;

    bool operator==(const IssuanceBatch&) const = default;
};

struct PegEvent {
    std::uint64_t tick = 0;
    std::string batch_id;
    Amount shortfall{0, Currency::Value};

    bool operator==(const PegEvent&) const = default;
};

enum class EventType { Mint, Redeem };

std::string_view to_string(EventType type) noexcept;

struct LedgerEvent {
    std::uint64_t tick = 0;
    EventType type = EventType::Mint;
    std::string batch_id;
    std::string user_id;
    Amount eth{0, Currency::Eth};        // collateral locked, or ETH paid out
    Amount stable{0, Currency::Stable};  // STABLE issued, or burned
    double price = 0.0;
    std::optional<SignedAmount> margin;  // redeem only
    std::optional<bool> peg_held;        // redeem only

    bool operator==(const LedgerEvent&) const = default;
};

struct LedgerConfig {
    // Required pool ETH per ETH of user collateral.
    double backing_ratio = 1.0;

    bool operator==(const LedgerConfig&) const = default;
};

class LedgerState {
public:
    LedgerState() = default;
    explicit LedgerState(LedgerConfig config);

    const LedgerConfig& config() const noexcept { return config_; }
    const std::map<std::string, IssuanceBatch>& batches() const noexcept { return batches_; }
    const Amount& total_outstanding() const noexcept { return total_outstanding_; }
    const Amount& total_collateral() const noexcept { return total_collateral_; }
    const std::vector<PegEvent>& peg_events() const noexcept { return peg_events_; }
    const std::vector<LedgerEvent>& events() const noexcept { return events_; }
    // Rounding residue of redemptions, in ETH base units.
    const Amount& dust_eth() const noexcept { return dust_eth_; }
    std::uint64_t tick() const noexcept { return tick_; }

    const IssuanceBatch& batch(std::string_view batch_id) const;

    bool operator==(const LedgerState&) const = default;

private:
    friend struct Access;

    LedgerConfig config_;
    std::map<std::string, IssuanceBatch> batches_;
    Amount total_outstanding_{0, Currency::Stable};
    Amount total_collateral_{0, Currency::Eth};
    std::vector<PegEvent> peg_events_;
    std::vector<LedgerEvent> events_;
    Amount dust_eth_{0, Currency::Eth};
    std::uint64_t tick_ = 0;
};

struct MintResult {
    LedgerState ledger;
    IssuanceBatch batch;
};

MintResult mint(const LedgerState& ledger, std::string_view user_id, const Amount& collateral_eth,
                double price, const pool::PoolState& pool);

// collateral valued at current_price minus the STABLE face value, in VALUE.
SignedAmount compute_margin(const IssuanceBatch& batch, double current_price);

struct Redemption {
    Amount user_receives{0, Currency::Eth};
    SignedAmount margin{0, Currency::Value};
    bool peg_held = true;
    Amount shortfall{0, Currency::Value};
    pool::PoolState settled_pool;
    Amount dust_eth{0, Currency::Eth};
};

struct RedeemResult {
    LedgerState ledger;
    Redemption redemption;
};

RedeemResult redeem(const LedgerState& ledger, std::string_view batch_id, double current_price);

// Columns: tick,event_type,batch_id,user_id,eth_base_units,stable_base_units,
// price,margin_value_units,peg_held
std::string events_csv(const LedgerState& ledger);
void write_events_csv(const LedgerState& ledger, const std::filesystem::path& path);

}  // namespace stablepool::ledger
