#pragma once

// One collateral-pool round as an immutable state machine:
//
//   Open -> Committing -> Revealing -> Active -> Settled
//
// Investors commit SHA-256 digests of their contribution while the pool fills,
// reveal once commitments close, and back one issuance batch while Active.
// Every operation takes a state by const reference and returns a new state.

#include "stablepool/error.hpp"
#include "stablepool/money.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stablepool::pool {

using Digest = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 32>;

// SHA-256(amount as 16-byte big-endian base units || nonce || UTF-8 investor id)
Digest commitment_digest(const Amount& amount, const Nonce& nonce, std::string_view investor_id);
// The exact preimage bytes hashed by commitment_digest.
std::vector<std::uint8_t> commitment_preimage(const Amount& amount, const Nonce& nonce,
                                              std::string_view investor_id);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Parses exactly 64 hex characters.
Digest digest_from_hex(std::string_view hex);
Nonce nonce_from_hex(std::string_view hex);

enum class Phase { Open, Committing, Revealing, Active, Settled };

std::string_view to_string(Phase phase) noexcept;

struct PhaseEntry {
    Phase phase = Phase::Open;
    std::uint64_t tick = 0;

    bool operator==(const PhaseEntry&) const = default;
};

struct RevealedContribution {
    Amount amount;
    Nonce nonce{};

    bool operator==(const RevealedContribution&) const = default;
};

struct CommitRecord {
    std::string investor_id;
    Digest digest{};
    std::optional<RevealedContribution> revealed;
    // Set by a reveal whose preimage did not match the digest.
    bool voided = false;

    bool operator==(const CommitRecord&) const = default;
};

struct InvestorSettlement {
    std::string investor_id;
    Amount principal;           // ETH revealed into the pool
    double fraction = 0.0;      // share of the margin
    Amount principal_returned;  // ETH, principal minus slashed
    Amount slashed_eth;         // ETH moved to cover a negative margin
    Amount reward_eth;          // ETH paid out of a positive margin
    SignedAmount reward_or_loss;  // VALUE
    bool slashed = false;       // loss reached the principal cap

    bool operator==(const InvestorSettlement&) const = default;
};

struct SettlementReport {
    SignedAmount margin;  // VALUE
    double settlement_price = 0.0;
    std::vector<InvestorSettlement> per_investor;  // ordered by investor id
    bool insolvent = false;
    Amount shortfall{0, Currency::Value};

    bool operator==(const SettlementReport&) const = default;
};

class PoolState;

// Thrown by reveal() when the preimage does not hash to the stored digest.
// Carries the resulting state, in which the commitment is voided.
class DigestMismatch : public Error {
public:
    DigestMismatch(const std::string& message, const PoolState& voided);
    const PoolState& state() const noexcept;

private:
    std::shared_ptr<const PoolState> state_;
};

class PoolState {
public:
    Phase phase() const noexcept { return history_.back().phase; }
    const std::vector<PhaseEntry>& phase_history() const noexcept { return history_; }
    std::uint64_t tick() const noexcept { return tick_; }
    const Amount& total_limit() const noexcept { return total_limit_; }
    const Amount& min_fill() const noexcept { return min_fill_; }
    const Amount& revealed_total() const noexcept { return revealed_total_; }
    const std::map<std::string, CommitRecord>& commits() const noexcept { return commits_; }
    const std::optional<SettlementReport>& settlement() const noexcept { return settlement_; }

    // Revealed contributions in investor-id order. Only meaningful from Revealing on.
    std::vector<std::pair<std::string, Amount>> participants() const;

    bool operator==(const PoolState&) const = default;

private:
    friend PoolState open_pool(const Amount&, const Amount&);
    friend PoolState commit(const PoolState&, std::string_view, const Digest&);
    friend PoolState close_commits(const PoolState&);
    friend PoolState reveal(const PoolState&, std::string_view, const Amount&, const Nonce&);
    friend PoolState activate(const PoolState&);
    friend PoolState settle(const PoolState&, const SignedAmount&, double, std::optional<Amount>);

    PoolState advanced(Phase next) const;

    std::vector<PhaseEntry> history_{PhaseEntry{}};
    std::uint64_t tick_ = 0;
    Amount total_limit_{0, Currency::Eth};
    Amount min_fill_{0, Currency::Eth};
    Amount revealed_total_{0, Currency::Eth};
    std::map<std::string, CommitRecord> commits_;
    std::optional<SettlementReport> settlement_;
};

PoolState open_pool(const Amount& total_limit, const Amount& min_fill);
PoolState commit(const PoolState& state, std::string_view investor_id, const Digest& digest);
PoolState close_commits(const PoolState& state);
// Throws DigestMismatch (voiding the commitment) when the preimage is wrong.
PoolState reveal(const PoolState& state, std::string_view investor_id, const Amount& amount,
                 const Nonce& nonce);
// Drops unrevealed and voided commitments.
PoolState activate(const PoolState& state);

// Distributes `margin` (VALUE) over revealed fills. A positive margin pays
// rewards; `distributable_eth` is the ETH surplus backing them (defaults to the
// margin converted at the settlement price). A negative margin slashes
// principals, each loss capped at the principal's value at settlement_price;
// the part of a loss above a cap moves to uncapped investors by fraction.
PoolState settle(const PoolState& state, const SignedAmount& margin, double settlement_price,
                 std::optional<Amount> distributable_eth = std::nullopt);

// Largest-remainder apportionment of `total` base units by `weights`.
// The result sums to `total` exactly; ties go to the lower index.
std::vector<u128> apportion(u128 total, std::span<const double> weights);

}  // namespace stablepool::pool
