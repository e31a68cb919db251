#include "stablepool/pool.hpp"

#include "stablepool/incentive.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stablepool::pool {

namespace {

Error wrong_phase(std::string_view op, Phase actual) {
    return Error(ErrorKind::WrongPhase,
                 std::string(op) + " not allowed in phase " + std::string(to_string(actual)));
}

void require_phase(const PoolState& state, Phase expected, std::string_view op) {
    if (state.phase() != expected) throw wrong_phase(op, state.phase());
}

void require_eth(const Amount& a, const char* what) {
    if (a.currency() != Currency::Eth) {
        throw Error(ErrorKind::CurrencyMismatch, std::string(what) + " must be denominated in ETH");
    }
}

template <std::size_t N>
std::array<std::uint8_t, N> bytes_from_hex(std::string_view hex, const char* what) {
    if (hex.size() != 2 * N) {
        throw Error(ErrorKind::Domain, std::string(what) + " must be " + std::to_string(2 * N) + " hex characters");
    }
    const auto nibble = [&](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
        throw Error(ErrorKind::Domain, std::string(what) + " contains a non-hex character");
    };
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return out;
}

}  // namespace

std::vector<std::uint8_t> commitment_preimage(const Amount& amount, const Nonce& nonce,
                                              std::string_view investor_id) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + nonce.size() + investor_id.size());
    const u128 units = amount.units();
    for (int shift = 120; shift >= 0; shift -= 8) {
        bytes.push_back(static_cast<std::uint8_t>(units >> shift));
    }
    bytes.insert(bytes.end(), nonce.begin(), nonce.end());
    bytes.insert(bytes.end(), investor_id.begin(), investor_id.end());
    return bytes;
}

Digest commitment_digest(const Amount& amount, const Nonce& nonce, std::string_view investor_id) {
    const auto preimage = commitment_preimage(amount, nonce, investor_id);
    Digest digest{};
    unsigned int len = 0;
    if (EVP_Digest(preimage.data(), preimage.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != digest.size()) {
        throw Error(ErrorKind::Internal, "SHA-256 evaluation failed");
    }
    return digest;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

Digest digest_from_hex(std::string_view hex) { return bytes_from_hex<32>(hex, "digest"); }
Nonce nonce_from_hex(std::string_view hex) { return bytes_from_hex<32>(hex, "nonce"); }

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::Open: return "Open";
        case Phase::Committing: return "Committing";
        case Phase::Revealing: return "Revealing";
        case Phase::Active: return "Active";
        case Phase::Settled: return "Settled";
    }
    return "?";
}

DigestMismatch::DigestMismatch(const std::string& message, const PoolState& voided)
    : Error(ErrorKind::DigestMismatch, message), state_(std::make_shared<const PoolState>(voided)) {}

const PoolState& DigestMismatch::state() const noexcept { return *state_; }

std::vector<std::pair<std::string, Amount>> PoolState::participants() const {
    std::vector<std::pair<std::string, Amount>> out;
    for (const auto& [id, rec] : commits_) {
        if (rec.revealed && !rec.voided) out.emplace_back(id, rec.revealed->amount);
    }
    return out;
}

PoolState PoolState::advanced(Phase next) const {
    PoolState s = *this;
    ++s.tick_;
    s.history_.push_back({next, s.tick_});
    return s;
}

PoolState open_pool(const Amount& total_limit, const Amount& min_fill) {
    require_eth(total_limit, "total limit");
    require_eth(min_fill, "min fill");
    if (total_limit.is_zero()) throw Error(ErrorKind::Domain, "total limit must be positive");
    if (min_fill.is_zero()) throw Error(ErrorKind::Domain, "min fill must be positive");
    if (min_fill > total_limit) throw Error(ErrorKind::Domain, "min fill exceeds total limit");
    PoolState s;
    s.total_limit_ = total_limit;
    s.min_fill_ = min_fill;
    return s.advanced(Phase::Committing);
}

PoolState commit(const PoolState& state, std::string_view investor_id, const Digest& digest) {
    require_phase(state, Phase::Committing, "commit");
    const std::string id(investor_id);
    if (state.commits_.contains(id)) {
        throw Error(ErrorKind::DuplicateCommit, "investor '" + id + "' already committed");
    }
    PoolState s = state;
    ++s.tick_;
    s.commits_.emplace(id, CommitRecord{id, digest, std::nullopt, false});
    return s;
}

PoolState close_commits(const PoolState& state) {
    require_phase(state, Phase::Committing, "close_commits");
    if (state.commits_.empty()) throw Error(ErrorKind::EmptyPool, "no commitments to close");
    return state.advanced(Phase::Revealing);
}

PoolState reveal(const PoolState& state, std::string_view investor_id, const Amount& amount,
                 const Nonce& nonce) {
    require_phase(state, Phase::Revealing, "reveal");
    require_eth(amount, "revealed amount");
    const std::string id(investor_id);
    const auto it = state.commits_.find(id);
    if (it == state.commits_.end()) {
        throw Error(ErrorKind::UnknownInvestor, "investor '" + id + "' never committed");
    }
    const CommitRecord& rec = it->second;
    if (rec.voided) throw Error(ErrorKind::DigestMismatch, "commitment of '" + id + "' was voided");
    if (rec.revealed) throw Error(ErrorKind::AlreadyRevealed, "investor '" + id + "' already revealed");

    if (commitment_digest(amount, nonce, id) != rec.digest) {
        PoolState voided = state;
        ++voided.tick_;
        voided.commits_.at(id).voided = true;
        throw DigestMismatch("reveal of '" + id + "' does not match its commitment", voided);
    }
    if (amount < state.min_fill_) {
        throw Error(ErrorKind::BelowMinFill, "reveal of '" + id + "' is " + amount.to_decimal() +
                                                 " ETH, below the minimum " + state.min_fill_.to_decimal());
    }
    if (amount > state.total_limit_ - state.revealed_total_) {
        throw Error(ErrorKind::Overfill, "reveal of '" + id + "' would fill " +
                                             (state.revealed_total_ + amount).to_decimal() +
                                             " ETH past the limit " + state.total_limit_.to_decimal());
    }
    PoolState s = state;
    ++s.tick_;
    s.commits_.at(id).revealed = RevealedContribution{amount, nonce};
    s.revealed_total_ += amount;
    return s;
}

PoolState activate(const PoolState& state) {
    require_phase(state, Phase::Revealing, "activate");
    PoolState s = state.advanced(Phase::Active);
    std::erase_if(s.commits_, [](const auto& kv) { return !kv.second.revealed || kv.second.voided; });
    if (s.commits_.empty()) throw Error(ErrorKind::NoReveals, "no valid reveals to activate the pool");
    return s;
}

std::vector<u128> apportion(u128 total, std::span<const double> weights) {
    const std::size_t n = weights.size();
    std::vector<u128> out(n, 0);
    if (n == 0) {
        if (total != 0) throw Error(ErrorKind::Domain, "cannot apportion a non-zero total over no weights");
        return out;
    }
    long double weight_sum = 0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0) throw Error(ErrorKind::Domain, "apportion weights must be non-negative");
        weight_sum += w;
    }
    if (!(weight_sum > 0)) throw Error(ErrorKind::Domain, "apportion weights sum to zero");

    const auto total_ld = static_cast<long double>(total);
    std::vector<long double> remainder(n);
    u128 assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double quota = total_ld * (weights[i] / weight_sum);
        const long double whole = std::floor(quota);
        out[i] = static_cast<u128>(whole);
        remainder[i] = quota - whole;
        assigned += out[i];
    }
    // Rounding in the quotas can overshoot by a unit or two; take it back from
    // the smallest remainders first.
    while (assigned > total) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (out[i] > 0 && (pick == n || remainder[i] < remainder[pick])) pick = i;
        }
        --out[pick];
        remainder[pick] += 1;
        --assigned;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
        if (weights[order[k]] > 0) {
            ++out[order[k]];
            ++assigned;
        }
    }
    return out;
}

namespace {

std::vector<double> fractions_of(const std::vector<InvestorSettlement>& rows,
                                 const std::vector<std::size_t>& subset, const Amount& total_limit) {
    incentive::DistributionInput input;
    input.total_limit = total_limit.to_real();
    for (std::size_t i : subset) input.fills.push_back({rows[i].investor_id, rows[i].principal.to_real()});
    const auto result = incentive::compute_distribution(input);
    std::vector<double> out;
    out.reserve(subset.size());
    for (const auto& share : result.per_investor) out.push_back(share.fraction);
    return out;
}

}  // namespace

PoolState settle(const PoolState& state, const SignedAmount& margin, double settlement_price,
                 std::optional<Amount> distributable_eth) {
    require_phase(state, Phase::Active, "settle");
    if (margin.currency() != Currency::Value) {
        throw Error(ErrorKind::CurrencyMismatch, "margin must be denominated in VALUE");
    }
    if (!std::isfinite(settlement_price) || !(settlement_price > 0)) {
        throw Error(ErrorKind::Domain, "settlement price must be positive");
    }
    if (distributable_eth) require_eth(*distributable_eth, "distributable surplus");

    SettlementReport report;
    report.margin = margin;
    report.settlement_price = settlement_price;
    for (const auto& [id, amount] : state.participants()) {
        InvestorSettlement row;
        row.investor_id = id;
        row.principal = amount;
        row.principal_returned = amount;
        row.slashed_eth = Amount(0, Currency::Eth);
        row.reward_eth = Amount(0, Currency::Eth);
        row.reward_or_loss = SignedAmount(0, Currency::Value);
        report.per_investor.push_back(row);
    }
    auto& rows = report.per_investor;
    std::vector<std::size_t> everyone(rows.size());
    std::iota(everyone.begin(), everyone.end(), std::size_t{0});
    const auto fractions = fractions_of(rows, everyone, state.total_limit_);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].fraction = fractions[i];

    if (!margin.is_negative()) {
        const Amount gain = margin.magnitude();
        const Amount surplus = distributable_eth.value_or(value_to_eth(gain, settlement_price));
        const auto value_shares = apportion(gain.units(), fractions);
        const auto eth_shares = apportion(surplus.units(), fractions);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i].reward_or_loss = SignedAmount(static_cast<i128>(value_shares[i]), Currency::Value);
            rows[i].reward_eth = Amount(eth_shares[i], Currency::Eth);
        }
    } else {
        std::vector<u128> caps(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            caps[i] = eth_to_value(rows[i].principal, settlement_price).units();
        }
        std::vector<u128> loss(rows.size(), 0);
        std::vector<bool> capped(rows.size(), false);
        std::vector<std::size_t> open = everyone;
        u128 remaining = margin.magnitude().units();
        while (!open.empty() && remaining > 0) {
            const auto shares = apportion(remaining, fractions_of(rows, open, state.total_limit_));
            std::vector<std::size_t> still_open;
            bool any_capped = false;
            for (std::size_t k = 0; k < open.size(); ++k) {
                if (shares[k] >= caps[open[k]]) {
                    any_capped = true;
                    capped[open[k]] = true;
                    loss[open[k]] = caps[open[k]];
                    remaining -= caps[open[k]];
                } else {
                    still_open.push_back(open[k]);
                }
            }
            if (!any_capped) {
                for (std::size_t k = 0; k < open.size(); ++k) loss[open[k]] = shares[k];
                remaining = 0;
            }
            open = std::move(still_open);
        }
        if (remaining > 0) {
            report.insolvent = true;
            report.shortfall = Amount(remaining, Currency::Value);
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& row = rows[i];
            row.reward_or_loss = SignedAmount(-static_cast<i128>(loss[i]), Currency::Value);
            row.slashed = capped[i];
            row.slashed_eth =
                capped[i] ? row.principal
                          : std::min(row.principal,
                                     value_to_eth(Amount(loss[i], Currency::Value), settlement_price, Rounding::Ceil));
            row.principal_returned = row.principal - row.slashed_eth;
        }
    }

    PoolState s = state.advanced(Phase::Settled);
    s.settlement_ = std::move(report);
    return s;
}

}  // namespace stablepool::pool
