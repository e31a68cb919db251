#include "stablepool/ledger.hpp"

#include "stablepool/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

namespace stablepool::ledger {

struct Access {
    static auto& batches(LedgerState& l) { return l.batches_; }
    static auto& outstanding(LedgerState& l) { return l.total_outstanding_; }
    static auto& collateral(LedgerState& l) { return l.total_collateral_; }
    static auto& peg_events(LedgerState& l) { return l.peg_events_; }
    static auto& events(LedgerState& l) { return l.events_; }
    static auto& dust(LedgerState& l) { return l.dust_eth_; }
    static auto& tick(LedgerState& l) { return l.tick_; }
};

namespace {

void require_price(double price) {
    if (!std::isfinite(price) || !(price > 0)) throw Error(ErrorKind::Domain, "price must be positive");
}

}  // namespace

std::string_view to_string(EventType type) noexcept {
    return type == EventType::Mint ? "mint" : "redeem";
}

LedgerState::LedgerState(LedgerConfig config) : config_(config) {
    if (!std::isfinite(config.backing_ratio) || config.backing_ratio < 0) {
        throw Error(ErrorKind::Domain, "backing ratio must be finite and non-negative");
    }
}

const IssuanceBatch& LedgerState::batch(std::string_view batch_id) const {
    const auto it = batches_.find(std::string(batch_id));
    if (it == batches_.end()) throw Error(ErrorKind::UnknownBatch, "unknown batch '" + std::string(batch_id) + "'");
    return it->second;
}

MintResult mint(const LedgerState& ledger, std::string_view user_id, const Amount& collateral_eth,
                double price, const pool::PoolState& pool) {
    if (collateral_eth.currency() != Currency::Eth) {
        throw Error(ErrorKind::CurrencyMismatch, "collateral must be denominated in ETH");
    }
    if (collateral_eth.is_zero()) throw Error(ErrorKind::Domain, "collateral must be positive");
    require_price(price);
    if (pool.phase() != pool::Phase::Active) {
        throw Error(ErrorKind::InactivePool,
                    "backing pool is " + std::string(pool::to_string(pool.phase())) + ", not Active");
    }
    const Amount required = scale(collateral_eth, ledger.config().backing_ratio, Rounding::Ceil);
    if (pool.revealed_total() < required) {
        throw Error(ErrorKind::InsufficientBacking, "pool holds " + pool.revealed_total().to_decimal() +
                                                        " ETH, batch needs " + required.to_decimal());
    }
    const Amount stable = eth_to_value(collateral_eth, price, Currency::Stable);
    if (stable.is_zero()) {
        throw Error(ErrorKind::Dust, collateral_eth.to_decimal() + " ETH is worth less than one STABLE base unit");
    }

    LedgerState next = ledger;
    IssuanceBatch batch;
    batch.batch_id = fmt::format("batch-{:04}", ledger.batches().size() + 1);
    batch.user_id = std::string(user_id);
    batch.collateral_eth = collateral_eth;
    batch.stable_issued = stable;
    batch.price_at_mint = price;
    batch.backing_pool = pool;

    const std::uint64_t tick = Access::tick(next)++;
    Access::batches(next).emplace(batch.batch_id, batch);
    Access::outstanding(next) += stable;
    Access::collateral(next) += collateral_eth;
    Access::events(next).push_back(
        {tick, EventType::Mint, batch.batch_id, batch.user_id, collateral_eth, stable, price, std::nullopt, std::nullopt});
    return {std::move(next), std::move(batch)};
}

SignedAmount compute_margin(const IssuanceBatch& batch, double current_price) {
    require_price(current_price);
    if (batch.status == BatchStatus::Redeemed) {
        throw Error(ErrorKind::AlreadyRedeemed, "batch '" + batch.batch_id + "' already redeemed");
    }
    const Amount collateral_value = eth_to_value(batch.collateral_eth, current_price, Currency::Value);
    const Amount face(batch.stable_issued.units(), Currency::Value);
    return SignedAmount::difference(collateral_value, face);
}

RedeemResult redeem(const LedgerState& ledger, std::string_view batch_id, double current_price) {
    require_price(current_price);
    const IssuanceBatch& batch = ledger.batch(batch_id);
    const SignedAmount margin = compute_margin(batch, current_price);
    const Amount& collateral = batch.collateral_eth;
    const Amount face_eth = value_to_eth(batch.stable_issued, current_price);

    Redemption out;
    out.margin = margin;
    if (!margin.is_negative()) {
        // A non-negative margin means collateral >= face, so the surplus is the
        // whole ETH reward pot.
        out.settled_pool = pool::settle(batch.backing_pool, margin, current_price, collateral - face_eth);
        out.user_receives = face_eth;
    } else {
        out.settled_pool = pool::settle(batch.backing_pool, margin, current_price);
        const auto& report = *out.settled_pool.settlement();
        Amount slashed(0, Currency::Eth);
        for (const auto& row : report.per_investor) slashed += row.slashed_eth;
        if (report.insolvent) {
            out.peg_held = false;
            out.shortfall = report.shortfall;
            out.user_receives = collateral + slashed;
        } else {
            const Amount deficit = face_eth - collateral;
            if (slashed < deficit) {
                throw Error(ErrorKind::Internal, "slashed ETH does not cover the redemption deficit");
            }
            out.user_receives = face_eth;
            out.dust_eth = slashed - deficit;
        }
    }

    LedgerState next = ledger;
    const std::uint64_t tick = Access::tick(next)++;
    auto& stored = Access::batches(next).at(batch.batch_id);
    stored.status = BatchStatus::Redeemed;
    stored.backing_pool = out.settled_pool;
    Access::outstanding(next) -= batch.stable_issued;
    Access::collateral(next) -= collateral;
    Access::dust(next) += out.dust_eth;
    if (!out.peg_held) Access::peg_events(next).push_back({tick, batch.batch_id, out.shortfall});
    Access::events(next).push_back({tick, EventType::Redeem, batch.batch_id, batch.user_id, out.user_receives,
                                    batch.stable_issued, current_price, margin, out.peg_held});
    return {std::move(next), std::move(out)};
}

std::string events_csv(const LedgerState& ledger) {
    std::string out =
        "tick,event_type,batch_id,user_id,eth_base_units,stable_base_units,price,margin_value_units,peg_held\n";
    for (const auto& e : ledger.events()) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", e.tick, to_string(e.type), e.batch_id, e.user_id,
                           u128_to_string(e.eth.units()), u128_to_string(e.stable.units()), e.price,
                           e.margin ? i128_to_string(e.margin->units()) : std::string(),
                           e.peg_held ? (*e.peg_held ? "true" : "false") : "");
    }
    return out;
}

void write_events_csv(const LedgerState& ledger, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    f << events_csv(ledger);
    if (!f) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace stablepool::ledger
