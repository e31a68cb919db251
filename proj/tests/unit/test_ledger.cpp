#include "stablepool/error.hpp"
#include "stablepool/ledger.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>

using namespace stablepool;
using namespace stablepool::ledger;

namespace {

pool::PoolState active_pool(const std::vector<std::pair<std::string, std::string>>& fills, const std::string& limit) {
    auto s = pool::open_pool(Amount::eth(limit), Amount::eth("1"));
    const pool::Nonce nonce{};
    for (const auto& [id, amt] : fills) s = pool::commit(s, id, pool::commitment_digest(Amount::eth(amt), nonce, id));
    s = pool::close_commits(s);
    for (const auto& [id, amt] : fills) s = pool::reveal(s, id, Amount::eth(amt), nonce);
    return pool::activate(s);
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

TEST_CASE("mint issues at face value") {
    const auto p = active_pool({{"a", "2"}}, "2");
    const auto [book, batch] = mint(LedgerState{}, "u", Amount::eth("2"), 100, p);
    CHECK(batch.stable_issued == Amount::stable("200"));
    CHECK(book.total_outstanding() == Amount::stable("200"));
    CHECK(book.total_collateral() == Amount::eth("2"));
    CHECK(book.events().size() == 1);
}

TEST_CASE("mint rejects dust, inactive pools and thin backing") {
    const auto p = active_pool({{"a", "2"}}, "2");
    CHECK(kind_of([&] { mint(LedgerState{}, "u", Amount(1, Currency::Eth), 100, p); }) == ErrorKind::Dust);
    const auto settled = pool::settle(p, SignedAmount(0, Currency::Value), 100);
    CHECK(kind_of([&] { mint(LedgerState{}, "u", Amount::eth("1"), 100, settled); }) == ErrorKind::InactivePool);
    CHECK(kind_of([&] { mint(LedgerState{}, "u", Amount::eth("3"), 100, p); }) == ErrorKind::InsufficientBacking);
    CHECK(kind_of([&] { mint(LedgerState{}, "u", Amount::eth("1"), 0, p); }) == ErrorKind::Domain);
    CHECK(kind_of([&] { mint(LedgerState{}, "u", Amount::eth("0"), 100, p); }) == ErrorKind::Domain);
    // Half backing allowed by configuration.
    const auto half = mint(LedgerState(LedgerConfig{0.5}), "u", Amount::eth("4"), 100, p);
    CHECK(half.batch.stable_issued == Amount::stable("400"));
}

TEST_CASE("compute_margin") {
    const auto p = active_pool({{"a", "2"}}, "2");
    const auto batch = mint(LedgerState{}, "u", Amount::eth("2"), 100, p).batch;
    CHECK(compute_margin(batch, 100).units() == 0);
    CHECK(compute_margin(batch, 150).units() == 100'000'000);
    CHECK(compute_margin(batch, 60).units() == -80'000'000);
}

TEST_CASE("redeem pays face value and settles the pool") {
    const auto p = active_pool({{"a", "2"}}, "2");
    const auto minted = mint(LedgerState{}, "u", Amount::eth("2"), 100, p);

    const auto up = redeem(minted.ledger, minted.batch.batch_id, 150);
    CHECK(up.redemption.user_receives.units() == static_cast<u128>(1333333333333333333ULL));
    CHECK(up.redemption.margin.units() == 100'000'000);
    CHECK(up.redemption.peg_held);
    const auto& report = *up.redemption.settled_pool.settlement();
    // The investor is paid the whole ETH surplus.
    CHECK((report.per_investor[0].reward_eth + up.redemption.user_receives) == Amount::eth("2"));
    CHECK(up.ledger.total_outstanding().is_zero());
    CHECK(up.ledger.batch(minted.batch.batch_id).status == BatchStatus::Redeemed);
    CHECK(kind_of([&] { redeem(up.ledger, minted.batch.batch_id, 150); }) == ErrorKind::AlreadyRedeemed);
    CHECK(kind_of([&] { redeem(up.ledger, "nope", 150); }) == ErrorKind::UnknownBatch);

    const auto flat = redeem(minted.ledger, minted.batch.batch_id, 100);
    CHECK(flat.redemption.user_receives == Amount::eth("2"));
    CHECK(flat.redemption.margin.units() == 0);
    CHECK(flat.redemption.peg_held);
}

TEST_CASE("redeem below pool coverage breaks the peg") {
    const auto p = active_pool({{"a", "2"}}, "2");
    const auto minted = mint(LedgerState{}, "u", Amount::eth("2"), 100, p);
    const auto down = redeem(minted.ledger, minted.batch.batch_id, 40);
    CHECK(down.redemption.margin.units() == -120'000'000);
    CHECK_FALSE(down.redemption.peg_held);
    CHECK(down.redemption.shortfall == Amount::value("40"));
    CHECK(down.redemption.user_receives == Amount::eth("4"));
    REQUIRE(down.ledger.peg_events().size() == 1);
    CHECK(down.ledger.peg_events()[0].shortfall == Amount::value("40"));
}

TEST_CASE("covered loss keeps the peg and leaves bounded dust") {
    const auto p = active_pool({{"a", "2"}, {"b", "3"}}, "5");
    const auto minted = mint(LedgerState{}, "u", Amount::eth("2.5"), 100, p);
    const auto down = redeem(minted.ledger, minted.batch.batch_id, 70.3);
    CHECK(down.redemption.peg_held);
    const auto& r = *down.redemption.settled_pool.settlement();
    Amount slashed(0, Currency::Eth);
    for (const auto& row : r.per_investor) slashed += row.slashed_eth;
    CHECK((Amount::eth("2.5") + slashed) == (down.redemption.user_receives + down.redemption.dust_eth));
    // ceil per investor, plus one VALUE unit worth of ETH at this price
    CHECK(down.redemption.dust_eth.units() <= 2 + 2 + static_cast<u128>(1e12 / 70.3) + 1);
    // peg: payout valued at price within one STABLE unit of the face value
    const auto valued = eth_to_value(down.redemption.user_receives, 70.3, Currency::Stable);
    CHECK(minted.batch.stable_issued.units() - valued.units() <= 1);
}

TEST_CASE("event log CSV") {
    const auto p = active_pool({{"a", "2"}}, "2");
    const auto minted = mint(LedgerState{}, "u", Amount::eth("2"), 100, p);
    const auto done = redeem(minted.ledger, minted.batch.batch_id, 40);
    CHECK(events_csv(done.ledger) ==
          "tick,event_type,batch_id,user_id,eth_base_units,stable_base_units,price,margin_value_units,peg_held\n"
          "0,mint,batch-0001,u,2000000000000000000,200000000,100,,\n"
          "1,redeem,batch-0001,u,4000000000000000000,200000000,40,-120000000,false\n");

    const auto dir = std::filesystem::temp_directory_path() / "stablepool_ledger_test";
    std::filesystem::create_directories(dir);
    write_events_csv(done.ledger, dir / "events.csv");
    std::ifstream f(dir / "events.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header.rfind("tick,event_type", 0) == 0);
    CHECK(kind_of([&] { write_events_csv(done.ledger, dir / "missing" / "x.csv"); }) == ErrorKind::Io);
    std::filesystem::remove_all(dir);
}

TEST_CASE("ledger values are immutable across operations") {
    const auto p = active_pool({{"a", "2"}}, "2");
    const LedgerState empty;
    const auto minted = mint(empty, "u", Amount::eth("2"), 100, p);
    CHECK(empty.batches().empty());
    const auto again = mint(empty, "u", Amount::eth("2"), 100, p);
    CHECK(again.ledger == minted.ledger);
}
