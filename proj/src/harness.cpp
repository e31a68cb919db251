#include "stablepool/harness.hpp"

#include "stablepool/error.hpp"
#include "stablepool/pool.hpp"

#include <fmt/format.h>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace stablepool::harness {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;

Error scenario_error(const std::string& message) { return Error(ErrorKind::Scenario, message); }

// Runs one episode step, prefixing any failure with the step name.
template <class F>
auto at_step(const char* step, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("step '") + step + "': " + e.what());
    }
}

Amount amount_field(const json& j, const char* key, Currency currency) {
    if (!j.contains(key)) throw scenario_error(std::string("missing field '") + key + "'");
    const json& v = j.at(key);
    try {
        if (v.is_string()) return Amount::parse(v.get<std::string>(), currency);
        if (v.is_number()) return Amount::parse(v.dump(), currency);
    } catch (const Error& e) {
        throw scenario_error(std::string("field '") + key + "': " + e.what());
    }
    throw scenario_error(std::string("field '") + key + "' must be a number or decimal string");
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw scenario_error(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw scenario_error(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

market::AgentPolicy parse_policy(const json& j, std::uint64_t derived_seed) {
    const auto kind = field<std::string>(j, "policy");
    const Amount budget = amount_field(j, "budget", Currency::Eth);
    if (kind == "max_fill") return market::MaxFill{budget};
    if (kind == "fixed_fraction") {
        const auto fraction = field<double>(j, "fraction");
        if (!(fraction > 0 && fraction <= 1)) throw scenario_error("fixed_fraction fraction must lie in (0, 1]");
        return market::FixedFraction{budget, fraction};
    }
    if (kind == "uniform_random") {
        return market::UniformRandom{budget, field_or<std::uint64_t>(j, "seed", derived_seed)};
    }
    throw scenario_error("unknown policy '" + kind + "'");
}

market::PricePath parse_price(const json& j, std::uint64_t scenario_seed) {
    const auto generator = field<std::string>(j, "generator");
    try {
        if (generator == "deterministic") {
            std::vector<market::PricePoint> points;
            for (const auto& p : field<json>(j, "points")) {
                if (!p.is_array() || p.size() != 2) throw scenario_error("price points must be [tick, price] pairs");
                points.push_back({p[0].get<std::uint64_t>(), p[1].get<double>()});
            }
            return market::PricePath::deterministic(std::move(points), field_or<std::uint64_t>(j, "horizon", 0));
        }
        if (generator == "gbm") {
            market::GbmParams params;
            params.start = field<double>(j, "start");
            params.drift = field_or<double>(j, "drift", 0.0);
            params.volatility = field_or<double>(j, "volatility", 0.0);
            params.seed = field_or<std::uint64_t>(j, "seed", scenario_seed);
            return market::PricePath::gbm(params, field<std::uint64_t>(j, "horizon"));
        }
    } catch (const json::exception& e) {
        throw scenario_error(std::string("price: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Scenario) throw;
        throw scenario_error(std::string("price: ") + e.what());
    }
    throw scenario_error("unknown price generator '" + generator + "'");
}

void validate(const Scenario& s) {
    if (s.name.empty()) throw scenario_error("scenario needs a name");
    if (s.pool.total_limit.is_zero() || s.pool.min_fill.is_zero() || s.pool.min_fill > s.pool.total_limit) {
        throw scenario_error("pool needs 0 < min_fill <= total_limit");
    }
    if (s.agents.empty()) throw scenario_error("scenario needs at least one agent");
    std::set<std::string> ids;
    for (const auto& a : s.agents) {
        if (a.id.empty()) throw scenario_error("agent ids must be non-empty");
        if (!ids.insert(a.id).second) throw scenario_error("duplicate agent id '" + a.id + "'");
    }
    if (s.user.collateral_eth.is_zero()) throw scenario_error("user collateral must be positive");
    if (!(s.user.mint_tick < s.user.redeem_tick) || s.user.redeem_tick > s.price.horizon()) {
        throw scenario_error(fmt::format("need mint_tick < redeem_tick <= horizon ({} < {} <= {})", s.user.mint_tick,
                                         s.user.redeem_tick, s.price.horizon()));
    }
    if (!std::isfinite(s.backing_ratio) || s.backing_ratio < 0) throw scenario_error("backing_ratio must be >= 0");
    if (s.sweep) {
        const auto& w = *s.sweep;
        if (!(w.fill_lo >= 1.0) || !(w.fill_lo < w.fill_hi) || w.steps < 2) {
            throw scenario_error("sweep needs 1 <= fill_lo < fill_hi and steps >= 2");
        }
        if (w.fill_lo < s.pool.min_fill.to_real()) throw scenario_error("sweep fill_lo is below the pool min_fill");
    }
}

json amount_json(const Amount& a) { return a.to_decimal(); }

}  // namespace

Scenario parse_scenario(std::string_view json_text, std::optional<std::uint64_t> seed_override) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw scenario_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw scenario_error("scenario must be a JSON object");

    Scenario s;
    s.name = field<std::string>(j, "name");
    s.seed = seed_override.value_or(field_or<std::uint64_t>(j, "seed", 0));
    s.backing_ratio = field_or<double>(j, "backing_ratio", 1.0);

    const auto pool = field<json>(j, "pool");
    s.pool.total_limit = amount_field(pool, "total_limit", Currency::Eth);
    s.pool.min_fill = pool.contains("min_fill") ? amount_field(pool, "min_fill", Currency::Eth) : Amount::eth("1");

    const auto agents = field<json>(j, "agents");
    if (!agents.is_array()) throw scenario_error("'agents' must be an array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto& a = agents[i];
        s.agents.push_back({field<std::string>(a, "id"), parse_policy(a, s.seed ^ (kSeedMix * (i + 1)))});
    }

    const auto user = field<json>(j, "user");
    s.user.id = field_or<std::string>(user, "id", "user");
    s.user.collateral_eth = amount_field(user, "collateral_eth", Currency::Eth);
    s.user.mint_tick = field<std::uint64_t>(user, "mint_tick");
    s.user.redeem_tick = field<std::uint64_t>(user, "redeem_tick");

    s.price = parse_price(field<json>(j, "price"), s.seed);

    if (j.contains("sweep") && !j.at("sweep").is_null()) {
        const auto& w = j.at("sweep");
        s.sweep = SweepSpec{field<double>(w, "fill_lo"), field<double>(w, "fill_hi"), field<int>(w, "steps")};
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot read scenario '" + path.string() + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    try {
        return parse_scenario(buf.str(), seed_override);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

namespace {

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["backing_ratio"] = s.backing_ratio;
    j["pool"] = {{"total_limit", amount_json(s.pool.total_limit)}, {"min_fill", amount_json(s.pool.min_fill)}};
    json agents = json::array();
    for (const auto& a : s.agents) {
        json aj;
        aj["id"] = a.id;
        aj["policy"] = market::policy_name(a.policy);
        aj["budget"] = amount_json(market::policy_budget(a.policy));
        if (const auto* ff = std::get_if<market::FixedFraction>(&a.policy)) aj["fraction"] = ff->fraction;
        if (const auto* ur = std::get_if<market::UniformRandom>(&a.policy)) aj["seed"] = ur->seed;
        agents.push_back(aj);
    }
    j["agents"] = agents;
    j["user"] = {{"id", s.user.id},
                 {"collateral_eth", amount_json(s.user.collateral_eth)},
                 {"mint_tick", s.user.mint_tick},
                 {"redeem_tick", s.user.redeem_tick}};
    json price;
    if (const auto& g = s.price.gbm_params()) {
        price["generator"] = "gbm";
        price["start"] = g->start;
        price["drift"] = g->drift;
        price["volatility"] = g->volatility;
        price["seed"] = g->seed;
    } else {
        price["generator"] = "deterministic";
        json points = json::array();
        for (const auto& p : s.price.points()) points.push_back({p.tick, p.price});
        price["points"] = points;
    }
    price["horizon"] = s.price.horizon();
    j["price"] = price;
    if (s.sweep) {
        j["sweep"] = {{"fill_lo", s.sweep->fill_lo}, {"fill_hi", s.sweep->fill_hi}, {"steps", s.sweep->steps}};
    }
    return j;
}

pool::Nonce draw_nonce(std::mt19937_64& generator) {
    pool::Nonce nonce{};
    for (std::size_t word = 0; word < 4; ++word) {
        const std::uint64_t v = generator();
        for (std::size_t b = 0; b < 8; ++b) nonce[word * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    return nonce;
}

}  // namespace

std::string scenario_json(const Scenario& scenario) { return scenario_to_json(scenario).dump(2); }

EpisodeReport run_episode(const Scenario& scenario) {
    EpisodeReport report;
    report.scenario_name = scenario.name;
    report.seed = scenario.seed;

    auto state = at_step("open_pool", [&] { return pool::open_pool(scenario.pool.total_limit, scenario.pool.min_fill); });

    // Agents see only the pool limit, the minimum and their own budget.
    std::mt19937_64 nonce_generator(scenario.seed);
    struct Pending {
        std::string id;
        Amount amount;
        pool::Nonce nonce;
    };
    std::vector<Pending> pending;
    for (const auto& agent : scenario.agents) {
        const Amount fill = market::decide_fill(agent.policy, scenario.pool.total_limit, scenario.pool.min_fill);
        if (fill.is_zero()) {
            report.excluded.push_back({agent.id, "abstained"});
            continue;
        }
        const auto nonce = draw_nonce(nonce_generator);
        state = at_step("commit", [&] { return pool::commit(state, agent.id, pool::commitment_digest(fill, nonce, agent.id)); });
        pending.push_back({agent.id, fill, nonce});
    }
    state = at_step("close_commits", [&] { return pool::close_commits(state); });

    for (const auto& p : pending) {
        try {
            state = pool::reveal(state, p.id, p.amount, p.nonce);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Overfill && e.kind() != ErrorKind::BelowMinFill) {
                throw Error(e.kind(), std::string("step 'reveal': ") + e.what());
            }
            report.excluded.push_back({p.id, std::string(to_string(e.kind()))});
        }
    }
    state = at_step("activate", [&] { return pool::activate(state); });

    const double price_start = at_step("price", [&] { return scenario.price.price(scenario.user.mint_tick); });
    const double price_end = at_step("price", [&] { return scenario.price.price(scenario.user.redeem_tick); });
    report.price_start = price_start;
    report.price_end = price_end;

    ledger::LedgerState book(ledger::LedgerConfig{scenario.backing_ratio});
    const auto minted = at_step("mint", [&] {
        return ledger::mint(book, scenario.user.id, scenario.user.collateral_eth, price_start, state);
    });
    report.stable_issued = minted.batch.stable_issued;
    const auto redeemed = at_step("redeem", [&] { return ledger::redeem(minted.ledger, minted.batch.batch_id, price_end); });
    const auto& redemption = redeemed.redemption;
    const auto& settlement = *redemption.settled_pool.settlement();

    report.margin = redemption.margin;
    report.peg_held = redemption.peg_held;
    if (!redemption.peg_held) report.shortfall = redemption.shortfall;
    report.ledger = redeemed.ledger;

    report.eth.user_collateral = scenario.user.collateral_eth;
    report.eth.user_payout = redemption.user_receives;
    report.eth.dust = redemption.dust_eth;

    incentive::DistributionInput realized;
    realized.total_limit = scenario.pool.total_limit.to_real();
    realized.cumulated_amount = redemption.margin.to_real();
    for (const auto& row : settlement.per_investor) {
        EpisodeRow r;
        r.investor_id = row.investor_id;
        r.filled_eth = row.principal;
        r.filled = row.principal.to_real();
        r.fraction = row.fraction;
        r.pool_pnl_exact = row.reward_or_loss;
        r.pool_pnl = row.reward_or_loss.to_real();
        r.hold_pnl = incentive::hold_baseline(r.filled, price_start, price_end);
        r.advantage = r.pool_pnl - r.hold_pnl;
        r.slashed = row.slashed;
        report.rows.push_back(r);

        report.eth.investor_principal += row.principal;
        report.eth.investor_payout += row.principal_returned + row.reward_eth;
        realized.fills.push_back({row.investor_id, r.filled});
    }
    if (report.eth.total_in() != report.eth.total_out()) {
        throw Error(ErrorKind::Internal, "step 'settle': ETH in " + report.eth.total_in().to_decimal() +
                                             " != ETH out " + report.eth.total_out().to_decimal());
    }

    const double lo = scenario.pool.min_fill.to_real();
    const double hi = scenario.pool.total_limit.to_real();
    if (lo < hi) {
        report.threshold = at_step("threshold", [&] {
            return incentive::partition_threshold(realized, price_start, price_end, {lo, hi});
        });
    }
    return report;
}

EpisodeReport run_sweep(const Scenario& scenario) {
    if (!scenario.sweep) throw Error(ErrorKind::NoSweep, "scenario '" + scenario.name + "' has no sweep configured");
    EpisodeReport report = run_episode(scenario);
    const auto& spec = *scenario.sweep;

    SweepResult sweep;
    auto& q = sweep.query;
    for (const auto& row : report.rows) q.background_fills.push_back(row.filled);
    q.total_limit = scenario.pool.total_limit.to_real();
    q.price_start = report.price_start;
    q.price_end = report.price_end;
    q.margin = report.margin.to_real();
    q.search_domain = {spec.fill_lo, spec.fill_hi};

    sweep.threshold = at_step("sweep", [&] { return incentive::find_threshold(q); });
    sweep.curve.reserve(static_cast<std::size_t>(spec.steps));
    for (int i = 0; i < spec.steps; ++i) {
        const double x = i == spec.steps - 1 ? spec.fill_hi
                                             : spec.fill_lo + (spec.fill_hi - spec.fill_lo) * i / (spec.steps - 1);
        sweep.curve.push_back({x, incentive::marginal_pool_return(q, x),
                               incentive::hold_baseline(x, q.price_start, q.price_end)});
    }
    report.sweep = std::move(sweep);
    return report;
}

std::string episode_csv(const EpisodeReport& report) {
    std::string out = "investor_id,filled,fraction,pool_pnl,hold_pnl,advantage,slashed\n";
    for (const auto& r : report.rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.investor_id, r.filled, r.fraction, r.pool_pnl, r.hold_pnl,
                           r.advantage, r.slashed ? "true" : "false");
    }
    return out;
}

std::string curve_csv(const SweepResult& sweep) {
    std::string out = "fill,pool_pnl,hold_pnl\n";
    for (const auto& p : sweep.curve) out += fmt::format("{},{},{}\n", p.fill, p.pool_pnl, p.hold_pnl);
    return out;
}

std::string manifest_json(const EpisodeReport& report, const Scenario& scenario) {
    const auto optional_real = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["artifact"] = kArtifactName;
    j["version"] = kArtifactVersion;
    j["generator"] = market::kGeneratorName;
    j["seed"] = report.seed;
    j["synthetic_data"] = true;
    j["scenario"] = scenario_to_json(scenario);

    json outcome;
    outcome["price_start"] = report.price_start;
    outcome["price_end"] = report.price_end;
    outcome["margin"] = report.margin.to_decimal();
    outcome["stable_issued"] = report.stable_issued.to_decimal();
    outcome["peg_held"] = report.peg_held;
    outcome["shortfall"] = report.shortfall ? json(report.shortfall->to_decimal()) : json(nullptr);
    outcome["threshold"] = optional_real(report.threshold);
    json excluded = json::array();
    for (const auto& e : report.excluded) excluded.push_back({{"investor_id", e.investor_id}, {"reason", e.reason}});
    outcome["excluded"] = excluded;
    outcome["eth_in_base_units"] = u128_to_string(report.eth.total_in().units());
    outcome["eth_out_base_units"] = u128_to_string(report.eth.total_out().units());
    outcome["dust_eth_base_units"] = u128_to_string(report.eth.dust.units());
    j["outcome"] = outcome;

    json files = json::array({"episode.csv"});
    if (report.sweep) {
        files.push_back("curve.csv");
        j["sweep_threshold"] = optional_real(report.sweep->threshold);
    }
    j["files"] = files;
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> export_report(const EpisodeReport& report, const Scenario& scenario,
                                                 const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + directory.string() + "': " + ec.message());

    std::vector<std::filesystem::path> written;
    const auto write = [&](const char* name, const std::string& content) {
        const auto path = directory / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "' in directory '" + directory.string() + "'");
        f << content;
        f.close();
        if (!f) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
        written.push_back(path);
    };
    write("episode.csv", episode_csv(report));
    if (report.sweep) write("curve.csv", curve_csv(*report.sweep));
    write("manifest.json", manifest_json(report, scenario));
    return written;
}

}  // namespace stablepool::harness
