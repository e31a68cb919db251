#include "stablepool/error.hpp"
#include "stablepool/harness.hpp"
#include "stablepool/incentive.hpp"
#include "stablepool/ledger.hpp"
#include "stablepool/money.hpp"
#include "stablepool/pool.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

using namespace stablepool;

namespace {

struct RunOptions {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string ledger_csv;
};

void add_run_options(CLI::App* cmd, RunOptions& opts) {
    cmd->add_option("--scenario", opts.scenario, "scenario JSON file")->required();
    cmd->add_option("--seed", opts.seed, "override the scenario seed");
    cmd->add_option("--out", opts.out, "directory for episode.csv, curve.csv and manifest.json");
    cmd->add_option("--ledger-csv", opts.ledger_csv, "also write the ledger event log here");
}

void print_summary(const harness::EpisodeReport& r) {
    fmt::print("scenario {} seed {}\n", r.scenario_name, r.seed);
    fmt::print("price {} -> {}, margin {} VALUE, peg {}\n", r.price_start, r.price_end, r.margin.to_decimal(),
               r.peg_held ? "held" : "broken");
    if (r.shortfall) fmt::print("shortfall {} VALUE\n", r.shortfall->to_decimal());
    fmt::print("{:<16} {:>12} {:>10} {:>14} {:>14} {:>14}\n", "investor", "filled", "fraction", "pool_pnl", "hold_pnl",
               "advantage");
    for (const auto& row : r.rows) {
        fmt::print("{:<16} {:>12.6f} {:>10.6f} {:>14.6f} {:>14.6f} {:>14.6f}{}\n", row.investor_id, row.filled,
                   row.fraction, row.pool_pnl, row.hold_pnl, row.advantage, row.slashed ? " slashed" : "");
    }
    for (const auto& x : r.excluded) fmt::print("excluded {}: {}\n", x.investor_id, x.reason);
    fmt::print("threshold {}\n", r.threshold ? fmt::format("{:.9f}", *r.threshold) : "none");
}

void finish(const harness::EpisodeReport& report, const harness::Scenario& scenario, const RunOptions& opts) {
    if (!opts.out.empty()) {
        for (const auto& path : harness::export_report(report, scenario, opts.out)) fmt::print("wrote {}\n", path.string());
    }
    if (!opts.ledger_csv.empty()) {
        ledger::write_events_csv(report.ledger, opts.ledger_csv);
        fmt::print("wrote {}\n", opts.ledger_csv);
    }
}

std::vector<incentive::Fill> parse_fills(const std::vector<std::string>& specs) {
    std::vector<incentive::Fill> fills;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorKind::Domain, "--fill expects id=amount, got '" + spec + "'");
        }
        double value = 0;
        try {
            std::size_t used = 0;
            value = std::stod(spec.substr(eq + 1), &used);
            if (used != spec.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorKind::Domain, "--fill amount is not a number in '" + spec + "'");
        }
        fills.push_back({spec.substr(0, eq), value});
    }
    return fills;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collateral pool and stablecoin simulator"};
    app.require_subcommand(1);

    RunOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "run one episode");
    add_run_options(simulate, sim_opts);

    RunOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "run an episode plus the marginal-investor curve");
    add_run_options(sweep, sweep_opts);

    std::vector<std::string> fill_specs;
    double limit = 0, amount = 0;
    bool direct = false;
    auto* distribute = app.add_subcommand("distribute", "split an amount over pool fills");
    distribute->add_option("--fill", fill_specs, "investor fill as id=eth, repeatable")->required();
    distribute->add_option("--limit", limit, "pool total limit in ETH")->required();
    distribute->add_option("--amount", amount, "amount to distribute in VALUE")->required();
    distribute->add_flag("--direct", direct, "evaluate the raw ratio without log-space shifting");

    std::string commit_amount, commit_nonce, commit_id;
    auto* hash_commit = app.add_subcommand("hash-commit", "print a commitment digest");
    hash_commit->add_option("--amount", commit_amount, "contribution in ETH (decimal)")->required();
    hash_commit->add_option("--nonce", commit_nonce, "32-byte nonce as 64 hex digits")->required();
    hash_commit->add_option("--id", commit_id, "investor id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*simulate) {
            const auto scenario = harness::load_scenario(sim_opts.scenario, sim_opts.seed);
            const auto report = harness::run_episode(scenario);
            print_summary(report);
            finish(report, scenario, sim_opts);
        } else if (*sweep) {
            const auto scenario = harness::load_scenario(sweep_opts.scenario, sweep_opts.seed);
            const auto report = harness::run_sweep(scenario);
            print_summary(report);
            const auto& s = *report.sweep;
            fmt::print("sweep {} points, threshold {}\n", s.curve.size(),
                       s.threshold ? fmt::format("{:.9f}", *s.threshold) : "none");
            finish(report, scenario, sweep_opts);
        } else if (*distribute) {
            incentive::DistributionInput input{parse_fills(fill_specs), limit, amount};
            const auto r = incentive::compute_distribution(
                input, direct ? incentive::Evaluation::Direct : incentive::Evaluation::LogSpace);
            fmt::print("investor_id,raw_incentive,fraction,final_incentive\n");
            for (const auto& s : r.per_investor) {
                fmt::print("{},{},{},{}\n", s.investor_id, s.raw_incentive, s.fraction, s.final_incentive);
            }
            fmt::print("# lsum {}\n", r.lsum);
        } else if (*hash_commit) {
            const auto digest = pool::commitment_digest(Amount::parse(commit_amount, Currency::Eth),
                                                        pool::nonce_from_hex(commit_nonce), commit_id);
            fmt::print("{}\n", pool::to_hex(digest));
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}: {}\n", to_string(e.kind()), e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: internal: {}\n", e.what());
        return 1;
    }
    return 0;
}
