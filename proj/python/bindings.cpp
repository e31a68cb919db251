#include "stablepool/error.hpp"
#include "stablepool/harness.hpp"
#include "stablepool/incentive.hpp"
#include "stablepool/ledger.hpp"
#include "stablepool/money.hpp"
#include "stablepool/pool.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
using namespace stablepool;

namespace {

incentive::DistributionInput to_input(const std::vector<std::pair<std::string, double>>& fills, double limit,
                                      double amount) {
    incentive::DistributionInput in;
    in.total_limit = limit;
    in.cumulated_amount = amount;
    for (const auto& [id, f] : fills) in.fills.push_back({id, f});
    return in;
}

py::dict row_dict(const harness::EpisodeRow& r) {
    py::dict d;
    d["investor_id"] = r.investor_id;
    d["filled"] = r.filled;
    d["fraction"] = r.fraction;
    d["pool_pnl"] = r.pool_pnl;
    d["hold_pnl"] = r.hold_pnl;
    d["advantage"] = r.advantage;
    d["slashed"] = r.slashed;
    return d;
}

py::dict report_dict(const harness::EpisodeReport& r) {
    py::dict d;
    d["scenario"] = r.scenario_name;
    d["seed"] = r.seed;
    d["price_start"] = r.price_start;
    d["price_end"] = r.price_end;
    d["margin"] = r.margin.to_decimal();
    d["peg_held"] = r.peg_held;
    d["threshold"] = r.threshold;
    d["shortfall"] = r.shortfall ? py::object(py::str(r.shortfall->to_decimal())) : py::object(py::none());
    d["stable_issued"] = r.stable_issued.to_decimal();
    py::list rows;
    for (const auto& row : r.rows) rows.append(row_dict(row));
    d["rows"] = rows;
    py::list excluded;
    for (const auto& x : r.excluded) excluded.append(py::make_tuple(x.investor_id, x.reason));
    d["excluded"] = excluded;
    d["episode_csv"] = harness::episode_csv(r);
    d["ledger_csv"] = ledger::events_csv(r.ledger);
    if (r.sweep) {
        py::list curve;
        for (const auto& p : r.sweep->curve) curve.append(py::make_tuple(p.fill, p.pool_pnl, p.hold_pnl));
        d["curve"] = curve;
        d["sweep_threshold"] = r.sweep->threshold;
        d["curve_csv"] = harness::curve_csv(*r.sweep);
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Collateral pool incentives, commit-reveal pools and stablecoin episodes";

    static py::exception<Error> error_type(m, "StablepoolError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error_type.ptr())(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.attr("__version__") = harness::kArtifactVersion;

    m.def("compute_incentive", &incentive::compute_incentive, py::arg("filled"), py::arg("total_limit"));

    m.def(
        "compute_distribution",
        [](const std::vector<std::pair<std::string, double>>& fills, double total_limit, double amount, bool direct) {
            const auto r = incentive::compute_distribution(
                to_input(fills, total_limit, amount),
                direct ? incentive::Evaluation::Direct : incentive::Evaluation::LogSpace);
            py::list shares;
            for (const auto& s : r.per_investor) {
                py::dict d;
                d["investor_id"] = s.investor_id;
                d["raw_incentive"] = s.raw_incentive;
                d["fraction"] = s.fraction;
                d["final_incentive"] = s.final_incentive;
                shares.append(d);
            }
            return shares;
        },
        py::arg("fills"), py::arg("total_limit"), py::arg("amount"), py::arg("direct") = false,
        "fills is a list of (investor_id, eth) pairs.");

    m.def("hold_baseline", &incentive::hold_baseline, py::arg("invested"), py::arg("price_start"),
          py::arg("price_end"));

    m.def(
        "find_threshold",
        [](std::vector<double> background, double total_limit, double price_start, double price_end, double margin,
           double lo, double hi) {
            incentive::ThresholdQuery q{std::move(background), total_limit, price_start, price_end, margin, {lo, hi}};
            return incentive::find_threshold(q);
        },
        py::arg("background_fills"), py::arg("total_limit"), py::arg("price_start"), py::arg("price_end"),
        py::arg("margin"), py::arg("lo"), py::arg("hi"));

    m.def(
        "commitment_digest",
        [](const std::string& amount_eth, const std::string& nonce_hex, const std::string& investor_id) {
            return pool::to_hex(pool::commitment_digest(Amount::parse(amount_eth, Currency::Eth),
                                                        pool::nonce_from_hex(nonce_hex), investor_id));
        },
        py::arg("amount_eth"), py::arg("nonce_hex"), py::arg("investor_id"));

    m.def(
        "run_episode",
        [](const std::string& scenario_json, std::optional<std::uint64_t> seed) {
            return report_dict(harness::run_episode(harness::parse_scenario(scenario_json, seed)));
        },
        py::arg("scenario_json"), py::arg("seed") = py::none());

    m.def(
        "run_sweep",
        [](const std::string& scenario_json, std::optional<std::uint64_t> seed) {
            return report_dict(harness::run_sweep(harness::parse_scenario(scenario_json, seed)));
        },
        py::arg("scenario_json"), py::arg("seed") = py::none());

    m.def(
        "export_report",
        [](const std::filesystem::path& scenario_path, const std::filesystem::path& directory,
           std::optional<std::uint64_t> seed) {
            const auto scenario = harness::load_scenario(scenario_path, seed);
            const auto report = scenario.sweep ? harness::run_sweep(scenario) : harness::run_episode(scenario);
            std::vector<std::string> out;
            for (const auto& p : harness::export_report(report, scenario, directory)) out.push_back(p.string());
            return out;
        },
        py::arg("scenario_path"), py::arg("directory"), py::arg("seed") = py::none(),
        "Runs the scenario (with its sweep when configured) and writes the report files.");
}
