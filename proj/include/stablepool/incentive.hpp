#pragma once

// Exponential margin distribution among collateral-pool investors.
//
// Each investor i who filled f_i ETH of a pool with limit T receives the raw
// weight
//
//     incentive_i = exp(f_i - T) / f_i
//
// and the share fraction_i = incentive_i / sum_j incentive_j of the margin A.
// The exp(-T) factor cancels in the ratio, so fractions are evaluated from the
// logits f_i - ln(f_i) with a max-shift; the direct form underflows to 0/0 for
// pools of a few hundred ETH.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stablepool::incentive {

struct Fill {
    std::string investor_id;
    double filled = 0.0;  // ETH
};

struct DistributionInput {
    std::vector<Fill> fills;
    double total_limit = 0.0;       // ETH
    double cumulated_amount = 0.0;  // VALUE; negative for a loss
};

struct InvestorShare {
    std::string investor_id;
    double raw_incentive = 0.0;
    double fraction = 0.0;
    double final_incentive = 0.0;
};

struct DistributionResult {
    std::vector<InvestorShare> per_investor;  // same order as the input fills
    double lsum = 0.0;
};

enum class Evaluation {
    LogSpace,
    // Direct ratio of raw incentives. Diagnostic only: fails with an underflow
    // error when every raw incentive rounds to zero.
    Direct,
};

double compute_incentive(double filled, double total_limit);

// Throws Domain on an invalid input (empty, non-positive fill, overfilled pool).
void validate(const DistributionInput& input);

DistributionResult compute_distribution(const DistributionInput& input,
                                        Evaluation evaluation = Evaluation::LogSpace);

// The investor's distributed share of the margin. Principal is returned
// separately and is not part of this figure.
double pool_return(std::string_view investor_id, const DistributionInput& input);

// P&L of holding `invested` ETH from price_start to price_end.
double hold_baseline(double invested, double price_start, double price_end);

struct SearchDomain {
    double lo = 1.0;
    double hi = 1.0;
};

struct ThresholdQuery {
    std::vector<double> background_fills;  // other investors, ETH
    double total_limit = 0.0;
    double price_start = 0.0;
    double price_end = 0.0;
    double margin = 0.0;  // VALUE distributed over background + marginal fill
    SearchDomain search_domain;
};

inline constexpr int kThresholdGridPoints = 256;
inline constexpr int kBisectionMaxIterations = 200;

// Pool return of a marginal investor filling x next to the background fills.
double marginal_pool_return(const ThresholdQuery& query, double fill);

// Advantage of a marginal investor filling x next to the background fills:
// pool_return(x) - hold_baseline(x).
double marginal_advantage(const ThresholdQuery& query, double fill);

// Smallest fill in the search domain where the marginal investor's pool return
// equals the hold baseline, or nullopt when the advantage never changes sign.
std::optional<double> find_threshold(const ThresholdQuery& query);

// Break-even fill inside a realized pool: the fill whose weight, measured
// against the realized Lsum, earns exactly the hold baseline. Searched on
// [max(lo, 2), hi] where the per-ETH weight exp(x)/x^2 is increasing, so fills
// above it out-earn holding in a rising market and the reverse below it.
std::optional<double> partition_threshold(const DistributionInput& realized, double price_start,
                                          double price_end, SearchDomain domain);

// Grid scan followed by bisection. Returns the smallest root bracketed by
// consecutive grid points, or nullopt without a sign change.
std::optional<double> find_crossing(const std::function<double(double)>& f, SearchDomain domain,
                                    int grid_points = kThresholdGridPoints,
                                    int max_iterations = kBisectionMaxIterations);

}  // namespace stablepool::incentive
