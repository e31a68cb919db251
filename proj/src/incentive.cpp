#include "stablepool/incentive.hpp"

#include "stablepool/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stablepool::incentive {

namespace {

constexpr double kMaxExponent = 700.0;
constexpr double kOverfillTolerance = 1e-12;

bool positive_finite(double x) { return std::isfinite(x) && x > 0; }

int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace

double compute_incentive(double filled, double total_limit) {
    if (!positive_finite(filled)) throw Error(ErrorKind::Domain, "filled must be positive");
    if (!positive_finite(total_limit)) throw Error(ErrorKind::Domain, "total limit must be positive");
    const double exponent = filled - total_limit;
    if (exponent > kMaxExponent) {
        throw Error(ErrorKind::Overflow, "incentive exponent " + std::to_string(exponent) + " overflows");
    }
    return std::exp(exponent) / filled;
}

void validate(const DistributionInput& input) {
    if (input.fills.empty()) throw Error(ErrorKind::Domain, "distribution needs at least one fill");
    if (!positive_finite(input.total_limit)) throw Error(ErrorKind::Domain, "total limit must be positive");
    if (!std::isfinite(input.cumulated_amount)) {
        throw Error(ErrorKind::Domain, "cumulated amount must be finite");
    }
    double total = 0.0;
    for (const auto& f : input.fills) {
        if (!positive_finite(f.filled)) {
            throw Error(ErrorKind::Domain, "fill of '" + f.investor_id + "' must be positive");
        }
        total += f.filled;
    }
    if (total > input.total_limit * (1.0 + kOverfillTolerance)) {
        throw Error(ErrorKind::Domain, "fills sum to " + std::to_string(total) + " above total limit " +
                                           std::to_string(input.total_limit));
    }
}

DistributionResult compute_distribution(const DistributionInput& input, Evaluation evaluation) {
    validate(input);
    const std::size_t n = input.fills.size();

    DistributionResult result;
    result.per_investor.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& share = result.per_investor[i];
        share.investor_id = input.fills[i].investor_id;
        share.raw_incentive = compute_incentive(input.fills[i].filled, input.total_limit);
        result.lsum += share.raw_incentive;
    }

    if (evaluation == Evaluation::Direct) {
        if (!(result.lsum > 0)) {
            throw Error(ErrorKind::Underflow, "every raw incentive underflowed to zero");
        }
        for (auto& share : result.per_investor) share.fraction = share.raw_incentive / result.lsum;
    } else {
        // log incentive_i + T = f_i - ln f_i; the common T drops out of the ratio.
        std::vector<double> logits(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double f = input.fills[i].filled;
            logits[i] = f - std::log(f);
        }
        const double peak = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double& l : logits) {
            l = std::exp(l - peak);
            denom += l;
        }
        for (std::size_t i = 0; i < n; ++i) result.per_investor[i].fraction = logits[i] / denom;
    }

    for (auto& share : result.per_investor) share.final_incentive = share.fraction * input.cumulated_amount;
    return result;
}

double pool_return(std::string_view investor_id, const DistributionInput& input) {
    const auto it = std::find_if(input.fills.begin(), input.fills.end(),
                                 [&](const Fill& f) { return f.investor_id == investor_id; });
    if (it == input.fills.end()) {
        throw Error(ErrorKind::NotFound, "investor '" + std::string(investor_id) + "' not in distribution");
    }
    const auto result = compute_distribution(input);
    return result.per_investor[static_cast<std::size_t>(it - input.fills.begin())].final_incentive;
}

double hold_baseline(double invested, double price_start, double price_end) {
    if (!positive_finite(invested) || !positive_finite(price_start) || !positive_finite(price_end)) {
        throw Error(ErrorKind::Domain, "hold baseline inputs must be positive");
    }
    return invested * (price_end - price_start);
}

std::optional<double> find_crossing(const std::function<double(double)>& f, SearchDomain domain,
                                    int grid_points, int max_iterations) {
    if (!(domain.lo < domain.hi) || grid_points < 2) {
        throw Error(ErrorKind::Domain, "search domain must satisfy lo < hi");
    }
    const double step = (domain.hi - domain.lo) / (grid_points - 1);

    double last_x = 0.0;
    double last_f = 0.0;
    bool have_last = false;
    std::optional<double> first_zero;

    for (int k = 0; k < grid_points; ++k) {
        const double x = (k == grid_points - 1) ? domain.hi : domain.lo + step * k;
        const double fx = f(x);
        if (std::isnan(fx)) throw Error(ErrorKind::Domain, "crossing function returned NaN");
        if (fx == 0.0) {
            if (!first_zero) first_zero = x;
            continue;
        }
        if (have_last && sign_of(fx) != sign_of(last_f)) {
            if (first_zero) return first_zero;
            double a = last_x, fa = last_f, b = x, fb = fx;
            for (int it = 0; it < max_iterations; ++it) {
                const double mid = a + (b - a) / 2;
                if (mid <= a || mid >= b) break;
                const double fm = f(mid);
                if (fm == 0.0) return mid;
                if (sign_of(fm) == sign_of(fa)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                    fb = fm;
                }
            }
            return std::abs(fa) <= std::abs(fb) ? a : b;
        }
        // A zero not flanked by a sign change is a touch, not a crossing.
        first_zero.reset();
        last_x = x;
        last_f = fx;
        have_last = true;
    }
    return std::nullopt;
}

double marginal_pool_return(const ThresholdQuery& query, double fill) {
    DistributionInput input;
    input.total_limit = query.total_limit;
    input.cumulated_amount = query.margin;
    input.fills.reserve(query.background_fills.size() + 1);
    for (std::size_t i = 0; i < query.background_fills.size(); ++i) {
        input.fills.push_back({"background-" + std::to_string(i), query.background_fills[i]});
    }
    input.fills.push_back({"marginal", fill});
    return compute_distribution(input).per_investor.back().final_incentive;
}

double marginal_advantage(const ThresholdQuery& query, double fill) {
    return marginal_pool_return(query, fill) - hold_baseline(fill, query.price_start, query.price_end);
}

std::optional<double> find_threshold(const ThresholdQuery& query) {
    const auto& dom = query.search_domain;
    if (!positive_finite(query.total_limit)) throw Error(ErrorKind::Domain, "total limit must be positive");
    if (!positive_finite(query.price_start) || !positive_finite(query.price_end)) {
        throw Error(ErrorKind::Domain, "prices must be positive");
    }
    if (!std::isfinite(query.margin)) throw Error(ErrorKind::Domain, "margin must be finite");
    double background = 0.0;
    for (double b : query.background_fills) {
        if (!positive_finite(b)) throw Error(ErrorKind::Domain, "background fills must be positive");
        background += b;
    }
    if (!std::isfinite(dom.lo) || !std::isfinite(dom.hi) || dom.lo < 1.0 || !(dom.lo < dom.hi)) {
        throw Error(ErrorKind::Domain, "search domain must satisfy 1 <= lo < hi");
    }
    const double capacity = query.total_limit - background;
    if (dom.hi > capacity * (1.0 + kOverfillTolerance)) {
        throw Error(ErrorKind::Domain, "search domain exceeds remaining capacity " + std::to_string(capacity));
    }
    return find_crossing([&](double x) { return marginal_advantage(query, x); }, dom);
}

std::optional<double> partition_threshold(const DistributionInput& realized, double price_start,
                                          double price_end, SearchDomain domain) {
    validate(realized);
    if (!positive_finite(price_start) || !positive_finite(price_end)) {
        throw Error(ErrorKind::Domain, "prices must be positive");
    }
    if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi) ||
        domain.lo <= 0) {
        throw Error(ErrorKind::Domain, "search domain must satisfy 0 < lo < hi");
    }
    domain.lo = std::max(domain.lo, 2.0);
    if (!(domain.lo < domain.hi)) return std::nullopt;

    // Weights relative to the heaviest realized logit keep the sum finite.
    double peak = -INFINITY;
    for (const auto& f : realized.fills) peak = std::max(peak, f.filled - std::log(f.filled));
    double weight_sum = 0.0;
    for (const auto& f : realized.fills) weight_sum += std::exp(f.filled - std::log(f.filled) - peak);

    const double margin = realized.cumulated_amount;
    const auto advantage = [&](double x) {
        const double hold = x * (price_end - price_start);
        if (margin == 0.0) return -hold;
        const double share = std::exp(x - std::log(x) - peak) / weight_sum;
        return share * margin - hold;
    };
    return find_crossing(advantage, domain);
}

}  // namespace stablepool::incentive
