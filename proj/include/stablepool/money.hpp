#pragma once

// Exact integer money. Every ledger and settlement quantity is an Amount in
// base units; reals only appear as prices and as distribution weights.
//
//   ETH     base unit = 1e-18 ETH
//   STABLE  base unit = 1e-6 STABLE
//   VALUE   base unit = 1e-6 VALUE   (price numeraire; STABLE is pegged 1:1)

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace stablepool {

using u128 = unsigned __int128;
using i128 = __int128;

enum class Currency : std::uint8_t { Eth, Stable, Value };

std::string_view to_string(Currency c) noexcept;

// Base units per whole unit of the currency.
u128 units_per_whole(Currency c) noexcept;
// Decimal places of the base unit (18 or 6).
int decimals(Currency c) noexcept;

std::string u128_to_string(u128 v);
std::string i128_to_string(i128 v);

class Amount {
public:
    constexpr Amount() = default;
    constexpr Amount(u128 units, Currency currency) : units_(units), currency_(currency) {}

    static Amount eth(std::string_view decimal);
    static Amount stable(std::string_view decimal);
    static Amount value(std::string_view decimal);
    // Parses a non-negative decimal like "2", "0.5" or "1e-3" exactly. Digits
    // beyond the base-unit precision are a domain error.
    static Amount parse(std::string_view decimal, Currency currency);
    // Nearest representable amount; for test and CLI convenience only.
    static Amount from_real(double whole_units, Currency currency);

    constexpr u128 units() const noexcept { return units_; }
    constexpr Currency currency() const noexcept { return currency_; }
    constexpr bool is_zero() const noexcept { return units_ == 0; }

    double to_real() const noexcept;
    // Exact decimal rendering, e.g. "1.333333333333333333".
    std::string to_decimal() const;

    Amount operator+(const Amount& other) const;
    // Underflow below zero is a domain error.
    Amount operator-(const Amount& other) const;
    Amount& operator+=(const Amount& other) { return *this = *this + other; }
    Amount& operator-=(const Amount& other) { return *this = *this - other; }

    bool operator==(const Amount& other) const = default;
    // Ordering across currencies is a currency-mismatch error.
    std::strong_ordering operator<=>(const Amount& other) const;

private:
    u128 units_ = 0;
    Currency currency_ = Currency::Eth;
};

// Signed counterpart used for margins and per-investor P&L.
class SignedAmount {
public:
    constexpr SignedAmount() = default;
    constexpr SignedAmount(i128 units, Currency currency) : units_(units), currency_(currency) {}

    // Difference of two same-currency amounts.
    static SignedAmount difference(const Amount& lhs, const Amount& rhs);

    constexpr i128 units() const noexcept { return units_; }
    constexpr Currency currency() const noexcept { return currency_; }
    constexpr bool is_negative() const noexcept { return units_ < 0; }
    Amount magnitude() const noexcept;

    double to_real() const noexcept;
    std::string to_decimal() const;

    SignedAmount operator+(const SignedAmount& other) const;
    SignedAmount operator-() const noexcept { return {-units_, currency_}; }
    bool operator==(const SignedAmount& other) const = default;

private:
    i128 units_ = 0;
    Currency currency_ = Currency::Value;
};

enum class Rounding { Floor, Ceil };

// ETH valued at a VALUE-per-ETH price, as `target` (Value or Stable) units.
Amount eth_to_value(const Amount& eth, double price, Currency target = Currency::Value,
                    Rounding rounding = Rounding::Floor);
// VALUE/STABLE amount converted to ETH at a VALUE-per-ETH price.
Amount value_to_eth(const Amount& value, double price, Rounding rounding = Rounding::Floor);
// amount * factor in the same currency; factor must be finite and >= 0.
Amount scale(const Amount& amount, double factor, Rounding rounding = Rounding::Floor);

}  // namespace stablepool
