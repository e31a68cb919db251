#include "stablepool/money.hpp"

#include "stablepool/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace stablepool {

namespace {

using boost::multiprecision::cpp_int;

constexpr u128 pow10_u128(int n) {
    u128 v = 1;
    for (int i = 0; i < n; ++i) v *= 10;
    return v;
}

cpp_int to_big(u128 v) {
    cpp_int hi = static_cast<std::uint64_t>(v >> 64);
    return (hi << 64) | cpp_int(static_cast<std::uint64_t>(v));
}

u128 from_big(const cpp_int& v) {
    static const cpp_int max_u128 = (cpp_int(1) << 128) - 1;
    if (v < 0 || v > max_u128) throw Error(ErrorKind::Overflow, "amount exceeds 128-bit range");
    const auto lo = static_cast<std::uint64_t>(v & cpp_int(std::numeric_limits<std::uint64_t>::max()));
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    return (static_cast<u128>(hi) << 64) | lo;
}

// A finite non-negative double is exactly mantissa * 2^exponent.
struct ExactReal {
    cpp_int mantissa;
    int exponent = 0;
};

ExactReal decompose(double x, const char* what) {
    if (!std::isfinite(x) || x < 0) {
        throw Error(ErrorKind::Domain, std::string(what) + " must be finite and non-negative");
    }
    int e = 0;
    const double f = std::frexp(x, &e);
    const auto m = static_cast<std::int64_t>(std::ldexp(f, 53));
    return {cpp_int(m), e - 53};
}

cpp_int divide(const cpp_int& num, const cpp_int& den, Rounding rounding) {
    cpp_int q = num / den;
    if (rounding == Rounding::Ceil && q * den != num) ++q;
    return q;
}

// x * real * num / den, rounded.
u128 mul_real(u128 x, double real, const cpp_int& num, const cpp_int& den, Rounding rounding,
              const char* what) {
    const ExactReal r = decompose(real, what);
    cpp_int n = to_big(x) * r.mantissa * num;
    cpp_int d = den;
    if (r.exponent >= 0) {
        n <<= r.exponent;
    } else {
        d <<= -r.exponent;
    }
    return from_big(divide(n, d, rounding));
}

// x * num / (den * real), rounded.
u128 div_real(u128 x, double real, const cpp_int& num, const cpp_int& den, Rounding rounding,
              const char* what) {
    const ExactReal r = decompose(real, what);
    if (r.mantissa == 0) throw Error(ErrorKind::Domain, std::string(what) + " must be positive");
    cpp_int n = to_big(x) * num;
    cpp_int d = den * r.mantissa;
    if (r.exponent >= 0) {
        d <<= r.exponent;
    } else {
        n <<= -r.exponent;
    }
    return from_big(divide(n, d, rounding));
}

void require_same(const Amount& a, const Amount& b) {
    if (a.currency() != b.currency()) {
        throw Error(ErrorKind::CurrencyMismatch, std::string("cannot combine ") +
                                                     std::string(to_string(a.currency())) + " and " +
                                                     std::string(to_string(b.currency())));
    }
}

std::string render(u128 magnitude, bool negative, Currency c) {
    const u128 scale = units_per_whole(c);
    std::string out = negative ? "-" : "";
    out += u128_to_string(magnitude / scale);
    u128 frac = magnitude % scale;
    if (frac != 0) {
        std::string digits = u128_to_string(frac);
        digits.insert(0, static_cast<std::size_t>(decimals(c)) - digits.size(), '0');
        while (!digits.empty() && digits.back() == '0') digits.pop_back();
        out += '.';
        out += digits;
    }
    return out;
}

}  // namespace

std::string_view to_string(Currency c) noexcept {
    switch (c) {
        case Currency::Eth: return "ETH";
        case Currency::Stable: return "STABLE";
        case Currency::Value: return "VALUE";
    }
    return "?";
}

int decimals(Currency c) noexcept { return c == Currency::Eth ? 18 : 6; }

u128 units_per_whole(Currency c) noexcept { return pow10_u128(decimals(c)); }

std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

std::string i128_to_string(i128 v) {
    if (v >= 0) return u128_to_string(static_cast<u128>(v));
    return "-" + u128_to_string(static_cast<u128>(-(v + 1)) + 1);
}

Amount Amount::eth(std::string_view decimal) { return parse(decimal, Currency::Eth); }
Amount Amount::stable(std::string_view decimal) { return parse(decimal, Currency::Stable); }
Amount Amount::value(std::string_view decimal) { return parse(decimal, Currency::Value); }

Amount Amount::parse(std::string_view text, Currency currency) {
    const auto bad = [&](const char* why) {
        return Error(ErrorKind::Domain, "invalid " + std::string(to_string(currency)) + " amount '" +
                                            std::string(text) + "': " + why);
    };
    std::size_t i = 0;
    if (i < text.size() && text[i] == '+') ++i;
    cpp_int digits = 0;
    int frac_len = 0;
    int n_digits = 0;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char ch = text[i];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            digits = digits * 10 + (ch - '0');
            ++n_digits;
            if (seen_point) ++frac_len;
        } else if (ch == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (n_digits == 0) throw bad("no digits");
    int exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool neg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
        int n_exp = 0;
        for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++n_exp) {
            exponent = exponent * 10 + (text[i] - '0');
            if (exponent > 100) throw bad("exponent out of range");
        }
        if (n_exp == 0) throw bad("empty exponent");
        if (neg) exponent = -exponent;
    }
    if (i != text.size()) throw bad("unexpected characters");

    const int shift = exponent - frac_len + decimals(currency);
    if (shift >= 0) {
        for (int k = 0; k < shift; ++k) digits *= 10;
    } else {
        cpp_int div = 1;
        for (int k = 0; k < -shift; ++k) div *= 10;
        if (digits % div != 0) throw bad("finer than the base unit");
        digits /= div;
    }
    return {from_big(digits), currency};
}

Amount Amount::from_real(double whole_units, Currency currency) {
    if (!std::isfinite(whole_units) || whole_units < 0) {
        throw Error(ErrorKind::Domain, "amount must be finite and non-negative");
    }
    const long double scaled = std::round(static_cast<long double>(whole_units) *
                                          static_cast<long double>(units_per_whole(currency)));
    return {static_cast<u128>(scaled), currency};
}

double Amount::to_real() const noexcept {
    return static_cast<double>(static_cast<long double>(units_) /
                               static_cast<long double>(units_per_whole(currency_)));
}

std::string Amount::to_decimal() const { return render(units_, false, currency_); }

Amount Amount::operator+(const Amount& other) const {
    require_same(*this, other);
    const u128 sum = units_ + other.units_;
    if (sum < units_) throw Error(ErrorKind::Overflow, "amount addition overflow");
    return {sum, currency_};
}

Amount Amount::operator-(const Amount& other) const {
    require_same(*this, other);
    if (other.units_ > units_) throw Error(ErrorKind::Domain, "amount subtraction below zero");
    return {units_ - other.units_, currency_};
}

std::strong_ordering Amount::operator<=>(const Amount& other) const {
    require_same(*this, other);
    return units_ <=> other.units_;
}

SignedAmount SignedAmount::difference(const Amount& lhs, const Amount& rhs) {
    require_same(lhs, rhs);
    const i128 l = static_cast<i128>(lhs.units());
    const i128 r = static_cast<i128>(rhs.units());
    if (l < 0 || r < 0) throw Error(ErrorKind::Overflow, "amount exceeds signed range");
    return {l - r, lhs.currency()};
}

Amount SignedAmount::magnitude() const noexcept {
    return {units_ < 0 ? static_cast<u128>(-(units_ + 1)) + 1 : static_cast<u128>(units_), currency_};
}

double SignedAmount::to_real() const noexcept {
    return static_cast<double>(static_cast<long double>(units_) /
                               static_cast<long double>(units_per_whole(currency_)));
}

std::string SignedAmount::to_decimal() const {
    return render(magnitude().units(), units_ < 0, currency_);
}

SignedAmount SignedAmount::operator+(const SignedAmount& other) const {
    if (currency_ != other.currency_) {
        throw Error(ErrorKind::CurrencyMismatch, "cannot add signed amounts of different currency");
    }
    return {units_ + other.units_, currency_};
}

Amount eth_to_value(const Amount& eth, double price, Currency target, Rounding rounding) {
    if (eth.currency() != Currency::Eth) throw Error(ErrorKind::CurrencyMismatch, "expected ETH amount");
    if (target == Currency::Eth) throw Error(ErrorKind::CurrencyMismatch, "target must be VALUE or STABLE");
    if (!(price > 0)) throw Error(ErrorKind::Domain, "price must be positive");
    // eth_units * 1e-18 * price * 1e6
    static const cpp_int eth_per_value_unit = cpp_int(1000000000000LL);
    return {mul_real(eth.units(), price, 1, eth_per_value_unit, rounding, "price"), target};
}

Amount value_to_eth(const Amount& value, double price, Rounding rounding) {
    if (value.currency() == Currency::Eth) throw Error(ErrorKind::CurrencyMismatch, "expected VALUE or STABLE");
    if (!(price > 0)) throw Error(ErrorKind::Domain, "price must be positive");
    static const cpp_int eth_per_value_unit = cpp_int(1000000000000LL);
    return {div_real(value.units(), price, eth_per_value_unit, 1, rounding, "price"), Currency::Eth};
}

Amount scale(const Amount& amount, double factor, Rounding rounding) {
    return {mul_real(amount.units(), factor, 1, 1, rounding, "factor"), amount.currency()};
}

}  // namespace stablepool
