#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stablepool {

// Machine-readable failure categories. The CLI prints the category name and
// maps it onto its exit code.
enum class ErrorKind {
    Domain,
    Overflow,
    Underflow,
    NotFound,
    WrongPhase,
    DuplicateCommit,
    EmptyPool,
    UnknownInvestor,
    DigestMismatch,
    AlreadyRevealed,
    BelowMinFill,
    Overfill,
    NoReveals,
    InactivePool,
    InsufficientBacking,
    Dust,
    UnknownBatch,
    AlreadyRedeemed,
    CurrencyMismatch,
    HorizonExceeded,
    NoSweep,
    Scenario,
    Io,
    Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace stablepool
