#include "stablepool/error.hpp"

namespace stablepool {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Overflow: return "overflow";
        case ErrorKind::Underflow: return "underflow";
        case ErrorKind::NotFound: return "not-found";
        case ErrorKind::WrongPhase: return "wrong-phase";
        case ErrorKind::DuplicateCommit: return "duplicate-commit";
        case ErrorKind::EmptyPool: return "empty-pool";
        case ErrorKind::UnknownInvestor: return "unknown-investor";
        case ErrorKind::DigestMismatch: return "digest-mismatch";
        case ErrorKind::AlreadyRevealed: return "already-revealed";
        case ErrorKind::BelowMinFill: return "below-min-fill";
        case ErrorKind::Overfill: return "overfill";
        case ErrorKind::NoReveals: return "no-reveals";
        case ErrorKind::InactivePool: return "inactive-pool";
        case ErrorKind::InsufficientBacking: return "insufficient-backing";
        case ErrorKind::Dust: return "dust";
        case ErrorKind::UnknownBatch: return "unknown-batch";
        case ErrorKind::AlreadyRedeemed: return "already-redeemed";
        case ErrorKind::CurrencyMismatch: return "currency-mismatch";
        case ErrorKind::HorizonExceeded: return "horizon-exceeded";
        case ErrorKind::NoSweep: return "no-sweep";
        case ErrorKind::Scenario: return "scenario";
        case ErrorKind::Io: return "io";
        case ErrorKind::Internal: return "internal";
    }
    return "internal";
}

}  // namespace stablepool
