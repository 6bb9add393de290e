#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autopass {

enum class ErrorCode {
    InvalidSite,
    InvalidParameter,
    UnsatisfiablePolicy,
    RetriesExhausted,
    LengthMismatch,
    ModulusMismatch,
    CharOutOfCharset,
    VaultExists,
    VaultFormat,
    AuthenticationFailed,
    Forbidden,
    NotFound,
    InvariantViolation,
    MissingObject,
    SignatureInvalid,
    Unavailable,
    VersionConflict,
    MergeConflictUnresolved,
    Io,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Messages never carry secret material; callers pass only identifiers
// (site keys, field names) into them.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace autopass
