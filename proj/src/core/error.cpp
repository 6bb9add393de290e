#include <autopass/error.hpp>

namespace autopass {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidSite: return "invalid_site";
        case ErrorCode::InvalidParameter: return "invalid_parameter";
        case ErrorCode::UnsatisfiablePolicy: return "unsatisfiable_policy";
        case ErrorCode::RetriesExhausted: return "retries_exhausted";
        case ErrorCode::LengthMismatch: return "length_mismatch";
        case ErrorCode::ModulusMismatch: return "modulus_mismatch";
        case ErrorCode::CharOutOfCharset: return "char_out_of_charset";
        case ErrorCode::VaultExists: return "vault_exists";
        case ErrorCode::VaultFormat: return "vault_format";
        case ErrorCode::AuthenticationFailed: return "authentication_failed";
        case ErrorCode::Forbidden: return "forbidden";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::InvariantViolation: return "invariant_violation";
        case ErrorCode::MissingObject: return "missing_object";
        case ErrorCode::SignatureInvalid: return "signature_invalid";
        case ErrorCode::Unavailable: return "unavailable";
        case ErrorCode::VersionConflict: return "version_conflict";
        case ErrorCode::MergeConflictUnresolved: return "merge_conflict_unresolved";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace autopass
