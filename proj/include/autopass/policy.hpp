#pragma once

#include <autopass/derivation.hpp>

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Stage two: turn derived bits into a password that satisfies a site policy,
// and the per-character offsets that steer that password to a chosen value.
namespace autopass {

enum class CharClass : std::uint8_t { Lower = 1, Upper = 2, Digit = 4, Symbol = 8 };

/// Bit set over CharClass.
class ClassSet {
public:
    constexpr ClassSet() = default;
    constexpr ClassSet(std::initializer_list<CharClass> classes) {
        for (auto c : classes) insert(c);
    }

    constexpr void insert(CharClass c) { bits_ |= static_cast<std::uint8_t>(c); }
    constexpr bool contains(CharClass c) const { return bits_ & static_cast<std::uint8_t>(c); }
    constexpr bool subset_of(ClassSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }
    int size() const;
    std::vector<CharClass> members() const;

    static constexpr ClassSet from_bits(std::uint8_t bits) {
        ClassSet s;
        s.bits_ = bits & 0x0F;
        return s;
    }

    friend bool operator==(ClassSet, ClassSet) = default;

private:
    std::uint8_t bits_ = 0;
};

inline constexpr std::array<CharClass, 4> kAllClasses = {CharClass::Lower, CharClass::Upper,
                                                         CharClass::Digit, CharClass::Symbol};

std::string_view class_name(CharClass c);
CharClass class_from_name(std::string_view name);  // throws UnsatisfiablePolicy
CharClass class_of(char c);                         // c must be printable ASCII
/// All characters of a class, ascending by code point.
std::string class_chars(CharClass c);

inline constexpr int kMaxPasswordLength = 64;

struct PasswordPolicy {
    int length_min = 12;
    int length_max = 12;
    ClassSet allowed_classes{CharClass::Lower, CharClass::Upper, CharClass::Digit,
                             CharClass::Symbol};
    ClassSet required_classes{CharClass::Lower, CharClass::Digit};
    std::string forbidden_chars;
    std::uint32_t policy_version = 0;

    friend bool operator==(const PasswordPolicy&, const PasswordPolicy&) = default;
};

/// Policy applied to sites registered without a synced record.
PasswordPolicy default_policy();

/// Ordered, duplicate-free alphabet. The index of a character is its value.
class Charset {
public:
    explicit Charset(std::string chars);  // sorts and de-duplicates

    std::size_t size() const noexcept { return chars_.size(); }
    char at(std::size_t index) const { return chars_.at(index); }
    /// -1 when absent.
    int index_of(char c) const noexcept;
    bool contains(char c) const noexcept { return index_of(c) >= 0; }
    const std::string& chars() const noexcept { return chars_; }

private:
    std::string chars_;
    std::array<std::int8_t, 128> index_{};
};

/// Throws UnsatisfiablePolicy if any structural invariant fails.
void validate_policy(const PasswordPolicy& policy);

/// Union of allowed classes minus forbidden characters, sorted.
Charset effective_charset(const PasswordPolicy& policy);

struct Password {
    std::string text;
    friend bool operator==(const Password&, const Password&) = default;
};

/// True when every required class of `policy` occurs in `text`.
bool has_required_classes(std::string_view text, const PasswordPolicy& policy);

inline constexpr int kEncodeAttempts = 32;

struct EncodeResult {
    Password password;
    int attempts = 0;  // 1..kEncodeAttempts
    std::uint64_t nonce_used = 0;
};

/// Rejection-sampled draw over the stream SHA-256(bits || u64 nonce || u32 block).
/// Length is policy.length_min; retries with nonce+1 until the required
/// classes appear. Throws UnsatisfiablePolicy or RetriesExhausted.
EncodeResult encode_detailed(const DerivedBits& bits, const PasswordPolicy& policy,
                             std::uint64_t attempt_nonce = 0);

inline Password encode(const DerivedBits& bits, const PasswordPolicy& policy,
                       std::uint64_t attempt_nonce = 0) {
    return encode_detailed(bits, policy, attempt_nonce).password;
}

/// Single draw for one nonce with no class check. Exposed for testing.
std::string draw_from_stream(const DerivedBits& bits, const Charset& charset, std::size_t length,
                             std::uint64_t nonce);

struct PasswordOffset {
    std::vector<std::uint32_t> shifts;
    std::uint32_t modulus = 0;

    friend bool operator==(const PasswordOffset&, const PasswordOffset&) = default;
};

Password apply_offset(const Password& base, const PasswordOffset& offset, const Charset& charset);
PasswordOffset compute_offset(const Password& base, const Password& desired,
                              const Charset& charset);

/// Character-wise sum mod N.
PasswordOffset compose_offsets(const PasswordOffset& first, const PasswordOffset& second);

inline constexpr int kRandomOffsetAttempts = 64;

using OffsetRng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection; stable across platforms for a given engine.
std::uint32_t uniform_below(OffsetRng& rng, std::uint32_t bound);

PasswordOffset random_offset(const Password& base, const PasswordPolicy& policy, OffsetRng& rng);

void to_json(nlohmann::json& j, const PasswordPolicy& policy);
void from_json(const nlohmann::json& j, PasswordPolicy& policy);
void to_json(nlohmann::json& j, const PasswordOffset& offset);
void from_json(const nlohmann::json& j, PasswordOffset& offset);

}  // namespace autopass
