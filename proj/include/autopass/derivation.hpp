#pragma once

#include <autopass/bytes.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// Stage one of password generation: normalize the per-site inputs and
// combine them with the stretched secret into a 256-bit string.
namespace autopass {

struct MasterSecretTag {};
struct StretchedKeyTag {};
struct ObjectDigestTag {};
struct DerivedBitsTag {};

using StretchedKey = Bytes32<StretchedKeyTag>;
using ObjectDigest = Bytes32<ObjectDigestTag>;
using DerivedBits = Bytes32<DerivedBitsTag>;

/// The 32-byte stored secret. Wiped when it goes out of scope.
class MasterSecret {
public:
    static constexpr std::size_t kSize = 32;

    MasterSecret() = default;
    explicit MasterSecret(ByteView bytes);  // throws InvalidParameter unless 32 bytes
    MasterSecret(const MasterSecret&) = default;
    MasterSecret(MasterSecret&&) noexcept = default;
    MasterSecret& operator=(const MasterSecret&) = default;
    MasterSecret& operator=(MasterSecret&&) noexcept = default;
    ~MasterSecret();

    ByteView view() const noexcept { return {bytes_.data(), bytes_.size()}; }
    friend bool operator==(const MasterSecret&, const MasterSecret&) = default;

private:
    std::array<std::uint8_t, kSize> bytes_{};
};

/// The user-entered password (or PIN). Held as UTF-8; wiped on destruction.
class UserPassword {
public:
    explicit UserPassword(std::string_view text);  // throws InvalidParameter if empty
    UserPassword(const UserPassword& other) : UserPassword(other.text()) {}
    UserPassword& operator=(const UserPassword&) = delete;
    ~UserPassword() = default;

    std::string_view text() const noexcept {
        return {reinterpret_cast<const char*>(bytes_.data()), bytes_.size()};
    }
    ByteView bytes() const noexcept { return bytes_.view(); }

private:
    SecureBytes bytes_;
};

enum class SiteSource : std::uint8_t { Url = 1, UserSiteName = 2 };

struct SiteKey {
    std::string value;
    SiteSource source = SiteSource::Url;

    friend bool operator==(const SiteKey&, const SiteKey&) = default;
};

inline constexpr int kDefaultSiteLabels = 2;
inline constexpr std::uint32_t kDefaultInnerIterations = 100'000;

/// url: host only, lowercased, one leading "www." and any port dropped, then
/// the last `label_count` labels kept (IP literals are kept whole).
/// user_site_name: trimmed and lowercased.
/// Throws Error(InvalidSite).
SiteKey normalize_site(std::string_view raw, SiteSource mode,
                       int label_count = kDefaultSiteLabels);

ObjectDigest digest_object(ByteView content);

/// H applied `iterations` times. Throws InvalidParameter for 0 iterations.
StretchedKey stretch(ByteView secret, std::uint32_t iterations);

/// Inner-level input: [len][master secret][len][password bytes].
SecureBytes stage_one_input(const MasterSecret& master, const UserPassword& password);

struct InputBundle {
    StretchedKey stretched_key;
    SiteKey site_key;
    std::optional<std::string> user_constant;
    std::optional<std::string> user_name;
    std::optional<ObjectDigest> object_digest;
    std::uint64_t version_nonce = 0;

    friend bool operator==(const InputBundle&, const InputBundle&) = default;
};

inline constexpr std::string_view kBundleTag = "autopass.v1";

/// Tag, then each field as [presence byte][u32 BE length][bytes], in
/// declaration order. Absent optionals are [0][0].
SecureBytes canonical_serialize(const InputBundle& bundle);

DerivedBits derive_bits(const InputBundle& bundle);

}  // namespace autopass
