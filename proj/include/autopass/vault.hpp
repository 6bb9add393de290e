#pragma once

#include <autopass/crypto.hpp>
#include <autopass/derivation.hpp>
#include <autopass/policy.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace autopass {

inline constexpr std::string_view kVaultMagic = "autopass-vault";
inline constexpr int kVaultFormatVersion = 1;
inline constexpr std::uint32_t kDefaultKdfIterations = 100'000;

struct KdfParams {
    Bytes salt;  // 16 bytes
    std::uint32_t iterations = kDefaultKdfIterations;
    friend bool operator==(const KdfParams&, const KdfParams&) = default;
};

struct GlobalConfig {
    KdfParams kdf;
    Bytes master_nonce;       // 12 bytes
    Bytes encrypted_master;   // ciphertext || tag
    std::string user_constant;
    std::string hash_id = crypto::kHashId;
    std::uint32_t inner_iterations = kDefaultInnerIterations;
    int site_labels = kDefaultSiteLabels;
    int format_version = kVaultFormatVersion;
    friend bool operator==(const GlobalConfig&, const GlobalConfig&) = default;
};

struct InputParams {
    bool use_user_constant = true;
    bool use_user_name = false;
    bool use_object = false;
    std::optional<std::string> user_name;
    std::uint64_t version_nonce = 0;
    friend bool operator==(const InputParams&, const InputParams&) = default;
};

struct SiteConfig {
    SiteKey site_key;
    PasswordPolicy policy;
    std::optional<PasswordOffset> offset;
    InputParams input_params;
    std::optional<std::string> reminder;
    std::uint64_t version = 0;
    std::int64_t updated_at = 0;  // unix seconds
    friend bool operator==(const SiteConfig&, const SiteConfig&) = default;
};

/// Local view of the user's record on the sync service.
struct SyncState {
    std::optional<std::string> user_id;
    std::uint64_t record_version = 0;
    friend bool operator==(const SyncState&, const SyncState&) = default;
};

struct Vault {
    GlobalConfig global;
    std::map<std::string, SiteConfig> sites;        // keyed by SiteKey::value
    std::map<std::string, nlohmann::json> policy_cache;  // domain -> signed envelope
    SyncState sync;
    friend bool operator==(const Vault&, const Vault&) = default;
};

struct VaultParams {
    std::uint32_t kdf_iterations = kDefaultKdfIterations;
    std::uint32_t inner_iterations = kDefaultInnerIterations;
    std::string user_constant;
    int site_labels = kDefaultSiteLabels;
};

/// Fresh vault with a random master secret sealed under the password-derived key.
Vault init_vault(const UserPassword& password, const VaultParams& params,
                 const crypto::RandomSource& random = crypto::system_random());

/// Throws AuthenticationFailed for a wrong password or any tampering.
MasterSecret unlock(const Vault& vault, const UserPassword& password);

/// Checks the SiteConfig invariants. Throws InvariantViolation.
void check_site_config(const SiteConfig& config);

/// Stores `config` with version = previous + 1 (1 when new).
void upsert_site(Vault& vault, SiteConfig config);
const SiteConfig& get_site(const Vault& vault, const std::string& site_key);  // throws NotFound
std::vector<SiteKey> list_sites(const Vault& vault);

/// SiteConfig for a newly seen site with the default policy and input parameters.
SiteConfig new_site_config(SiteKey key, PasswordPolicy policy = default_policy());

SiteKey resolve_site(const Vault& vault, std::string_view raw_site,
                     SiteSource mode = SiteSource::Url);

/// The policy-encoded password before any offset is applied.
Password base_password(const Vault& vault, const MasterSecret& master,
                       const UserPassword& password, const SiteConfig& site,
                       std::optional<ByteView> object_content);

/// Full pipeline with a secret that is already unlocked.
Password generate_password(const Vault& vault, const MasterSecret& master,
                           const UserPassword& password, const SiteKey& site,
                           std::optional<ByteView> object_content = std::nullopt);

/// unlock -> stretch -> normalize -> derive -> encode -> offset.
Password generate_password(const Vault& vault, const UserPassword& password,
                           std::string_view raw_site,
                           std::optional<ByteView> object_content = std::nullopt,
                           SiteSource mode = SiteSource::Url);

void pin_password(Vault& vault, const UserPassword& password, const SiteKey& site,
                  const Password& desired, std::optional<ByteView> object_content = std::nullopt);

void rotate_password(Vault& vault, const UserPassword& password, const SiteKey& site,
                     OffsetRng& rng, std::optional<ByteView> object_content = std::nullopt);

// Serialization. Byte fields are base64.
nlohmann::json site_config_to_json(const SiteConfig& config);
SiteConfig site_config_from_json(const nlohmann::json& j);
nlohmann::json vault_to_json(const Vault& vault);
Vault vault_from_json(const nlohmann::json& j);  // throws VaultFormat

std::string serialize_vault(const Vault& vault);
Vault parse_vault(std::string_view text);

// Files.
std::filesystem::path vault_path(const std::filesystem::path& home);
bool vault_exists(const std::filesystem::path& home);
Vault load_vault(const std::filesystem::path& home);  // throws NotFound / VaultFormat
/// Atomic replace, mode 0600.
void save_vault(const std::filesystem::path& home, const Vault& vault);
/// Writes a new vault; throws VaultExists unless `force`.
void create_vault_file(const std::filesystem::path& home, const Vault& vault, bool force);

/// Exclusive advisory lock on <home>/vault.lock for the lifetime of the object.
class VaultLock {
public:
    explicit VaultLock(const std::filesystem::path& home);
    ~VaultLock();
    VaultLock(const VaultLock&) = delete;
    VaultLock& operator=(const VaultLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace autopass
