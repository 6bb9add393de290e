#pragma once

#include <autopass/crypto.hpp>
#include <autopass/policy.hpp>
#include <autopass/vault.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace autopass::sync {

struct PolicyRecord {
    std::string domain;
    PasswordPolicy policy;
    std::uint64_t record_version = 0;
    friend bool operator==(const PolicyRecord&, const PolicyRecord&) = default;
};

struct UserRecord {
    std::string user_id;
    std::map<std::string, SiteConfig> sites;
    std::uint64_t record_version = 0;
    friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

nlohmann::json policy_record_to_json(const PolicyRecord& record);
PolicyRecord policy_record_from_json(const nlohmann::json& j);
nlohmann::json user_record_to_json(const UserRecord& record);
UserRecord user_record_from_json(const nlohmann::json& j);

/// Sorted keys, no whitespace.
std::string canonical_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Signed envelopes

struct SignedEnvelope {
    std::string payload;  // canonical JSON bytes
    std::string key_id;
    std::int64_t timestamp = 0;
    Bytes signature;
    friend bool operator==(const SignedEnvelope&, const SignedEnvelope&) = default;
};

/// First 8 bytes of SHA-256(public key), hex.
std::string key_id_for(ByteView public_key);

/// [u32 len][key_id][u64 timestamp][payload]
Bytes envelope_signed_bytes(std::string_view key_id, std::int64_t timestamp,
                            std::string_view payload);

SignedEnvelope sign_envelope(std::string payload, const crypto::SigningKeyPair& key,
                             std::int64_t timestamp);

/// True iff key_id names `pinned_public_key` and the signature verifies.
bool verify_envelope(const SignedEnvelope& envelope, ByteView pinned_public_key) noexcept;

nlohmann::json envelope_to_json(const SignedEnvelope& envelope);
SignedEnvelope envelope_from_json(const nlohmann::json& j);  // throws SignatureInvalid

// ---------------------------------------------------------------------------
// Service

using Clock = std::function<std::int64_t()>;  // unix seconds
std::int64_t system_clock_seconds();

inline constexpr std::int64_t kTokenLifetimeSeconds = 30LL * 24 * 3600;

struct HttpResponse {
    int status = 200;
    nlohmann::json body;
};

/// Persistent state behind the service.
struct StoreState {
    std::map<std::string, PolicyRecord> policies;
    struct User {
        Bytes secret_hash;  // SHA-256 of login secret
        UserRecord record;
    };
    std::map<std::string, User> users;
    struct Token {
        std::string user_id;
        std::int64_t expires_at = 0;
    };
    std::map<std::string, Token> tokens;
};

class Store {
public:
    virtual ~Store() = default;
    virtual StoreState load() = 0;
    virtual void save(const StoreState& state) = 0;
};

class MemoryStore final : public Store {
public:
    StoreState load() override { return state_; }
    void save(const StoreState& state) override { state_ = state; }

private:
    StoreState state_;
};

/// Single JSON file, rewritten atomically on every mutation.
class FileStore final : public Store {
public:
    explicit FileStore(std::filesystem::path path) : path_(std::move(path)) {}
    StoreState load() override;
    void save(const StoreState& state) override;

private:
    std::filesystem::path path_;
};

/// Request handling independent of the HTTP transport. Thread-safe.
class SyncService {
public:
    SyncService(std::unique_ptr<Store> store, crypto::SigningKeyPair signing_key,
                Clock clock = system_clock_seconds,
                crypto::RandomSource random = crypto::system_random());

    const crypto::SigningKeyPair& signing_key() const { return key_; }

    // Administration (not exposed over HTTP).
    void put_policy(const std::string& domain, const PasswordPolicy& policy);
    /// Registers a user and returns the freshly generated login secret.
    std::string register_user(const std::string& user_id);

    HttpResponse get_policy(const std::string& domain);
    HttpResponse login(const nlohmann::json& body);
    HttpResponse get_user_sites(const std::string& user_id, std::string_view authorization);
    HttpResponse put_user_sites(const std::string& user_id, std::string_view authorization,
                                const nlohmann::json& body);

private:
    std::optional<HttpResponse> authorize(const std::string& user_id,
                                          std::string_view authorization) const;

    std::unique_ptr<Store> store_;
    crypto::SigningKeyPair key_;
    Clock clock_;
    crypto::RandomSource random_;
    mutable std::mutex mutex_;
    StoreState state_;
};

HttpResponse error_response(int status, std::string_view code, std::string_view message);

/// Binds a SyncService to HTTP/1.1 routes under /v1.
class SyncHttpServer {
public:
    explicit SyncHttpServer(SyncService& service);
    ~SyncHttpServer();

    /// port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    void listen_blocking();
    /// bind + serve on a background thread.
    int start(const std::string& host, int port);
    void stop();

private:
    SyncService& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

crypto::SigningKeyPair load_or_create_signing_key(const std::filesystem::path& path,
                                                  const crypto::RandomSource& random);

// ---------------------------------------------------------------------------
// Client

struct AccessToken {
    std::string token;
    std::int64_t expires_at = 0;
};

class SyncClient {
public:
    /// base_url like "http://127.0.0.1:7871".
    SyncClient(std::string base_url, Bytes pinned_public_key,
               std::chrono::milliseconds timeout = std::chrono::seconds(5));

    const Bytes& pinned_key() const { return pinned_key_; }

    AccessToken login(const std::string& user_id, const std::string& login_secret);

    /// Network envelope, unverified. Throws Unavailable / NotFound.
    SignedEnvelope get_policy_envelope(const std::string& domain);
    /// Verified user record. Throws AuthenticationFailed / Forbidden / SignatureInvalid.
    UserRecord get_user_record(const std::string& user_id, const AccessToken& token);
    /// Compare-and-set upload. Returns the new record version; throws VersionConflict.
    std::uint64_t put_user_record(const UserRecord& record, std::uint64_t expected_version,
                                  const AccessToken& token);

private:
    std::string base_url_;
    Bytes pinned_key_;
    std::chrono::milliseconds timeout_;
};

/// Verified policy from the service, cached in the vault; the cache answers
/// only when the service cannot be reached. Throws SignatureInvalid or Unavailable.
PasswordPolicy fetch_policy(SyncClient* client, Vault& vault, const std::string& domain);

/// Policy from a cached envelope, or nullopt.
std::optional<PasswordPolicy> cached_policy(const Vault& vault, const std::string& domain,
                                            ByteView pinned_public_key);

/// Per site: higher version wins, server wins ties.
void merge_user_record(Vault& vault, const UserRecord& server);

void sync_pull(Vault& vault, SyncClient& client, const std::string& user_id,
               const AccessToken& token);
/// CAS upload; on conflict pulls, merges and retries once. Throws MergeConflictUnresolved.
void sync_push(Vault& vault, SyncClient& client, const std::string& user_id,
               const AccessToken& token);

}  // namespace autopass::sync
