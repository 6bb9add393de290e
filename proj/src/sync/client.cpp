#include <autopass/error.hpp>
#include <autopass/sync.hpp>

#include <httplib.h>

namespace autopass::sync {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& base_url, std::chrono::milliseconds timeout) {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    return cli;
}

[[noreturn]] void throw_for_status(int status, const std::string& what) {
    switch (status) {
        case 401: throw Error(ErrorCode::AuthenticationFailed, what + ": unauthorized");
        case 403: throw Error(ErrorCode::Forbidden, what + ": forbidden");
        case 404: throw Error(ErrorCode::NotFound, what + ": not found");
        case 409: throw Error(ErrorCode::VersionConflict, what + ": version conflict");
        default: throw Error(ErrorCode::Unavailable, what + ": service returned HTTP " + std::to_string(status));
    }
}

json body_json(const httplib::Result& res, const std::string& what) {
    auto j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::Unavailable, what + ": malformed response");
    return j;
}

void check_transport(const httplib::Result& res, const std::string& what) {
    if (!res) throw Error(ErrorCode::Unavailable, what + ": service unreachable (" + httplib::to_string(res.error()) + ")");
}

std::string bearer(const AccessToken& token) { return "Bearer " + token.token; }

}  // namespace

SyncClient::SyncClient(std::string base_url, Bytes pinned_public_key, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), pinned_key_(std::move(pinned_public_key)), timeout_(timeout) {
    if (pinned_key_.size() != crypto::kSignPublicKeySize)
        throw Error(ErrorCode::InvalidParameter, "pinned server key must be 32 bytes");
}

AccessToken SyncClient::login(const std::string& user_id, const std::string& login_secret) {
    auto cli = make_client(base_url_, timeout_);
    auto res = cli.Post("/v1/login", json{{"user_id", user_id}, {"login_secret", login_secret}}.dump(),
                        "application/json");
    check_transport(res, "login");
    if (res->status != 200) throw_for_status(res->status, "login");
    auto j = body_json(res, "login");
    return {j.at("token").get<std::string>(), j.at("expires_at").get<std::int64_t>()};
}

SignedEnvelope SyncClient::get_policy_envelope(const std::string& domain) {
    auto cli = make_client(base_url_, timeout_);
    auto res = cli.Get("/v1/policies/" + httplib::detail::encode_url(domain));
    check_transport(res, "policy fetch");
    if (res->status != 200) throw_for_status(res->status, "policy fetch");
    return envelope_from_json(body_json(res, "policy fetch"));
}

UserRecord SyncClient::get_user_record(const std::string& user_id, const AccessToken& token) {
    auto cli = make_client(base_url_, timeout_);
    auto res = cli.Get("/v1/user/" + httplib::detail::encode_url(user_id) + "/sites",
                       httplib::Headers{{"Authorization", bearer(token)}});
    check_transport(res, "sync pull");
    if (res->status != 200) throw_for_status(res->status, "sync pull");
    auto env = envelope_from_json(body_json(res, "sync pull"));
    if (!verify_envelope(env, pinned_key_)) throw Error(ErrorCode::SignatureInvalid, "user record signature invalid");
    auto payload = json::parse(env.payload, nullptr, false);
    if (payload.is_discarded()) throw Error(ErrorCode::SignatureInvalid, "user record payload malformed");
    auto record = user_record_from_json(payload);
    if (record.user_id != user_id) throw Error(ErrorCode::SignatureInvalid, "user record for a different user");
    return record;
}

std::uint64_t SyncClient::put_user_record(const UserRecord& record, std::uint64_t expected_version,
                                          const AccessToken& token) {
    auto cli = make_client(base_url_, timeout_);
    json body{{"record", user_record_to_json(record)}, {"expected_version", expected_version}};
    auto res = cli.Put("/v1/user/" + httplib::detail::encode_url(record.user_id) + "/sites",
                       httplib::Headers{{"Authorization", bearer(token)}}, body.dump(), "application/json");
    check_transport(res, "sync push");
    if (res->status != 200) throw_for_status(res->status, "sync push");
    return body_json(res, "sync push").at("new_version").get<std::uint64_t>();
}

namespace {

PasswordPolicy policy_from_envelope(const SignedEnvelope& env, const std::string& domain) {
    auto payload = json::parse(env.payload, nullptr, false);
    if (payload.is_discarded()) throw Error(ErrorCode::SignatureInvalid, "policy payload malformed");
    PolicyRecord record;
    try {
        record = policy_record_from_json(payload);
    } catch (const Error&) {
        throw Error(ErrorCode::SignatureInvalid, "policy payload malformed");
    }
    if (record.domain != domain) throw Error(ErrorCode::SignatureInvalid, "policy record names a different domain");
    validate_policy(record.policy);
    return record.policy;
}

}  // namespace

std::optional<PasswordPolicy> cached_policy(const Vault& vault, const std::string& domain,
                                            ByteView pinned_public_key) {
    auto it = vault.policy_cache.find(domain);
    if (it == vault.policy_cache.end()) return std::nullopt;
    auto env = envelope_from_json(it->second);
    if (!verify_envelope(env, pinned_public_key))
        throw Error(ErrorCode::SignatureInvalid, "cached policy signature invalid");
    return policy_from_envelope(env, domain);
}

PasswordPolicy fetch_policy(SyncClient* client, Vault& vault, const std::string& domain) {
    if (client == nullptr) throw Error(ErrorCode::Unavailable, "no sync service configured");
    const auto key = normalize_site(domain, SiteSource::Url, vault.global.site_labels).value;
    try {
        auto env = client->get_policy_envelope(key);
        if (!verify_envelope(env, client->pinned_key()))
            throw Error(ErrorCode::SignatureInvalid, "policy signature invalid for '" + key + "'");
        auto policy = policy_from_envelope(env, key);
        vault.policy_cache[key] = envelope_to_json(env);
        return policy;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Unavailable) throw;
    }
    if (auto policy = cached_policy(vault, key, client->pinned_key())) return *policy;
    throw Error(ErrorCode::Unavailable, "sync service unreachable and no cached policy for '" + key + "'");
}

void merge_user_record(Vault& vault, const UserRecord& server) {
    for (const auto& [key, remote] : server.sites) {
        auto it = vault.sites.find(key);
        if (it == vault.sites.end() || remote.version >= it->second.version) vault.sites[key] = remote;
    }
}

void sync_pull(Vault& vault, SyncClient& client, const std::string& user_id, const AccessToken& token) {
    auto record = client.get_user_record(user_id, token);
    merge_user_record(vault, record);
    vault.sync.user_id = user_id;
    vault.sync.record_version = record.record_version;
}

void sync_push(Vault& vault, SyncClient& client, const std::string& user_id, const AccessToken& token) {
    auto upload = [&] {
        UserRecord record{user_id, vault.sites, vault.sync.record_version};
        vault.sync.record_version = client.put_user_record(record, vault.sync.record_version, token);
        vault.sync.user_id = user_id;
    };
    try {
        upload();
        return;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::VersionConflict) throw;
    }
    sync_pull(vault, client, user_id, token);
    try {
        upload();
    } catch (const Error& e) {
        if (e.code() != ErrorCode::VersionConflict) throw;
        throw Error(ErrorCode::MergeConflictUnresolved, "record changed again during conflict resolution");
    }
}

}  // namespace autopass::sync
