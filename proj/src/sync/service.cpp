#include <autopass/error.hpp>
#include <autopass/sync.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <sstream>

namespace autopass::sync {

using nlohmann::json;

std::int64_t system_clock_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
    return {status, json{{"code", code}, {"message", message}}};
}

namespace {

std::string token_hash(std::string_view token) { return to_hex(crypto::sha256(as_bytes(token))); }

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    std::size_t off = 0;
    while (off < content.size()) {
        auto n = ::write(fd, content.data() + off, content.size() - off);
        if (n <= 0) {
            ::close(fd);
            throw Error(ErrorCode::Io, "short write to " + tmp.string());
        }
        off += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

StoreState FileStore::load() {
    StoreState state;
    if (!std::filesystem::exists(path_)) return state;
    auto j = json::parse(read_file(path_), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::VaultFormat, "store file is not valid JSON");
    try {
        for (const auto& [domain, record] : j.at("policies").items())
            state.policies.emplace(domain, policy_record_from_json(record));
        for (const auto& [id, user] : j.at("users").items()) {
            state.users.emplace(id, StoreState::User{base64_decode(user.at("secret_hash").get<std::string>()),
                                                     user_record_from_json(user.at("record"))});
        }
        const auto tokens = j.value("tokens", json::object());
        for (const auto& [hash, token] : tokens.items()) {
            state.tokens.emplace(hash, StoreState::Token{token.at("user_id").get<std::string>(),
                                                         token.at("expires_at").get<std::int64_t>()});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::VaultFormat, std::string("malformed store: ") + e.what());
    }
    return state;
}

void FileStore::save(const StoreState& state) {
    json policies = json::object();
    for (const auto& [domain, record] : state.policies) policies[domain] = policy_record_to_json(record);
    json users = json::object();
    for (const auto& [id, user] : state.users)
        users[id] = {{"secret_hash", base64_encode(user.secret_hash)}, {"record", user_record_to_json(user.record)}};
    json tokens = json::object();
    for (const auto& [hash, token] : state.tokens)
        tokens[hash] = {{"user_id", token.user_id}, {"expires_at", token.expires_at}};
    write_atomically(path_, json{{"policies", policies}, {"users", users}, {"tokens", tokens}}.dump(1) + "\n");
}

SyncService::SyncService(std::unique_ptr<Store> store, crypto::SigningKeyPair signing_key, Clock clock,
                         crypto::RandomSource random)
    : store_(std::move(store)),
      key_(std::move(signing_key)),
      clock_(std::move(clock)),
      random_(std::move(random)),
      state_(store_->load()) {}

void SyncService::put_policy(const std::string& domain, const PasswordPolicy& policy) {
    validate_policy(policy);
    auto key = normalize_site(domain, SiteSource::Url);
    std::lock_guard lock(mutex_);
    auto& record = state_.policies[key.value];
    record.domain = key.value;
    record.policy = policy;
    ++record.record_version;
    store_->save(state_);
}

std::string SyncService::register_user(const std::string& user_id) {
    if (user_id.empty()) throw Error(ErrorCode::InvalidParameter, "empty user id");
    Bytes secret(24);
    random_(secret);
    auto text = to_hex(secret);
    auto hash = crypto::sha256(as_bytes(text));
    std::lock_guard lock(mutex_);
    auto& user = state_.users[user_id];
    user.secret_hash.assign(hash.begin(), hash.end());
    user.record.user_id = user_id;
    store_->save(state_);
    return text;
}

HttpResponse SyncService::get_policy(const std::string& domain) {
    std::string key;
    try {
        key = normalize_site(domain, SiteSource::Url).value;
    } catch (const Error&) {
        return error_response(404, "not_found", "unknown domain");
    }
    std::lock_guard lock(mutex_);
    auto it = state_.policies.find(key);
    if (it == state_.policies.end()) return error_response(404, "not_found", "unknown domain");
    auto env = sign_envelope(canonical_json(policy_record_to_json(it->second)), key_, clock_());
    return {200, envelope_to_json(env)};
}

HttpResponse SyncService::login(const json& body) {
    std::string user_id, secret;
    try {
        user_id = body.at("user_id").get<std::string>();
        secret = body.at("login_secret").get<std::string>();
    } catch (const json::exception&) {
        return error_response(400, "bad_request", "expected {user_id, login_secret}");
    }
    auto hash = crypto::sha256(as_bytes(secret));
    std::lock_guard lock(mutex_);
    auto it = state_.users.find(user_id);
    if (it == state_.users.end() || !crypto::equal_ct(hash, it->second.secret_hash))
        return error_response(401, "unauthorized", "invalid credentials");
    Bytes raw(32);
    random_(raw);
    auto token = to_hex(raw);
    const auto now = clock_();
    std::erase_if(state_.tokens, [now](const auto& kv) { return kv.second.expires_at <= now; });
    StoreState::Token entry{user_id, now + kTokenLifetimeSeconds};
    state_.tokens[token_hash(token)] = entry;
    store_->save(state_);
    return {200, json{{"token", token}, {"expires_at", entry.expires_at}}};
}

std::optional<HttpResponse> SyncService::authorize(const std::string& user_id,
                                                   std::string_view authorization) const {
    constexpr std::string_view kBearer = "Bearer ";
    if (!authorization.starts_with(kBearer)) return error_response(401, "unauthorized", "missing bearer token");
    auto it = state_.tokens.find(token_hash(authorization.substr(kBearer.size())));
    if (it == state_.tokens.end() || it->second.expires_at <= clock_())
        return error_response(401, "unauthorized", "invalid or expired token");
    if (it->second.user_id != user_id) return error_response(403, "forbidden", "token belongs to another user");
    return std::nullopt;
}

HttpResponse SyncService::get_user_sites(const std::string& user_id, std::string_view authorization) {
    std::lock_guard lock(mutex_);
    if (auto denied = authorize(user_id, authorization)) return *denied;
    auto it = state_.users.find(user_id);
    if (it == state_.users.end()) return error_response(404, "not_found", "unknown user");
    auto env = sign_envelope(canonical_json(user_record_to_json(it->second.record)), key_, clock_());
    return {200, envelope_to_json(env)};
}

HttpResponse SyncService::put_user_sites(const std::string& user_id, std::string_view authorization,
                                         const json& body) {
    UserRecord incoming;
    std::uint64_t expected = 0;
    try {
        incoming = user_record_from_json(body.at("record"));
        expected = body.at("expected_version").get<std::uint64_t>();
    } catch (const std::exception&) {
        return error_response(400, "bad_request", "expected {record, expected_version}");
    }
    std::lock_guard lock(mutex_);
    if (auto denied = authorize(user_id, authorization)) return *denied;
    if (incoming.user_id != user_id) return error_response(400, "bad_request", "record user_id does not match path");
    auto it = state_.users.find(user_id);
    if (it == state_.users.end()) return error_response(404, "not_found", "unknown user");
    auto& stored = it->second.record;
    if (expected != stored.record_version) {
        auto resp = error_response(409, "version_conflict", "record changed since it was read");
        resp.body["current_version"] = stored.record_version;
        return resp;
    }
    incoming.record_version = stored.record_version + 1;
    stored = std::move(incoming);
    store_->save(state_);
    return {200, json{{"new_version", stored.record_version}}};
}

crypto::SigningKeyPair load_or_create_signing_key(const std::filesystem::path& path,
                                                  const crypto::RandomSource& random) {
    if (std::filesystem::exists(path)) {
        auto text = read_file(path);
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        SecureBytes seed(base64_decode(text));
        return crypto::signing_keypair_from_seed(seed.view());
    }
    SecureBytes seed(crypto::kSignSecretKeySize);
    random(seed.span());
    auto pair = crypto::signing_keypair_from_seed(seed.view());
    write_atomically(path, base64_encode(seed.view()) + "\n");
    return pair;
}

}  // namespace autopass::sync
