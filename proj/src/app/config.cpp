#include <autopass/app.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace autopass::app {

using nlohmann::json;

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

}  // namespace

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

CliConfig load_cli_config() {
    CliConfig config;
    if (auto home = env("AUTOPASS_HOME")) {
        config.home = *home;
    } else if (auto user_home = env("HOME")) {
        config.home = std::filesystem::path(*user_home) / ".autopass";
    } else {
        config.home = ".autopass";
    }

    const auto file = config.home / "config.json";
    if (std::filesystem::exists(file)) {
        auto j = json::parse(read_file_bytes(file), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidParameter, "malformed " + file.string());
        if (j.contains("server_url")) config.server_url = j["server_url"].get<std::string>();
        if (j.contains("server_pubkey")) config.server_pubkey = base64_decode(j["server_pubkey"].get<std::string>());
        if (j.contains("clipboard_clear_seconds")) config.clipboard_clear_seconds = j["clipboard_clear_seconds"].get<int>();
        if (j.contains("clipboard_command")) config.clipboard_command = j["clipboard_command"].get<std::string>();
    }

    if (auto url = env("AUTOPASS_SERVER_URL")) config.server_url = *url;
    if (auto key = env("AUTOPASS_SERVER_PUBKEY")) {
        try {
            config.server_pubkey = base64_decode(*key);
        } catch (const Error&) {
            throw Error(ErrorCode::InvalidParameter, "AUTOPASS_SERVER_PUBKEY is not valid base64");
        }
    }
    if (auto secs = env("AUTOPASS_CLIP_SECONDS")) {
        try {
            config.clipboard_clear_seconds = std::stoi(*secs);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidParameter, "AUTOPASS_CLIP_SECONDS must be an integer");
        }
    }
    if (auto cmd = env("AUTOPASS_CLIPBOARD_CMD")) config.clipboard_command = *cmd;

    if (config.clipboard_clear_seconds < 1)
        throw Error(ErrorCode::InvalidParameter, "clipboard_clear_seconds must be at least 1");
    if (config.server_pubkey && config.server_pubkey->size() != crypto::kSignPublicKeySize)
        throw Error(ErrorCode::InvalidParameter, "server public key must be 32 bytes");
    return config;
}

std::unique_ptr<sync::SyncClient> make_sync_client(const CliConfig& config) {
    if (!config.server_url || !config.server_pubkey) return nullptr;
    return std::make_unique<sync::SyncClient>(*config.server_url, *config.server_pubkey);
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidSite:
        case ErrorCode::InvalidParameter:
        case ErrorCode::MissingObject: return kExitUsage;
        case ErrorCode::AuthenticationFailed:
        case ErrorCode::Forbidden: return kExitAuth;
        case ErrorCode::UnsatisfiablePolicy:
        case ErrorCode::RetriesExhausted:
        case ErrorCode::LengthMismatch:
        case ErrorCode::ModulusMismatch:
        case ErrorCode::CharOutOfCharset:
        case ErrorCode::InvariantViolation: return kExitPolicy;
        case ErrorCode::Unavailable:
        case ErrorCode::SignatureInvalid: return kExitNetwork;
        case ErrorCode::VersionConflict:
        case ErrorCode::MergeConflictUnresolved: return kExitConflict;
        default: return kExitError;
    }
}

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::AuthenticationFailed: return 401;
        case ErrorCode::Forbidden: return 403;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::VersionConflict:
        case ErrorCode::MergeConflictUnresolved: return 409;
        case ErrorCode::UnsatisfiablePolicy:
        case ErrorCode::RetriesExhausted:
        case ErrorCode::LengthMismatch:
        case ErrorCode::ModulusMismatch:
        case ErrorCode::CharOutOfCharset:
        case ErrorCode::InvariantViolation: return 422;
        case ErrorCode::InvalidSite:
        case ErrorCode::InvalidParameter:
        case ErrorCode::MissingObject: return 400;
        case ErrorCode::Unavailable:
        case ErrorCode::SignatureInvalid: return 502;
        default: return 500;
    }
}

void save_session(const std::filesystem::path& home, const SavedSession& session) {
    std::filesystem::create_directories(home);
    const auto path = home / "session.json";
    const auto text =
        json{{"user_id", session.user_id}, {"token", session.token.token}, {"expires_at", session.token.expires_at}}
            .dump() +
        "\n";
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) throw Error(ErrorCode::Io, "cannot write " + path.string());
    bool ok = ::write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size());
    ::close(fd);
    if (!ok) throw Error(ErrorCode::Io, "short write to " + path.string());
}

SavedSession load_session(const std::filesystem::path& home) {
    const auto path = home / "session.json";
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::AuthenticationFailed, "not logged in to the sync service (run 'autopass login')");
    auto j = json::parse(read_file_bytes(path), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::AuthenticationFailed, "malformed session file");
    try {
        return {j.at("user_id").get<std::string>(),
                {j.at("token").get<std::string>(), j.at("expires_at").get<std::int64_t>()}};
    } catch (const json::exception&) {
        throw Error(ErrorCode::AuthenticationFailed, "malformed session file");
    }
}

bool ensure_site(Vault& vault, const SiteKey& key, sync::SyncClient* client) {
    if (vault.sites.contains(key.value)) return false;
    auto policy = default_policy();
    if (key.source == SiteSource::Url && client != nullptr) {
        try {
            policy = sync::fetch_policy(client, vault, key.value);
        } catch (const Error& e) {
            // Tampered data is surfaced, never replaced by the default.
            if (e.code() != ErrorCode::Unavailable && e.code() != ErrorCode::NotFound) throw;
        }
    }
    auto config = new_site_config(key, policy);
    config.updated_at = sync::system_clock_seconds();
    upsert_site(vault, std::move(config));
    return true;
}

SiteSource guess_site_source(std::string_view raw) {
    auto first = raw.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return SiteSource::Url;
    raw = raw.substr(first, raw.find_last_not_of(" \t\r\n") - first + 1);
    if (raw.find("://") != std::string_view::npos) return SiteSource::Url;
    bool has_space = raw.find_first_of(" \t") != std::string_view::npos;
    bool has_dot = raw.find('.') != std::string_view::npos;
    return has_dot && !has_space ? SiteSource::Url : SiteSource::UserSiteName;
}

}  // namespace autopass::app
