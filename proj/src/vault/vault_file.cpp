#include <autopass/error.hpp>
#include <autopass/vault.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

namespace autopass {

using nlohmann::json;

namespace {

std::string source_name(SiteSource s) { return s == SiteSource::Url ? "url" : "user_site_name"; }

SiteSource source_from_name(const std::string& s) {
    if (s == "url") return SiteSource::Url;
    if (s == "user_site_name") return SiteSource::UserSiteName;
    throw Error(ErrorCode::VaultFormat, "unknown site source '" + s + "'");
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace

json site_config_to_json(const SiteConfig& c) {
    const auto& p = c.input_params;
    return json{
        {"site_key", {{"value", c.site_key.value}, {"source", source_name(c.site_key.source)}}},
        {"policy", c.policy},
        {"offset", c.offset ? json(*c.offset) : json(nullptr)},
        {"input_params",
         {{"use_user_constant", p.use_user_constant},
          {"use_user_name", p.use_user_name},
          {"use_object", p.use_object},
          {"user_name", optional_json(p.user_name)},
          {"version_nonce", p.version_nonce}}},
        {"reminder", optional_json(c.reminder)},
        {"version", c.version},
        {"updated_at", c.updated_at},
    };
}

SiteConfig site_config_from_json(const json& j) {
    try {
        SiteConfig c;
        const auto& key = j.at("site_key");
        c.site_key = {key.at("value").get<std::string>(), source_from_name(key.at("source").get<std::string>())};
        c.policy = j.at("policy").get<PasswordPolicy>();
        if (j.contains("offset") && !j.at("offset").is_null()) c.offset = j.at("offset").get<PasswordOffset>();
        const auto& p = j.at("input_params");
        c.input_params.use_user_constant = p.at("use_user_constant").get<bool>();
        c.input_params.use_user_name = p.at("use_user_name").get<bool>();
        c.input_params.use_object = p.at("use_object").get<bool>();
        c.input_params.user_name = optional_from<std::string>(p, "user_name");
        c.input_params.version_nonce = p.value("version_nonce", std::uint64_t{0});
        c.reminder = optional_from<std::string>(j, "reminder");
        c.version = j.at("version").get<std::uint64_t>();
        c.updated_at = j.at("updated_at").get<std::int64_t>();
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::VaultFormat, std::string("malformed site configuration: ") + e.what());
    }
}

json vault_to_json(const Vault& vault) {
    const auto& g = vault.global;
    json sites = json::object();
    for (const auto& [key, site] : vault.sites) sites[key] = site_config_to_json(site);
    json cache = json::object();
    for (const auto& [domain, envelope] : vault.policy_cache) cache[domain] = envelope;
    return json{
        {"magic", kVaultMagic},
        {"format_version", g.format_version},
        {"global",
         {{"kdf", {{"algorithm", crypto::kKdfId}, {"salt", base64_encode(g.kdf.salt)}, {"iterations", g.kdf.iterations}}},
          {"master",
           {{"algorithm", crypto::kAeadId},
            {"nonce", base64_encode(g.master_nonce)},
            {"ciphertext", base64_encode(g.encrypted_master)}}},
          {"user_constant", g.user_constant},
          {"hash", g.hash_id},
          {"inner_iterations", g.inner_iterations},
          {"site_labels", g.site_labels}}},
        {"sites", std::move(sites)},
        {"policy_cache", std::move(cache)},
        {"sync", {{"user_id", optional_json(vault.sync.user_id)}, {"record_version", vault.sync.record_version}}},
    };
}

Vault vault_from_json(const json& j) {
    try {
        if (j.at("magic").get<std::string>() != kVaultMagic)
            throw Error(ErrorCode::VaultFormat, "not an autopass vault");
        Vault vault;
        auto& g = vault.global;
        g.format_version = j.at("format_version").get<int>();
        if (g.format_version != kVaultFormatVersion)
            throw Error(ErrorCode::VaultFormat, "unsupported vault format version");
        const auto& gj = j.at("global");
        const auto& kdf = gj.at("kdf");
        const auto& master = gj.at("master");
        if (kdf.at("algorithm").get<std::string>() != crypto::kKdfId ||
            master.at("algorithm").get<std::string>() != crypto::kAeadId)
            throw Error(ErrorCode::VaultFormat, "unsupported vault algorithms");
        g.kdf.salt = base64_decode(kdf.at("salt").get<std::string>());
        g.kdf.iterations = kdf.at("iterations").get<std::uint32_t>();
        g.master_nonce = base64_decode(master.at("nonce").get<std::string>());
        g.encrypted_master = base64_decode(master.at("ciphertext").get<std::string>());
        g.user_constant = gj.at("user_constant").get<std::string>();
        g.hash_id = gj.at("hash").get<std::string>();
        if (g.hash_id != crypto::kHashId) throw Error(ErrorCode::VaultFormat, "unsupported hash '" + g.hash_id + "'");
        g.inner_iterations = gj.at("inner_iterations").get<std::uint32_t>();
        g.site_labels = gj.value("site_labels", kDefaultSiteLabels);
        if (g.kdf.iterations == 0 || g.inner_iterations == 0 || g.site_labels < 1)
            throw Error(ErrorCode::VaultFormat, "invalid derivation parameters");

        for (const auto& [key, site] : j.at("sites").items()) {
            auto config = site_config_from_json(site);
            if (config.site_key.value != key) throw Error(ErrorCode::VaultFormat, "site key mismatch");
            vault.sites.emplace(key, std::move(config));
        }
        const auto cache = j.value("policy_cache", json::object());
        for (const auto& [domain, envelope] : cache.items()) vault.policy_cache.emplace(domain, envelope);
        if (j.contains("sync")) {
            const auto& s = j.at("sync");
            vault.sync.user_id = optional_from<std::string>(s, "user_id");
            vault.sync.record_version = s.value("record_version", std::uint64_t{0});
        }
        return vault;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::VaultFormat, std::string("malformed vault: ") + e.what());
    }
}

std::string serialize_vault(const Vault& vault) { return vault_to_json(vault).dump(2) + "\n"; }

Vault parse_vault(std::string_view text) {
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::VaultFormat, "vault file is not valid JSON");
    return vault_from_json(j);
}

std::filesystem::path vault_path(const std::filesystem::path& home) { return home / "vault.json"; }

bool vault_exists(const std::filesystem::path& home) { return std::filesystem::exists(vault_path(home)); }

Vault load_vault(const std::filesystem::path& home) {
    const auto path = vault_path(home);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "no vault at " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_vault(text.str());
}

namespace {

void write_private_file(const std::filesystem::path& path, const std::string& content) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) throw Error(ErrorCode::Io, "cannot write " + path.string());
    std::size_t written = 0;
    while (written < content.size()) {
        auto n = ::write(fd, content.data() + written, content.size() - written);
        if (n <= 0) {
            ::close(fd);
            throw Error(ErrorCode::Io, "short write to " + path.string());
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

}  // namespace

void save_vault(const std::filesystem::path& home, const Vault& vault) {
    std::filesystem::create_directories(home);
    const auto path = vault_path(home);
    auto tmp = path;
    tmp += ".tmp";
    write_private_file(tmp, serialize_vault(vault));
    std::filesystem::rename(tmp, path);
}

void create_vault_file(const std::filesystem::path& home, const Vault& vault, bool force) {
    if (vault_exists(home) && !force) throw Error(ErrorCode::VaultExists, "a vault already exists in " + home.string());
    save_vault(home, vault);
}

VaultLock::VaultLock(const std::filesystem::path& home) {
    std::filesystem::create_directories(home);
    const auto path = home / "vault.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0600);
    if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
        ::close(fd_);
        throw Error(ErrorCode::Io, "cannot lock " + path.string());
    }
}

VaultLock::~VaultLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

}  // namespace autopass
