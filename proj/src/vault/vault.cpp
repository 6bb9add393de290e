#include <autopass/error.hpp>
#include <autopass/vault.hpp>

#include <algorithm>

namespace autopass {

namespace {

constexpr std::size_t kSaltSize = 16;
constexpr std::string_view kMasterAad = "autopass-vault.v1/master";

SecureBytes vault_key(const GlobalConfig& global, const UserPassword& password) {
    return crypto::pbkdf2_sha256(password.bytes(), global.kdf.salt, global.kdf.iterations,
                                 crypto::kAeadKeySize);
}

}  // namespace

Vault init_vault(const UserPassword& password, const VaultParams& params,
                 const crypto::RandomSource& random) {
    if (params.kdf_iterations == 0 || params.inner_iterations == 0)
        throw Error(ErrorCode::InvalidParameter, "iteration counts must be positive");
    if (params.site_labels < 1) throw Error(ErrorCode::InvalidParameter, "site label count must be positive");

    Vault vault;
    auto& g = vault.global;
    g.kdf.iterations = params.kdf_iterations;
    g.kdf.salt.resize(kSaltSize);
    random(g.kdf.salt);
    g.master_nonce.resize(crypto::kAeadNonceSize);
    random(g.master_nonce);
    g.user_constant = params.user_constant;
    g.inner_iterations = params.inner_iterations;
    g.site_labels = params.site_labels;

    SecureBytes master(MasterSecret::kSize);
    random(master.span());
    const auto key = vault_key(g, password);
    g.encrypted_master = crypto::aead_seal(key.view(), g.master_nonce, master.view(), as_bytes(kMasterAad));
    return vault;
}

MasterSecret unlock(const Vault& vault, const UserPassword& password) {
    const auto& g = vault.global;
    const auto key = vault_key(g, password);
    auto plain = crypto::aead_open(key.view(), g.master_nonce, g.encrypted_master, as_bytes(kMasterAad));
    if (plain.size() != MasterSecret::kSize)
        throw Error(ErrorCode::AuthenticationFailed, "authentication failed");
    return MasterSecret(plain.view());
}

void check_site_config(const SiteConfig& config) {
    if (config.site_key.value.empty()) throw Error(ErrorCode::InvariantViolation, "empty site key");
    try {
        validate_policy(config.policy);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvariantViolation, e.what());
    }
    if (config.offset) {
        const auto charset = effective_charset(config.policy);
        if (config.offset->modulus != charset.size())
            throw Error(ErrorCode::InvariantViolation, "offset modulus does not match the policy charset");
        if (config.offset->shifts.size() != static_cast<std::size_t>(config.policy.length_min))
            throw Error(ErrorCode::InvariantViolation, "offset length does not match the policy length");
        for (auto s : config.offset->shifts) {
            if (s >= config.offset->modulus) throw Error(ErrorCode::InvariantViolation, "offset shift out of range");
        }
    }
    if (config.input_params.use_user_name && !config.input_params.user_name)
        throw Error(ErrorCode::InvariantViolation, "use_user_name set without a user name");
}

void upsert_site(Vault& vault, SiteConfig config) {
    check_site_config(config);
    auto it = vault.sites.find(config.site_key.value);
    config.version = it == vault.sites.end() ? 1 : it->second.version + 1;
    vault.sites[config.site_key.value] = std::move(config);
}

const SiteConfig& get_site(const Vault& vault, const std::string& site_key) {
    auto it = vault.sites.find(site_key);
    if (it == vault.sites.end()) throw Error(ErrorCode::NotFound, "no configuration for site '" + site_key + "'");
    return it->second;
}

std::vector<SiteKey> list_sites(const Vault& vault) {
    std::vector<SiteKey> out;
    out.reserve(vault.sites.size());
    for (const auto& [key, site] : vault.sites) out.push_back(site.site_key);
    return out;
}

SiteConfig new_site_config(SiteKey key, PasswordPolicy policy) {
    SiteConfig config;
    config.site_key = std::move(key);
    config.policy = std::move(policy);
    return config;
}

SiteKey resolve_site(const Vault& vault, std::string_view raw_site, SiteSource mode) {
    return normalize_site(raw_site, mode, vault.global.site_labels);
}

Password base_password(const Vault& vault, const MasterSecret& master, const UserPassword& password,
                       const SiteConfig& site, std::optional<ByteView> object_content) {
    const auto& params = site.input_params;
    if (params.use_object && !object_content)
        throw Error(ErrorCode::MissingObject, "site '" + site.site_key.value + "' requires a digital object");

    InputBundle bundle;
    bundle.stretched_key = stretch(stage_one_input(master, password).view(), vault.global.inner_iterations);
    bundle.site_key = site.site_key;
    if (params.use_user_constant) bundle.user_constant = vault.global.user_constant;
    if (params.use_user_name) bundle.user_name = params.user_name.value_or("");
    if (params.use_object) bundle.object_digest = digest_object(*object_content);
    bundle.version_nonce = params.version_nonce;

    auto bits = derive_bits(bundle);
    secure_wipe(bundle.stretched_key.bytes.data(), bundle.stretched_key.bytes.size());
    return encode(bits, site.policy);
}

Password generate_password(const Vault& vault, const MasterSecret& master, const UserPassword& password,
                           const SiteKey& site, std::optional<ByteView> object_content) {
    const auto& config = get_site(vault, site.value);
    auto base = base_password(vault, master, password, config, object_content);
    if (!config.offset) return base;
    return apply_offset(base, *config.offset, effective_charset(config.policy));
}

Password generate_password(const Vault& vault, const UserPassword& password, std::string_view raw_site,
                           std::optional<ByteView> object_content, SiteSource mode) {
    const auto master = unlock(vault, password);
    return generate_password(vault, master, password, resolve_site(vault, raw_site, mode), object_content);
}

void pin_password(Vault& vault, const UserPassword& password, const SiteKey& site, const Password& desired,
                  std::optional<ByteView> object_content) {
    auto config = get_site(vault, site.value);
    const auto master = unlock(vault, password);
    const auto base = base_password(vault, master, password, config, object_content);
    config.offset = compute_offset(base, desired, effective_charset(config.policy));
    upsert_site(vault, std::move(config));
}

void rotate_password(Vault& vault, const UserPassword& password, const SiteKey& site, OffsetRng& rng,
                     std::optional<ByteView> object_content) {
    auto config = get_site(vault, site.value);
    const auto master = unlock(vault, password);
    const auto base = base_password(vault, master, password, config, object_content);
    config.offset = random_offset(base, config.policy, rng);
    upsert_site(vault, std::move(config));
}

}  // namespace autopass
