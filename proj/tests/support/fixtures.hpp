#pragma once

#include <autopass/error.hpp>
#include <autopass/vault.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace autopass;

struct GoldenCase {
    std::size_t vault_index;
    std::string user_password;
    std::string site;
    SiteSource mode;
    std::optional<Bytes> object;
    std::string expected;
};

struct Golden {
    std::vector<Vault> vaults;
    std::vector<GoldenCase> cases;
};

inline Golden load_golden() {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/golden_vectors.json");
    if (!in) throw std::runtime_error("golden_vectors.json not found");
    auto j = nlohmann::json::parse(in);
    Golden g;
    for (const auto& v : j.at("vaults")) g.vaults.push_back(parse_vault(v.dump()));
    for (const auto& c : j.at("cases")) {
        GoldenCase gc;
        gc.vault_index = c.at("vault").get<std::size_t>();
        gc.user_password = c.at("user_password").get<std::string>();
        gc.site = c.at("site").get<std::string>();
        gc.mode = c.at("mode") == "url" ? SiteSource::Url : SiteSource::UserSiteName;
        if (!c.at("object_hex").is_null()) gc.object = from_hex(c.at("object_hex").get<std::string>());
        gc.expected = c.at("expected").get<std::string>();
        g.cases.push_back(std::move(gc));
    }
    return g;
}

inline std::string random_string(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                                 std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz0123456789") {
    std::string s(min_len + rng() % (max_len - min_len + 1), ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    return s;
}

/// Probability that one uniform draw of `policy` already contains every required class.
inline double single_attempt_success(const PasswordPolicy& policy) {
    const auto charset = effective_charset(policy);
    const auto required = policy.required_classes.members();
    const double n = static_cast<double>(charset.size());
    double p = 0;
    // Inclusion-exclusion over the subsets of required classes that are missing.
    for (unsigned mask = 0; mask < (1u << required.size()); ++mask) {
        double excluded = 0;
        int bits = 0;
        for (std::size_t i = 0; i < required.size(); ++i) {
            if (!(mask >> i & 1)) continue;
            ++bits;
            for (char c : charset.chars())
                if (class_of(c) == required[i]) excluded += 1;
        }
        p += (bits % 2 ? -1 : 1) * std::pow((n - excluded) / n, policy.length_min);
    }
    return p;
}

/// Chance that all 32 attempts fail is below one in a million.
inline bool retry_budget_is_ample(const PasswordPolicy& policy) {
    return std::pow(1.0 - single_attempt_success(policy), kEncodeAttempts) < 1e-6;
}

/// Random policy that passes validate_policy. Not necessarily ample.
inline PasswordPolicy random_valid_policy(std::mt19937_64& rng) {
    static const std::string printable = [] {
        std::string s;
        for (char c = 0x21; c <= 0x7e; ++c) s.push_back(c);
        return s;
    }();
    for (;;) {
        PasswordPolicy p;
        p.allowed_classes = ClassSet::from_bits(static_cast<std::uint8_t>(1 + rng() % 15));
        p.required_classes = ClassSet::from_bits(static_cast<std::uint8_t>(rng() % 16 & p.allowed_classes.bits()));
        p.length_min = 1 + static_cast<int>(rng() % 32);
        p.length_max = p.length_min + static_cast<int>(rng() % 8);
        if (p.length_max > 64) p.length_max = 64;
        p.forbidden_chars.clear();
        for (auto k = rng() % 12; k > 0; --k) {
            char c = printable[rng() % printable.size()];
            if (p.forbidden_chars.find(c) == std::string::npos) p.forbidden_chars.push_back(c);
        }
        p.policy_version = rng() % 5;
        try {
            validate_policy(p);
            return p;
        } catch (const Error&) {
        }
    }
}

inline PasswordPolicy random_ample_policy(std::mt19937_64& rng, int min_length = 1) {
    for (;;) {
        auto p = random_valid_policy(rng);
        if (p.length_min >= min_length && retry_budget_is_ample(p)) return p;
    }
}

inline SiteConfig random_site_config(std::mt19937_64& rng, int min_length = 1) {
    SiteConfig c;
    if (rng() % 3 == 0) {
        c.site_key = {"n" + random_string(rng, 3, 12, "abcdefghijklmnopqrstuvwxyz ") + "x", SiteSource::UserSiteName};
    } else {
        c.site_key = {random_string(rng, 3, 10, "abcdefghijklmnopqrstuvwxyz0123456789-") + "." +
                          random_string(rng, 2, 4, "abcdefghijklmnopqrstuvwxyz"),
                      SiteSource::Url};
    }
    c.policy = random_ample_policy(rng, min_length);
    c.input_params.use_user_constant = rng() % 2;
    if (rng() % 3 == 0) {
        c.input_params.use_user_name = true;
        c.input_params.user_name = random_string(rng, 0, 10);
    }
    c.input_params.use_object = rng() % 4 == 0;
    c.input_params.version_nonce = rng() % 4;
    if (rng() % 2) {
        const auto n = effective_charset(c.policy).size();
        PasswordOffset o{std::vector<std::uint32_t>(c.policy.length_min), static_cast<std::uint32_t>(n)};
        for (auto& s : o.shifts) s = static_cast<std::uint32_t>(rng() % n);
        c.offset = o;
    }
    if (rng() % 3 == 0) c.reminder = "hint " + random_string(rng, 0, 20);
    c.updated_at = 1'600'000'000 + static_cast<std::int64_t>(rng() % 100'000'000);
    return c;
}

}  // namespace fixtures
