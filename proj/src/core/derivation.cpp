#include <autopass/crypto.hpp>
#include <autopass/derivation.hpp>
#include <autopass/error.hpp>

#include <algorithm>
#include <cctype>
#include <vector>

namespace autopass {

MasterSecret::MasterSecret(ByteView bytes) {
    if (bytes.size() != kSize) throw Error(ErrorCode::InvalidParameter, "master secret must be 32 bytes");
    std::copy(bytes.begin(), bytes.end(), bytes_.begin());
}

MasterSecret::~MasterSecret() { secure_wipe(bytes_.data(), bytes_.size()); }

UserPassword::UserPassword(std::string_view text) : bytes_(as_bytes(text)) {
    if (text.empty()) throw Error(ErrorCode::InvalidParameter, "user password must not be empty");
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

[[noreturn]] void invalid_site(const std::string& why) { throw Error(ErrorCode::InvalidSite, why); }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (true) {
        auto dot = host.find('.', start);
        labels.push_back(host.substr(start, dot == std::string_view::npos ? dot : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return labels;
}

bool valid_label(std::string_view label) {
    if (label.empty() || label.size() > 63) return false;
    return std::all_of(label.begin(), label.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

SiteKey normalize_url(std::string_view raw, int label_count) {
    std::string_view rest = raw;

    // scheme
    if (auto pos = rest.find("://"); pos != std::string_view::npos) {
        auto scheme = rest.substr(0, pos);
        bool ok = !scheme.empty() && std::isalpha(static_cast<unsigned char>(scheme[0]));
        for (char c : scheme) {
            ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.');
        }
        if (!ok) invalid_site("malformed URL scheme");
        rest.remove_prefix(pos + 3);
    } else if (rest.starts_with("//")) {
        rest.remove_prefix(2);
    }

    // authority ends at path, query or fragment
    auto authority = rest.substr(0, rest.find_first_of("/?#"));
    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);

    std::string_view host = authority;
    if (host.starts_with('[')) {
        auto close = host.find(']');
        if (close == std::string_view::npos) invalid_site("unterminated IPv6 literal");
        auto after = host.substr(close + 1);
        if (!after.empty() && !(after[0] == ':' && all_digits(after.substr(1))))
            invalid_site("malformed port");
        return {ascii_lower(host.substr(0, close + 1)), SiteSource::Url};
    }
    if (auto colon = host.find(':'); colon != std::string_view::npos) {
        if (!all_digits(host.substr(colon + 1))) invalid_site("malformed port");
        host = host.substr(0, colon);
    }
    if (host.ends_with('.')) host.remove_suffix(1);
    if (host.empty()) invalid_site("URL has no host");

    std::string lowered = ascii_lower(host);
    std::string_view h = lowered;
    if (h.starts_with("www.") && h.size() > 4) h.remove_prefix(4);

    auto labels = split_labels(h);
    for (auto label : labels) {
        if (!valid_label(label)) invalid_site("malformed host name");
    }

    bool ipv4 = labels.size() == 4 &&
                std::all_of(labels.begin(), labels.end(), [](std::string_view l) { return all_digits(l); });
    if (ipv4 || static_cast<int>(labels.size()) <= label_count) return {std::string(h), SiteSource::Url};

    std::string kept;
    for (auto it = labels.end() - label_count; it != labels.end(); ++it) {
        if (!kept.empty()) kept.push_back('.');
        kept.append(*it);
    }
    return {kept, SiteSource::Url};
}

void append_field(SecureBytes& out, bool present, ByteView bytes) {
    Bytes header;
    header.push_back(present ? 1 : 0);
    append_u32_be(header, present ? static_cast<std::uint32_t>(bytes.size()) : 0);
    out.append(header);
    if (present) out.append(bytes);
}

}  // namespace

SiteKey normalize_site(std::string_view raw, SiteSource mode, int label_count) {
    if (label_count < 1) throw Error(ErrorCode::InvalidParameter, "label count must be positive");
    auto trimmed = trim(raw);
    if (trimmed.empty()) invalid_site("empty site");
    if (mode == SiteSource::UserSiteName) return {ascii_lower(trimmed), SiteSource::UserSiteName};
    return normalize_url(trimmed, label_count);
}

ObjectDigest digest_object(ByteView content) {
    ObjectDigest out;
    out.bytes = crypto::sha256(content);
    return out;
}

StretchedKey stretch(ByteView secret, std::uint32_t iterations) {
    if (iterations == 0) throw Error(ErrorCode::InvalidParameter, "stretch needs at least one iteration");
    crypto::Sha256 hash;
    StretchedKey out;
    out.bytes = hash.update(secret).finish();
    for (std::uint32_t i = 1; i < iterations; ++i) out.bytes = hash.update(out.view()).finish();
    return out;
}

SecureBytes stage_one_input(const MasterSecret& master, const UserPassword& password) {
    SecureBytes out;
    Bytes len;
    append_u32_be(len, static_cast<std::uint32_t>(master.view().size()));
    out.append(len);
    out.append(master.view());
    len.clear();
    append_u32_be(len, static_cast<std::uint32_t>(password.bytes().size()));
    out.append(len);
    out.append(password.bytes());
    return out;
}

SecureBytes canonical_serialize(const InputBundle& bundle) {
    SecureBytes out;
    out.append(as_bytes(kBundleTag));
    append_field(out, true, bundle.stretched_key.view());
    append_field(out, true, as_bytes(bundle.site_key.value));
    const std::uint8_t source = static_cast<std::uint8_t>(bundle.site_key.source);
    append_field(out, true, ByteView(&source, 1));
    append_field(out, bundle.user_constant.has_value(),
                 bundle.user_constant ? as_bytes(*bundle.user_constant) : ByteView{});
    append_field(out, bundle.user_name.has_value(),
                 bundle.user_name ? as_bytes(*bundle.user_name) : ByteView{});
    append_field(out, bundle.object_digest.has_value(),
                 bundle.object_digest ? bundle.object_digest->view() : ByteView{});
    Bytes nonce;
    append_u64_be(nonce, bundle.version_nonce);
    append_field(out, true, nonce);
    return out;
}

DerivedBits derive_bits(const InputBundle& bundle) {
    DerivedBits out;
    out.bytes = crypto::sha256(canonical_serialize(bundle).view());
    return out;
}

}  // namespace autopass
