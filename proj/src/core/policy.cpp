#include <autopass/crypto.hpp>
#include <autopass/error.hpp>
#include <autopass/policy.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>

namespace autopass {

int ClassSet::size() const { return std::popcount(bits_); }

std::vector<CharClass> ClassSet::members() const {
    std::vector<CharClass> out;
    for (auto c : kAllClasses) {
        if (contains(c)) out.push_back(c);
    }
    return out;
}

std::string_view class_name(CharClass c) {
    switch (c) {
        case CharClass::Lower: return "lower";
        case CharClass::Upper: return "upper";
        case CharClass::Digit: return "digit";
        case CharClass::Symbol: return "symbol";
    }
    return "?";
}

CharClass class_from_name(std::string_view name) {
    for (auto c : kAllClasses) {
        if (class_name(c) == name) return c;
    }
    throw Error(ErrorCode::UnsatisfiablePolicy, "unknown character class '" + std::string(name) + "'");
}

CharClass class_of(char c) {
    if (c >= 'a' && c <= 'z') return CharClass::Lower;
    if (c >= 'A' && c <= 'Z') return CharClass::Upper;
    if (c >= '0' && c <= '9') return CharClass::Digit;
    return CharClass::Symbol;
}

std::string class_chars(CharClass cls) {
    std::string out;
    for (char c = '!'; c <= '~'; ++c) {
        if (class_of(c) == cls) out.push_back(c);
    }
    return out;
}

PasswordPolicy default_policy() { return PasswordPolicy{}; }

Charset::Charset(std::string chars) : chars_(std::move(chars)) {
    std::sort(chars_.begin(), chars_.end());
    chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
    index_.fill(-1);
    for (std::size_t i = 0; i < chars_.size(); ++i) {
        auto u = static_cast<unsigned char>(chars_[i]);
        if (u >= 128) throw Error(ErrorCode::InvalidParameter, "charset must be ASCII");
        index_[u] = static_cast<std::int8_t>(i);
    }
}

int Charset::index_of(char c) const noexcept {
    auto u = static_cast<unsigned char>(c);
    return u < 128 ? index_[u] : -1;
}

namespace {

[[noreturn]] void unsatisfiable(const std::string& why) { throw Error(ErrorCode::UnsatisfiablePolicy, why); }

bool forbidden(const PasswordPolicy& policy, char c) {
    return policy.forbidden_chars.find(c) != std::string::npos;
}

std::string charset_chars(const PasswordPolicy& policy) {
    std::string chars;
    for (char c = '!'; c <= '~'; ++c) {
        if (policy.allowed_classes.contains(class_of(c)) && !forbidden(policy, c)) chars.push_back(c);
    }
    return chars;
}

}  // namespace

void validate_policy(const PasswordPolicy& policy) {
    if (policy.length_min < 1 || policy.length_min > policy.length_max ||
        policy.length_max > kMaxPasswordLength)
        unsatisfiable("length bounds must satisfy 1 <= min <= max <= 64");
    if (!policy.required_classes.subset_of(policy.allowed_classes))
        unsatisfiable("required classes must be allowed");
    if (charset_chars(policy).empty()) unsatisfiable("effective charset is empty");
    for (auto cls : policy.required_classes.members()) {
        auto chars = class_chars(cls);
        bool any = std::any_of(chars.begin(), chars.end(), [&](char c) { return !forbidden(policy, c); });
        if (!any) unsatisfiable("required class '" + std::string(class_name(cls)) + "' is entirely forbidden");
    }
    if (policy.required_classes.size() > policy.length_min)
        unsatisfiable("more required classes than password characters");
}

Charset effective_charset(const PasswordPolicy& policy) {
    auto chars = charset_chars(policy);
    if (chars.empty()) unsatisfiable("effective charset is empty");
    return Charset(std::move(chars));
}

bool has_required_classes(std::string_view text, const PasswordPolicy& policy) {
    ClassSet seen;
    for (char c : text) seen.insert(class_of(c));
    return policy.required_classes.subset_of(seen);
}

std::string draw_from_stream(const DerivedBits& bits, const Charset& charset, std::size_t length,
                             std::uint64_t nonce) {
    const std::size_t n = charset.size();
    const std::size_t limit = 256 - (256 % n);  // accept b < limit
    std::string out;
    out.reserve(length);
    Bytes block_input(bits.bytes.begin(), bits.bytes.end());
    append_u64_be(block_input, nonce);
    const std::size_t prefix = block_input.size();
    for (std::uint32_t block = 0; out.size() < length; ++block) {
        block_input.resize(prefix);
        append_u32_be(block_input, block);
        auto stream = crypto::sha256(block_input);
        for (auto b : stream) {
            if (b >= limit) continue;
            out.push_back(charset.at(b % n));
            if (out.size() == length) break;
        }
    }
    return out;
}

EncodeResult encode_detailed(const DerivedBits& bits, const PasswordPolicy& policy,
                             std::uint64_t attempt_nonce) {
    validate_policy(policy);
    const auto charset = effective_charset(policy);
    const auto length = static_cast<std::size_t>(policy.length_min);
    for (int attempt = 0; attempt < kEncodeAttempts; ++attempt) {
        const std::uint64_t nonce = attempt_nonce + static_cast<std::uint64_t>(attempt);
        auto text = draw_from_stream(bits, charset, length, nonce);
        if (has_required_classes(text, policy)) return {Password{std::move(text)}, attempt + 1, nonce};
    }
    throw Error(ErrorCode::RetriesExhausted, "no policy-compliant password within 32 attempts");
}

namespace {

std::vector<std::uint32_t> indices_of(const Password& password, const Charset& charset) {
    std::vector<std::uint32_t> out;
    out.reserve(password.text.size());
    for (char c : password.text) {
        int idx = charset.index_of(c);
        if (idx < 0) throw Error(ErrorCode::CharOutOfCharset, "password character outside the site charset");
        out.push_back(static_cast<std::uint32_t>(idx));
    }
    return out;
}

}  // namespace

Password apply_offset(const Password& base, const PasswordOffset& offset, const Charset& charset) {
    if (offset.shifts.size() != base.text.size())
        throw Error(ErrorCode::LengthMismatch, "offset length differs from password length");
    if (offset.modulus != charset.size())
        throw Error(ErrorCode::ModulusMismatch, "offset modulus differs from charset size");
    const auto idx = indices_of(base, charset);
    Password out;
    out.text.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (offset.shifts[i] >= offset.modulus)
            throw Error(ErrorCode::ModulusMismatch, "offset shift out of range");
        out.text.push_back(charset.at((idx[i] + offset.shifts[i]) % offset.modulus));
    }
    return out;
}

PasswordOffset compute_offset(const Password& base, const Password& desired, const Charset& charset) {
    if (base.text.size() != desired.text.size())
        throw Error(ErrorCode::LengthMismatch, "desired password length differs from policy length");
    const auto from = indices_of(base, charset);
    const auto to = indices_of(desired, charset);
    const auto n = static_cast<std::uint32_t>(charset.size());
    PasswordOffset out{{}, n};
    out.shifts.reserve(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) out.shifts.push_back((to[i] + n - from[i]) % n);
    return out;
}

PasswordOffset compose_offsets(const PasswordOffset& first, const PasswordOffset& second) {
    if (first.modulus != second.modulus) throw Error(ErrorCode::ModulusMismatch, "offset moduli differ");
    if (first.shifts.size() != second.shifts.size())
        throw Error(ErrorCode::LengthMismatch, "offset lengths differ");
    PasswordOffset out{{}, first.modulus};
    for (std::size_t i = 0; i < first.shifts.size(); ++i)
        out.shifts.push_back((first.shifts[i] + second.shifts[i]) % first.modulus);
    return out;
}

std::uint32_t uniform_below(OffsetRng& rng, std::uint32_t bound) {
    if (bound == 0) throw Error(ErrorCode::InvalidParameter, "empty range");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x > limit);
    return static_cast<std::uint32_t>(x % bound);
}

PasswordOffset random_offset(const Password& base, const PasswordPolicy& policy, OffsetRng& rng) {
    const auto charset = effective_charset(policy);
    indices_of(base, charset);
    const auto n = static_cast<std::uint32_t>(charset.size());
    for (int attempt = 0; attempt < kRandomOffsetAttempts; ++attempt) {
        PasswordOffset offset{{}, n};
        offset.shifts.reserve(base.text.size());
        for (std::size_t i = 0; i < base.text.size(); ++i) offset.shifts.push_back(uniform_below(rng, n));
        if (has_required_classes(apply_offset(base, offset, charset).text, policy)) return offset;
    }
    throw Error(ErrorCode::RetriesExhausted, "no policy-compliant offset within 64 attempts");
}

void to_json(nlohmann::json& j, const PasswordPolicy& policy) {
    auto names = [](ClassSet set) {
        auto out = nlohmann::json::array();
        for (auto c : set.members()) out.push_back(class_name(c));
        return out;
    };
    j = nlohmann::json{{"length_min", policy.length_min},
                       {"length_max", policy.length_max},
                       {"allowed_classes", names(policy.allowed_classes)},
                       {"required_classes", names(policy.required_classes)},
                       {"forbidden_chars", policy.forbidden_chars},
                       {"policy_version", policy.policy_version}};
}

void from_json(const nlohmann::json& j, PasswordPolicy& policy) {
    try {
        auto classes = [](const nlohmann::json& arr) {
            ClassSet set;
            for (const auto& name : arr) set.insert(class_from_name(name.get<std::string>()));
            return set;
        };
        PasswordPolicy p;
        p.length_min = j.at("length_min").get<int>();
        p.length_max = j.at("length_max").get<int>();
        p.allowed_classes = classes(j.at("allowed_classes"));
        p.required_classes = classes(j.at("required_classes"));
        p.forbidden_chars = j.value("forbidden_chars", std::string{});
        p.policy_version = j.value("policy_version", 0u);
        policy = std::move(p);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::UnsatisfiablePolicy, std::string("malformed policy: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const PasswordOffset& offset) {
    j = nlohmann::json{{"shifts", offset.shifts}, {"modulus", offset.modulus}};
}

void from_json(const nlohmann::json& j, PasswordOffset& offset) {
    offset.shifts = j.at("shifts").get<std::vector<std::uint32_t>>();
    offset.modulus = j.at("modulus").get<std::uint32_t>();
}

}  // namespace autopass
