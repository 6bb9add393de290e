#include "support/reference_sha256.hpp"

#include <autopass/error.hpp>
#include <autopass/policy.hpp>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace autopass;

namespace {

PasswordPolicy make_policy(int length, ClassSet allowed, ClassSet required, std::string forbidden = "") {
    PasswordPolicy p;
    p.length_min = p.length_max = length;
    p.allowed_classes = allowed;
    p.required_classes = required;
    p.forbidden_chars = std::move(forbidden);
    return p;
}

const ClassSet kAlnum{CharClass::Lower, CharClass::Upper, CharClass::Digit};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an autopass::Error");
    return ErrorCode::Io;
}

// Stream draw written directly from the format: block i = H(bits || u64 nonce || u32 i).
std::string reference_draw(const DerivedBits& bits, const std::string& chars, std::size_t length, std::uint64_t nonce) {
    const std::size_t n = chars.size();
    std::string out;
    for (std::uint32_t block = 0; out.size() < length; ++block) {
        std::vector<std::uint8_t> in(bits.bytes.begin(), bits.bytes.end());
        for (int s = 56; s >= 0; s -= 8) in.push_back(static_cast<std::uint8_t>(nonce >> s));
        for (int s = 24; s >= 0; s -= 8) in.push_back(static_cast<std::uint8_t>(block >> s));
        for (auto b : reference::sha256(in.data(), in.size())) {
            if (out.size() == length) break;
            if (b < 256 - 256 % n) out.push_back(chars[b % n]);
        }
    }
    return out;
}

DerivedBits random_bits(std::mt19937_64& rng) {
    DerivedBits bits;
    for (auto& b : bits.bytes) b = static_cast<std::uint8_t>(rng());
    return bits;
}

}  // namespace

TEST_SUITE("effective_charset") {
    TEST_CASE("alphanumeric policy has 62 symbols") {
        auto cs = effective_charset(make_policy(8, kAlnum, {}));
        CHECK(cs.size() == 62);
        CHECK(cs.chars() == "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz");
    }

    TEST_CASE("lower and digit: 36 symbols, digits first") {
        auto cs = effective_charset(make_policy(8, {CharClass::Lower, CharClass::Digit}, {}));
        CHECK(cs.chars() == "0123456789abcdefghijklmnopqrstuvwxyz");
    }

    TEST_CASE("forbidden characters are removed") {
        auto cs = effective_charset(make_policy(8, {CharClass::Lower}, {}, "a"));
        CHECK(cs.size() == 25);
        CHECK_FALSE(cs.contains('a'));
    }

    TEST_CASE("all four classes give the 94 printable ASCII characters") {
        auto cs = effective_charset(make_policy(8, {CharClass::Lower, CharClass::Upper, CharClass::Digit, CharClass::Symbol}, {}));
        CHECK(cs.size() == 94);
        CHECK(class_chars(CharClass::Symbol).size() == 32);
        CHECK(cs.index_of('!') == 0);
        CHECK(cs.index_of('~') == 93);
        CHECK(cs.index_of(' ') == -1);
    }

    TEST_CASE("empty charset is unsatisfiable") {
        CHECK(code_of([] { effective_charset(make_policy(4, {CharClass::Digit}, {}, "0123456789")); }) ==
              ErrorCode::UnsatisfiablePolicy);
    }
}

TEST_SUITE("validate_policy") {
    TEST_CASE("structural violations") {
        CHECK(code_of([] { validate_policy(make_policy(0, kAlnum, {})); }) == ErrorCode::UnsatisfiablePolicy);
        CHECK(code_of([] { validate_policy(make_policy(65, kAlnum, {})); }) == ErrorCode::UnsatisfiablePolicy);
        auto p = make_policy(8, kAlnum, {});
        p.length_max = 7;
        CHECK(code_of([&] { validate_policy(p); }) == ErrorCode::UnsatisfiablePolicy);
        CHECK(code_of([] { validate_policy(make_policy(8, {CharClass::Lower}, {CharClass::Digit})); }) ==
              ErrorCode::UnsatisfiablePolicy);
        CHECK(code_of([] { validate_policy(make_policy(2, kAlnum, kAlnum)); }) == ErrorCode::UnsatisfiablePolicy);
        CHECK_NOTHROW(validate_policy(default_policy()));
    }

    TEST_CASE("required class with every member forbidden") {
        CHECK(code_of([] { encode({}, make_policy(8, kAlnum, {CharClass::Digit}, "0123456789")); }) ==
              ErrorCode::UnsatisfiablePolicy);
    }
}

TEST_SUITE("encode") {
    TEST_CASE("single-character charset") {
        auto p = make_policy(4, {CharClass::Lower}, {}, "bcdefghijklmnopqrstuvwxyz");
        std::mt19937_64 rng(1);
        CHECK(encode(random_bits(rng), p).text == "aaaa");
        CHECK(encode({}, p).text == "aaaa");
    }

    TEST_CASE("frozen vectors from the reference implementation") {
        const DerivedBits zero{};
        CHECK(encode(zero, make_policy(8, kAlnum, {})).text == "9tVuH1Az");
        CHECK(encode(zero, make_policy(8, kAlnum, {}), 5).text == "31w5dw0V");
        auto r = encode_detailed(zero, default_policy());
        CHECK(r.password.text == "H8^Y2@>$<Kt8");
        CHECK(r.attempts == 1);
        DerivedBits ones;
        ones.bytes.fill(0xFF);
        CHECK(encode(ones, default_policy()).text == "m'Y.HA[ng8zh");
    }

    TEST_CASE("stream draw agrees with an independent re-derivation") {
        std::mt19937_64 rng(99);
        for (int i = 0; i < 300; ++i) {
            auto bits = random_bits(rng);
            ClassSet allowed = ClassSet::from_bits(static_cast<std::uint8_t>(1 + rng() % 15));
            auto p = make_policy(1 + static_cast<int>(rng() % 64), allowed, {});
            auto cs = effective_charset(p);
            auto nonce = rng() % 100;
            CHECK(draw_from_stream(bits, cs, p.length_min, nonce) ==
                  reference_draw(bits, cs.chars(), p.length_min, nonce));
        }
    }

    TEST_CASE("retries move to the next nonce until required classes appear") {
        std::mt19937_64 rng(5);
        bool saw_retry = false;
        auto p = make_policy(6, {CharClass::Lower, CharClass::Upper, CharClass::Digit, CharClass::Symbol},
                             {CharClass::Lower, CharClass::Upper, CharClass::Digit, CharClass::Symbol});
        auto cs = effective_charset(p);
        for (int i = 0; i < 200; ++i) {
            auto bits = random_bits(rng);
            auto r = encode_detailed(bits, p);
            CHECK(has_required_classes(r.password.text, p));
            CHECK(r.password.text == draw_from_stream(bits, cs, 6, r.nonce_used));
            CHECK(r.nonce_used == static_cast<std::uint64_t>(r.attempts - 1));
            for (std::uint64_t n = 0; n < r.nonce_used; ++n)
                CHECK_FALSE(has_required_classes(draw_from_stream(bits, cs, 6, n), p));
            saw_retry = saw_retry || r.attempts > 1;
        }
        CHECK(saw_retry);
    }

    TEST_CASE("near-impossible policy exhausts its retries") {
        // Two required classes, each reduced to one character, length 2.
        auto p = make_policy(2, {CharClass::Lower, CharClass::Upper, CharClass::Digit, CharClass::Symbol},
                             {CharClass::Lower, CharClass::Digit}, "123456789bcdefghijklmnopqrstuvwxyz");
        CHECK(code_of([&] { encode({}, p); }) == ErrorCode::RetriesExhausted);
    }

    TEST_CASE("output length is length_min even when max is larger") {
        auto p = make_policy(10, kAlnum, {});
        p.length_max = 20;
        CHECK(encode({}, p).text.size() == 10);
    }
}

TEST_SUITE("offsets") {
    const Charset lower(class_chars(CharClass::Lower));

    TEST_CASE("apply") {
        CHECK(apply_offset({"abc"}, {{0, 0, 0}, 26}, lower).text == "abc");
        CHECK(apply_offset({"abc"}, {{1, 2, 3}, 26}, lower).text == "bdf");
        CHECK(apply_offset({"z"}, {{1}, 26}, lower).text == "a");
    }

    TEST_CASE("compute") {
        CHECK(compute_offset({"abc"}, {"abc"}, lower) == PasswordOffset{{0, 0, 0}, 26});
        CHECK(compute_offset({"abc"}, {"bdf"}, lower) == PasswordOffset{{1, 2, 3}, 26});
        CHECK(compute_offset({"b"}, {"a"}, lower) == PasswordOffset{{25}, 26});
    }

    TEST_CASE("error paths") {
        CHECK(code_of([&] { compute_offset({"abc"}, {"ab!"}, lower); }) == ErrorCode::CharOutOfCharset);
        CHECK(code_of([&] { compute_offset({"abc"}, {"ab"}, lower); }) == ErrorCode::LengthMismatch);
        CHECK(code_of([&] { apply_offset({"abc"}, {{1, 2}, 26}, lower); }) == ErrorCode::LengthMismatch);
        CHECK(code_of([&] { apply_offset({"abc"}, {{1, 2, 3}, 62}, lower); }) == ErrorCode::ModulusMismatch);
        CHECK(code_of([&] { apply_offset({"aB"}, {{1, 2}, 26}, lower); }) == ErrorCode::CharOutOfCharset);
    }

    TEST_CASE("round trip and group property on random strings") {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 2000; ++i) {
            auto len = 1 + rng() % 30;
            std::string a(len, 'a'), b(len, 'a');
            for (auto& c : a) c = lower.at(rng() % 26);
            for (auto& c : b) c = lower.at(rng() % 26);
            auto o1 = compute_offset({a}, {b}, lower);
            CHECK(apply_offset({a}, o1, lower).text == b);
            PasswordOffset o2{std::vector<std::uint32_t>(len), 26};
            for (auto& s : o2.shifts) s = static_cast<std::uint32_t>(rng() % 26);
            CHECK(apply_offset(apply_offset({a}, o1, lower), o2, lower) == apply_offset({a}, compose_offsets(o1, o2), lower));
        }
    }

    TEST_CASE("random offset") {
        auto p = default_policy();
        auto base = encode({}, p);
        OffsetRng rng1(42), rng2(42);
        auto o1 = random_offset(base, p, rng1);
        auto o2 = random_offset(base, p, rng2);
        CHECK(o1 == o2);
        CHECK(o1.shifts.size() == base.text.size());
        CHECK(o1.modulus == 94);
        auto cs = effective_charset(p);
        for (int i = 0; i < 200; ++i) {
            auto o = random_offset(base, p, rng1);
            CHECK(has_required_classes(apply_offset(base, o, cs).text, p));
        }
    }

    TEST_CASE("uniform_below covers the range") {
        OffsetRng rng(1);
        std::vector<int> counts(7);
        for (int i = 0; i < 7000; ++i) ++counts[uniform_below(rng, 7)];
        for (int c : counts) CHECK(c > 850);
        CHECK(code_of([&] { uniform_below(rng, 0); }) == ErrorCode::InvalidParameter);
    }
}

TEST_CASE("policy JSON is a flat object") {
    auto p = make_policy(10, kAlnum, {CharClass::Digit}, "0O");
    p.length_max = 16;
    p.policy_version = 3;
    nlohmann::json j = p;
    CHECK(j.dump() ==
          R"({"allowed_classes":["lower","upper","digit"],"forbidden_chars":"0O","length_max":16,"length_min":10,"policy_version":3,"required_classes":["digit"]})");
    CHECK(j.get<PasswordPolicy>() == p);
    CHECK(code_of([] { nlohmann::json{{"length_min", 1}}.get<PasswordPolicy>(); }) == ErrorCode::UnsatisfiablePolicy);
    CHECK(code_of([] {
              nlohmann::json j2 = default_policy();
              j2["allowed_classes"].push_back("emoji");
              j2.get<PasswordPolicy>();
          }) == ErrorCode::UnsatisfiablePolicy);
}
