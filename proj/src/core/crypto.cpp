#include <autopass/crypto.hpp>
#include <autopass/error.hpp>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <limits>
#include <memory>

namespace autopass::crypto {

namespace {

[[noreturn]] void fail(const char* what) {
    throw Error(ErrorCode::Io, std::string("libcrypto failure: ") + what);
}

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
struct PkeyDeleter {
    void operator()(EVP_PKEY* key) const { EVP_PKEY_free(key); }
};

using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

int checked_int(std::size_t n) {
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max())) fail("buffer too large");
    return static_cast<int>(n);
}

}  // namespace

Digest sha256(ByteView data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
        fail("EVP_Digest");
    return out;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
        fail("EVP_DigestInit_ex");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(ByteView data) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1)
        fail("EVP_DigestUpdate");
    return *this;
}

Digest Sha256::finish() {
    Digest out{};
    unsigned int len = 0;
    auto* ctx = static_cast<EVP_MD_CTX*>(ctx_);
    if (EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) fail("EVP_DigestFinal_ex");
    if (EVP_DigestInit_ex(ctx, nullptr, nullptr) != 1) fail("EVP_DigestInit_ex");
    return out;
}

SecureBytes pbkdf2_sha256(ByteView password, ByteView salt, std::uint32_t iterations,
                          std::size_t out_len) {
    if (iterations == 0 || iterations > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
        throw Error(ErrorCode::InvalidParameter, "kdf iterations out of range");
    SecureBytes out(out_len);
    if (PKCS5_PBKDF2_HMAC(reinterpret_cast<const char*>(password.data()), checked_int(password.size()),
                          salt.data(), checked_int(salt.size()), static_cast<int>(iterations),
                          EVP_sha256(), checked_int(out_len), out.data()) != 1)
        fail("PKCS5_PBKDF2_HMAC");
    return out;
}

Bytes aead_seal(ByteView key, ByteView nonce, ByteView plaintext, ByteView aad) {
    if (key.size() != kAeadKeySize || nonce.size() != kAeadNonceSize)
        throw Error(ErrorCode::InvalidParameter, "bad AEAD key or nonce size");
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        fail("EVP_EncryptInit_ex");
    int len = 0;
    if (!aad.empty() && EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), checked_int(aad.size())) != 1)
        fail("EVP_EncryptUpdate(aad)");
    Bytes out(plaintext.size() + kAeadTagSize);
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(), checked_int(plaintext.size())) != 1)
        fail("EVP_EncryptUpdate");
    int total = len;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &len) != 1) fail("EVP_EncryptFinal_ex");
    total += len;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize, out.data() + total) != 1)
        fail("EVP_CTRL_GCM_GET_TAG");
    out.resize(static_cast<std::size_t>(total) + kAeadTagSize);
    return out;
}

SecureBytes aead_open(ByteView key, ByteView nonce, ByteView sealed, ByteView aad) {
    if (key.size() != kAeadKeySize || nonce.size() != kAeadNonceSize || sealed.size() < kAeadTagSize)
        throw Error(ErrorCode::AuthenticationFailed, "authentication failed");
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        fail("EVP_DecryptInit_ex");
    int len = 0;
    if (!aad.empty() && EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), checked_int(aad.size())) != 1)
        fail("EVP_DecryptUpdate(aad)");
    const std::size_t body = sealed.size() - kAeadTagSize;
    SecureBytes out(body);
    if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), checked_int(body)) != 1)
        fail("EVP_DecryptUpdate");
    Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(body), sealed.end());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag.data()) != 1)
        fail("EVP_CTRL_GCM_SET_TAG");
    int final_len = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &final_len) != 1)
        throw Error(ErrorCode::AuthenticationFailed, "authentication failed");
    return out;
}

SigningKeyPair signing_keypair_from_seed(ByteView seed) {
    if (seed.size() != kSignSecretKeySize)
        throw Error(ErrorCode::InvalidParameter, "signing seed must be 32 bytes");
    Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
    if (!key) fail("EVP_PKEY_new_raw_private_key");
    SigningKeyPair pair{SecureBytes(seed), Bytes(kSignPublicKeySize)};
    std::size_t len = pair.public_key.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), pair.public_key.data(), &len) != 1 ||
        len != kSignPublicKeySize)
        fail("EVP_PKEY_get_raw_public_key");
    return pair;
}

Bytes sign(ByteView secret_seed, ByteView message) {
    Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, secret_seed.data(),
                                          secret_seed.size()));
    if (!key) fail("EVP_PKEY_new_raw_private_key");
    MdCtx ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
        fail("EVP_DigestSignInit");
    Bytes signature(kSignatureSize);
    std::size_t len = signature.size();
    if (EVP_DigestSign(ctx.get(), signature.data(), &len, message.data(), message.size()) != 1)
        fail("EVP_DigestSign");
    signature.resize(len);
    return signature;
}

bool verify(ByteView public_key, ByteView message, ByteView signature) noexcept {
    if (public_key.size() != kSignPublicKeySize || signature.size() != kSignatureSize) return false;
    Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                         public_key.size()));
    if (!key) return false;
    MdCtx ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
        return false;
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                            message.size()) == 1;
}

bool equal_ct(ByteView a, ByteView b) noexcept {
    return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

RandomSource system_random() {
    return [](std::span<std::uint8_t> out) {
        if (!out.empty() && RAND_bytes(out.data(), checked_int(out.size())) != 1) fail("RAND_bytes");
    };
}

RandomSource seeded_random(std::uint64_t seed) {
    // SHA-256 in counter mode over the seed.
    struct State {
        Bytes seed_bytes;
        std::uint64_t counter = 0;
        Digest block{};
        std::size_t used = kDigestSize;
    };
    auto state = std::make_shared<State>();
    append_u64_be(state->seed_bytes, seed);
    return [state](std::span<std::uint8_t> out) {
        for (auto& b : out) {
            if (state->used == kDigestSize) {
                Bytes input = state->seed_bytes;
                append_u64_be(input, state->counter++);
                state->block = sha256(input);
                state->used = 0;
            }
            b = state->block[state->used++];
        }
    };
}

}  // namespace autopass::crypto
