#pragma once

#include <autopass/bytes.hpp>

#include <functional>
#include <string>

// Thin wrappers over libcrypto primitives. Every caller in the project goes
// through here so the primitive choice is visible in one place.
namespace autopass::crypto {

inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kAeadKeySize = 32;
inline constexpr std::size_t kAeadNonceSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;
inline constexpr std::size_t kSignPublicKeySize = 32;
inline constexpr std::size_t kSignSecretKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;

inline constexpr const char* kHashId = "sha256";
inline constexpr const char* kKdfId = "pbkdf2-hmac-sha256";
inline constexpr const char* kAeadId = "aes-256-gcm";
inline constexpr const char* kSignatureId = "ed25519";

using Digest = std::array<std::uint8_t, kDigestSize>;

Digest sha256(ByteView data);

/// Incremental SHA-256.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(ByteView data);
    /// Writes the digest and re-initializes for the next message.
    Digest finish();

private:
    void* ctx_;
};

SecureBytes pbkdf2_sha256(ByteView password, ByteView salt, std::uint32_t iterations,
                          std::size_t out_len);

/// Returns ciphertext with the 16-byte tag appended.
Bytes aead_seal(ByteView key, ByteView nonce, ByteView plaintext, ByteView aad);

/// Throws Error(AuthenticationFailed) when the tag does not verify.
SecureBytes aead_open(ByteView key, ByteView nonce, ByteView sealed, ByteView aad);

struct SigningKeyPair {
    SecureBytes secret;  // 32-byte seed
    Bytes public_key;    // 32 bytes
};

SigningKeyPair signing_keypair_from_seed(ByteView seed);
Bytes sign(ByteView secret_seed, ByteView message);
bool verify(ByteView public_key, ByteView message, ByteView signature) noexcept;

/// Constant-time comparison for equal-length buffers.
bool equal_ct(ByteView a, ByteView b) noexcept;

/// Fills the span with bytes. Injected wherever secrets or nonces are made so
/// tests can substitute a seeded source.
using RandomSource = std::function<void(std::span<std::uint8_t>)>;

/// The operating system CSPRNG (via libcrypto).
RandomSource system_random();

/// Deterministic source for tests and reproducible fixtures; NOT for secrets.
RandomSource seeded_random(std::uint64_t seed);

}  // namespace autopass::crypto
