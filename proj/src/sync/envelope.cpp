#include <autopass/error.hpp>
#include <autopass/sync.hpp>

namespace autopass::sync {

using nlohmann::json;

std::string key_id_for(ByteView public_key) {
    auto digest = crypto::sha256(public_key);
    return to_hex(ByteView(digest.data(), 8));
}

Bytes envelope_signed_bytes(std::string_view key_id, std::int64_t timestamp, std::string_view payload) {
    Bytes out;
    append_u32_be(out, static_cast<std::uint32_t>(key_id.size()));
    out.insert(out.end(), key_id.begin(), key_id.end());
    append_u64_be(out, static_cast<std::uint64_t>(timestamp));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

SignedEnvelope sign_envelope(std::string payload, const crypto::SigningKeyPair& key, std::int64_t timestamp) {
    SignedEnvelope env;
    env.payload = std::move(payload);
    env.key_id = key_id_for(key.public_key);
    env.timestamp = timestamp;
    env.signature = crypto::sign(key.secret.view(), envelope_signed_bytes(env.key_id, env.timestamp, env.payload));
    return env;
}

bool verify_envelope(const SignedEnvelope& envelope, ByteView pinned_public_key) noexcept {
    try {
        if (envelope.key_id != key_id_for(pinned_public_key)) return false;
        return crypto::verify(pinned_public_key,
                              envelope_signed_bytes(envelope.key_id, envelope.timestamp, envelope.payload),
                              envelope.signature);
    } catch (...) {
        return false;
    }
}

json envelope_to_json(const SignedEnvelope& envelope) {
    return json{{"payload", base64_encode(as_bytes(envelope.payload))},
                {"key_id", envelope.key_id},
                {"timestamp", envelope.timestamp},
                {"signature", base64_encode(envelope.signature)}};
}

SignedEnvelope envelope_from_json(const json& j) {
    try {
        SignedEnvelope env;
        auto payload = base64_decode(j.at("payload").get<std::string>());
        env.payload.assign(payload.begin(), payload.end());
        env.key_id = j.at("key_id").get<std::string>();
        env.timestamp = j.at("timestamp").get<std::int64_t>();
        env.signature = base64_decode(j.at("signature").get<std::string>());
        return env;
    } catch (const json::exception&) {
        throw Error(ErrorCode::SignatureInvalid, "malformed signed envelope");
    } catch (const Error&) {
        throw Error(ErrorCode::SignatureInvalid, "malformed signed envelope");
    }
}

}  // namespace autopass::sync
