#pragma once

#include <autopass/sync.hpp>

#include <atomic>
#include <memory>

namespace fixtures {

/// Sync service on an ephemeral loopback port with an adjustable clock.
struct LocalService {
    std::shared_ptr<std::atomic<std::int64_t>> now = std::make_shared<std::atomic<std::int64_t>>(1'700'000'000);
    autopass::sync::SyncService service;
    autopass::sync::SyncHttpServer http;
    int port = 0;

    explicit LocalService(std::uint64_t seed = 1)
        : service(std::make_unique<autopass::sync::MemoryStore>(),
                  autopass::crypto::signing_keypair_from_seed(autopass::Bytes(32, static_cast<std::uint8_t>(seed))),
                  [n = now] { return n->load(); }, autopass::crypto::seeded_random(seed)),
          http(service) {
        port = http.start("127.0.0.1", 0);
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
    const autopass::Bytes& public_key() const { return service.signing_key().public_key; }
    autopass::sync::SyncClient client() const { return {url(), public_key()}; }
};

/// Loopback URL with nothing listening.
inline std::string dead_url() {
    autopass::sync::SyncService svc(std::make_unique<autopass::sync::MemoryStore>(),
                                    autopass::crypto::signing_keypair_from_seed(autopass::Bytes(32, 9)));
    int port = 0;
    {
        autopass::sync::SyncHttpServer s(svc);
        port = s.start("127.0.0.1", 0);
    }
    return "http://127.0.0.1:" + std::to_string(port);
}

}  // namespace fixtures
