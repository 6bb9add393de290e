// Sync service: signed policy records and per-user site configuration.

#include <autopass/error.hpp>
#include <autopass/sync.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace autopass;

namespace {

bool split_listen(const std::string& listen, std::string& host, int& port) {
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) return false;
    host = listen.substr(0, colon);
    try {
        port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        return false;
    }
    return !host.empty() && port >= 0 && port <= 65535;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autopass-server: configuration sync service"};
    std::string listen = "127.0.0.1:7871";
    std::string store_path = "autopass-store.json";
    std::string key_path = "autopass-signing.key";
    app.add_option("--listen", listen, "host:port (port 0 picks a free port)");
    app.add_option("--store", store_path, "JSON store file");
    app.add_option("--signing-key", key_path, "Ed25519 seed file (created if missing)");

    auto* pubkey = app.add_subcommand("pubkey", "Print the base64 public key clients must pin");
    std::string user_id;
    auto* add_user = app.add_subcommand("add-user", "Register a user and print their login secret");
    add_user->add_option("user_id", user_id)->required();
    std::string domain, policy_json;
    auto* add_policy = app.add_subcommand("add-policy", "Publish a password policy for a domain");
    add_policy->add_option("domain", domain)->required();
    add_policy->add_option("policy", policy_json, "Policy JSON object")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto key = sync::load_or_create_signing_key(key_path, crypto::system_random());
        if (pubkey->parsed()) {
            std::cout << base64_encode(key.public_key) << "\n";
            return 0;
        }
        sync::SyncService service(std::make_unique<sync::FileStore>(store_path), std::move(key));
        if (add_user->parsed()) {
            std::cout << service.register_user(user_id) << "\n";
            return 0;
        }
        if (add_policy->parsed()) {
            auto j = nlohmann::json::parse(policy_json, nullptr, false);
            if (j.is_discarded()) throw Error(ErrorCode::InvalidParameter, "policy is not valid JSON");
            service.put_policy(domain, j.get<PasswordPolicy>());
            return 0;
        }

        std::string host;
        int port = 0;
        if (!split_listen(listen, host, port)) throw Error(ErrorCode::InvalidParameter, "--listen expects host:port");
        sync::SyncHttpServer server(service);
        int bound = server.bind(host, port);
        std::cout << "listening on " << host << ":" << bound << "\n" << std::flush;
        server.listen_blocking();
    } catch (const Error& e) {
        std::cerr << "autopass-server: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
