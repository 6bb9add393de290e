#include <autopass/app.hpp>

#include <httplib.h>

namespace autopass::app {

using nlohmann::json;

struct Daemon::Session {
    MasterSecret master;
    UserPassword password;
    std::int64_t last_activity = 0;
};

namespace {

std::string source_name(SiteSource s) { return s == SiteSource::Url ? "url" : "user_site_name"; }

std::string required_string(const json& body, const char* key) {
    if (!body.is_object() || !body.contains(key) || !body.at(key).is_string())
        throw Error(ErrorCode::InvalidParameter, std::string("missing string field '") + key + "'");
    return body.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
    if (!body.is_object() || !body.contains(key) || body.at(key).is_null()) return std::nullopt;
    if (!body.at(key).is_string()) throw Error(ErrorCode::InvalidParameter, std::string("field '") + key + "' must be a string");
    return body.at(key).get<std::string>();
}

}  // namespace

bool is_loopback_host(std::string_view host) {
    return host == "localhost" || host == "::1" || host == "[::1]" || host.starts_with("127.");
}

Daemon::Daemon(DaemonOptions options) : options_(std::move(options)) {}

Daemon::~Daemon() { stop(); }

bool Daemon::unlocked() {
    std::lock_guard lock(mutex_);
    return session_ != nullptr && options_.clock() - session_->last_activity <= options_.idle_timeout_seconds;
}

void Daemon::require_session() {
    if (!session_) throw Error(ErrorCode::AuthenticationFailed, "no unlocked session");
    const auto now = options_.clock();
    if (now - session_->last_activity > options_.idle_timeout_seconds) {
        session_.reset();
        throw Error(ErrorCode::AuthenticationFailed, "session expired");
    }
    session_->last_activity = now;
}

sync::HttpResponse Daemon::handle(std::string_view method, std::string_view path, const std::string& body) {
    json parsed = json::object();
    if (!body.empty()) {
        parsed = json::parse(body, nullptr, false);
        if (parsed.is_discarded()) return sync::error_response(400, "bad_request", "body is not valid JSON");
    }
    std::lock_guard lock(mutex_);
    try {
        return dispatch(method, path, parsed);
    } catch (const Error& e) {
        return sync::error_response(http_status_for(e.code()), error_code_name(e.code()), e.what());
    } catch (const std::exception&) {
        return sync::error_response(500, "internal", "internal error");
    }
}

sync::HttpResponse Daemon::dispatch(std::string_view method, std::string_view path, const json& body) {
    const auto& home = options_.home;
    auto client = [this] { return options_.client_factory ? options_.client_factory() : nullptr; };
    auto object_bytes = [](const json& b) -> std::optional<std::string> {
        if (auto p = optional_string(b, "object_path")) return read_file_bytes(*p);
        return std::nullopt;
    };
    auto view = [](const std::optional<std::string>& s) -> std::optional<ByteView> {
        if (!s) return std::nullopt;
        return as_bytes(*s);
    };

    if (method == "POST" && path == "/session") {
        UserPassword password(required_string(body, "user_password"));
        auto vault = load_vault(home);
        auto master = unlock(vault, password);
        session_ = std::make_unique<Session>(Session{std::move(master), password, options_.clock()});
        return {200, json{{"unlocked", true}, {"idle_timeout_seconds", options_.idle_timeout_seconds}}};
    }
    if (method == "DELETE" && path == "/session") {
        session_.reset();
        return {200, json{{"unlocked", false}}};
    }

    if (method == "POST" && path == "/generate") {
        require_session();
        const auto raw = required_string(body, "site");
        const auto object = object_bytes(body);
        VaultLock lock(home);
        auto vault = load_vault(home);
        auto key = resolve_site(vault, raw, guess_site_source(raw));
        auto sync_client = client();
        if (ensure_site(vault, key, sync_client.get())) save_vault(home, vault);
        auto pw = generate_password(vault, session_->master, session_->password, key, view(object));
        return {200, json{{"site", key.value}, {"password", pw.text}}};
    }
    if (method == "POST" && path == "/pin") {
        require_session();
        const auto raw = required_string(body, "site");
        const Password desired{required_string(body, "desired")};
        const auto object = object_bytes(body);
        VaultLock lock(home);
        auto vault = load_vault(home);
        auto key = resolve_site(vault, raw, guess_site_source(raw));
        auto sync_client = client();
        ensure_site(vault, key, sync_client.get());
        pin_password(vault, session_->password, key, desired, view(object));
        save_vault(home, vault);
        return {200, json{{"site", key.value}, {"version", vault.sites.at(key.value).version}}};
    }
    if (method == "POST" && path == "/rotate") {
        require_session();
        const auto raw = required_string(body, "site");
        const auto object = object_bytes(body);
        VaultLock lock(home);
        auto vault = load_vault(home);
        auto key = resolve_site(vault, raw, guess_site_source(raw));
        auto sync_client = client();
        ensure_site(vault, key, sync_client.get());
        std::uint64_t seed = 0;
        crypto::system_random()(std::span(reinterpret_cast<std::uint8_t*>(&seed), sizeof seed));
        OffsetRng rng(seed);
        rotate_password(vault, session_->password, key, rng, view(object));
        save_vault(home, vault);
        return {200, json{{"site", key.value}, {"version", vault.sites.at(key.value).version}}};
    }
    if (method == "GET" && path == "/sites") {
        require_session();
        auto vault = load_vault(home);
        json sites = json::array();
        for (const auto& [key, site] : vault.sites) {
            sites.push_back({{"site", key},
                             {"source", source_name(site.site_key.source)},
                             {"version", site.version},
                             {"policy", site.policy},
                             {"has_offset", site.offset.has_value()},
                             {"has_reminder", site.reminder.has_value()},
                             {"use_object", site.input_params.use_object}});
        }
        return {200, json{{"sites", sites}}};
    }
    if (method == "GET" && path.starts_with("/reminder/")) {
        require_session();
        auto raw = std::string(path.substr(std::string_view("/reminder/").size()));
        auto vault = load_vault(home);
        auto key = resolve_site(vault, raw, guess_site_source(raw));
        const auto& site = get_site(vault, key.value);
        return {200, json{{"site", key.value}, {"reminder", site.reminder ? json(*site.reminder) : json(nullptr)}}};
    }
    return sync::error_response(404, "not_found", "no such endpoint");
}

void Daemon::setup_routes() {
    server_ = std::make_unique<httplib::Server>();
    if (options_.ui_dir) server_->set_mount_point("/", options_.ui_dir->string());
    auto route = [this](const char* method) {
        return [this, method](const httplib::Request& req, httplib::Response& res) {
            auto r = handle(method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json; charset=utf-8");
        };
    };
    server_->Get(".*", route("GET"));
    server_->Post(".*", route("POST"));
    server_->Delete(".*", route("DELETE"));
}

int Daemon::bind(const std::string& host, int port, bool allow_remote) {
    if (!allow_remote && !is_loopback_host(host))
        throw Error(ErrorCode::InvalidParameter, "refusing to bind non-loopback address " + host +
                                                     " without --allow-remote");
    setup_routes();
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

int Daemon::start(const std::string& host, int port, bool allow_remote) {
    int bound = bind(host, port, allow_remote);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void Daemon::listen_blocking(const std::string& host, int port, bool allow_remote) {
    bind(host, port, allow_remote);
    server_->listen_after_bind();
}

void Daemon::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
    std::lock_guard lock(mutex_);
    session_.reset();
}

}  // namespace autopass::app
