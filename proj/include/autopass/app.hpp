#pragma once

#include <autopass/error.hpp>
#include <autopass/sync.hpp>
#include <autopass/vault.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace autopass::app {

inline constexpr int kDefaultClipboardClearSeconds = 60;

struct CliConfig {
    std::filesystem::path home;
    std::optional<std::string> server_url;
    std::optional<Bytes> server_pubkey;
    int clipboard_clear_seconds = kDefaultClipboardClearSeconds;
    std::optional<std::string> clipboard_command;
};

/// Environment (AUTOPASS_*) over <home>/config.json over defaults.
CliConfig load_cli_config();

/// nullptr unless both server url and pinned key are configured.
std::unique_ptr<sync::SyncClient> make_sync_client(const CliConfig& config);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAuth = 3;
inline constexpr int kExitPolicy = 4;
inline constexpr int kExitNetwork = 5;
inline constexpr int kExitConflict = 6;

int exit_code_for(ErrorCode code);
int http_status_for(ErrorCode code);

/// Line from the terminal with echo off, or from stdin when not a terminal.
std::string read_secret_line(std::string_view prompt);
bool stdin_is_terminal();
bool stdout_is_terminal();

/// Shell command that reads the clipboard content on stdin.
std::string clipboard_command(const CliConfig& config);
void copy_to_clipboard(const std::string& command, std::string_view text);
/// Detached process that empties the clipboard after `seconds`.
void schedule_clipboard_clear(const std::string& command, int seconds);

/// Persisted access token for the sync service (<home>/session.json).
struct SavedSession {
    std::string user_id;
    sync::AccessToken token;
};
void save_session(const std::filesystem::path& home, const SavedSession& session);
SavedSession load_session(const std::filesystem::path& home);  // throws AuthenticationFailed

/// Registers `key` if the vault lacks it, using the synced policy when one can
/// be obtained and the default policy otherwise. Returns true when added.
bool ensure_site(Vault& vault, const SiteKey& key, sync::SyncClient* client);

/// "url" unless the text has no dot and no scheme.
SiteSource guess_site_source(std::string_view raw);

std::string read_file_bytes(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

inline constexpr std::int64_t kSessionIdleSeconds = 10 * 60;

struct DaemonOptions {
    std::filesystem::path home;
    std::function<std::int64_t()> clock = sync::system_clock_seconds;
    std::int64_t idle_timeout_seconds = kSessionIdleSeconds;
    std::function<std::unique_ptr<sync::SyncClient>()> client_factory;
    std::optional<std::filesystem::path> ui_dir;
};

/// Loopback JSON API over the vault for the companion UI. Holds at most one
/// unlocked session in memory.
class Daemon {
public:
    explicit Daemon(DaemonOptions options);
    ~Daemon();

    sync::HttpResponse handle(std::string_view method, std::string_view path, const std::string& body);

    bool unlocked();

    /// Throws InvalidParameter for a non-loopback host unless allow_remote.
    int start(const std::string& host, int port, bool allow_remote);
    void listen_blocking(const std::string& host, int port, bool allow_remote);
    void stop();

private:
    struct Session;

    sync::HttpResponse dispatch(std::string_view method, std::string_view path, const nlohmann::json& body);
    void require_session();
    void setup_routes();
    int bind(const std::string& host, int port, bool allow_remote);

    DaemonOptions options_;
    std::mutex mutex_;
    std::unique_ptr<Session> session_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

bool is_loopback_host(std::string_view host);

/// Entry point for the `autopass` executable.
int run_cli(int argc, char** argv);

}  // namespace autopass::app
