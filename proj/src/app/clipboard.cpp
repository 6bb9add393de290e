#include <autopass/app.hpp>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>

namespace autopass::app {

namespace {

bool on_path(const std::string& tool) {
    const char* path = std::getenv("PATH");
    if (path == nullptr) return false;
    std::string_view rest = path;
    while (!rest.empty()) {
        auto colon = rest.find(':');
        auto dir = rest.substr(0, colon);
        if (!dir.empty() && ::access((std::string(dir) + "/" + tool).c_str(), X_OK) == 0) return true;
        if (colon == std::string_view::npos) break;
        rest.remove_prefix(colon + 1);
    }
    return false;
}

}  // namespace

std::string clipboard_command(const CliConfig& config) {
    if (config.clipboard_command) return *config.clipboard_command;
    if (std::getenv("WAYLAND_DISPLAY") != nullptr && on_path("wl-copy")) return "wl-copy";
    if (on_path("xclip")) return "xclip -selection clipboard";
    if (on_path("xsel")) return "xsel --clipboard --input";
    if (on_path("pbcopy")) return "pbcopy";
    throw Error(ErrorCode::Unavailable, "no clipboard tool found (set AUTOPASS_CLIPBOARD_CMD)");
}

void copy_to_clipboard(const std::string& command, std::string_view text) {
    FILE* pipe = ::popen(command.c_str(), "w");
    if (pipe == nullptr) throw Error(ErrorCode::Io, "cannot run clipboard command");
    bool ok = std::fwrite(text.data(), 1, text.size(), pipe) == text.size();
    int status = ::pclose(pipe);
    if (!ok || status != 0) throw Error(ErrorCode::Io, "clipboard command failed");
}

void schedule_clipboard_clear(const std::string& command, int seconds) {
    pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorCode::Io, "cannot start clipboard clearing process");
    if (pid > 0) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        return;
    }
    // First child: detach and let a grandchild do the waiting.
    ::setsid();
    if (::fork() != 0) ::_exit(0);
    int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
        ::dup2(devnull, STDIN_FILENO);
        ::dup2(devnull, STDOUT_FILENO);
        ::dup2(devnull, STDERR_FILENO);
        if (devnull > STDERR_FILENO) ::close(devnull);
    }
    ::sleep(static_cast<unsigned>(seconds));
    FILE* pipe = ::popen(command.c_str(), "w");
    if (pipe != nullptr) ::pclose(pipe);
    ::_exit(0);
}

}  // namespace autopass::app
