#include <autopass/app.hpp>

#include <termios.h>
#include <unistd.h>

#include <iostream>

namespace autopass::app {

bool stdin_is_terminal() { return ::isatty(STDIN_FILENO) == 1; }
bool stdout_is_terminal() { return ::isatty(STDOUT_FILENO) == 1; }

std::string read_secret_line(std::string_view prompt) {
    std::string line;
    if (!stdin_is_terminal()) {
        if (!std::getline(std::cin, line)) throw Error(ErrorCode::InvalidParameter, "expected input on stdin");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }
    std::cerr << prompt << std::flush;
    termios saved{};
    ::tcgetattr(STDIN_FILENO, &saved);
    termios quiet = saved;
    quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
    ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &quiet);
    bool ok = static_cast<bool>(std::getline(std::cin, line));
    ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &saved);
    std::cerr << '\n';
    if (!ok) throw Error(ErrorCode::InvalidParameter, "no input");
    return line;
}

}  // namespace autopass::app
