#include <autopass/app.hpp>

#include <CLI11.hpp>

#include <signal.h>

#include <iostream>

namespace autopass::app {

using nlohmann::json;

namespace {

struct GenOptions {
    std::string site;
    std::string object_path;
    bool to_stdout = false;
    bool to_clip = false;
    bool site_name = false;
};

SiteSource source_for(const std::string& raw, bool force_name) {
    return force_name ? SiteSource::UserSiteName : guess_site_source(raw);
}

std::optional<std::string> read_object(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return read_file_bytes(path);
}

std::optional<ByteView> view(const std::optional<std::string>& s) {
    if (!s) return std::nullopt;
    return as_bytes(*s);
}

PasswordPolicy parse_policy_arg(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg.front() != '{') text = read_file_bytes(arg);
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidParameter, "--policy is neither JSON nor a readable JSON file");
    auto policy = j.get<PasswordPolicy>();
    validate_policy(policy);
    return policy;
}

int cmd_init(const CliConfig& config, const VaultParams& params, bool force) {
    if (vault_exists(config.home) && !force)
        throw Error(ErrorCode::VaultExists, "a vault already exists in " + config.home.string() + " (use --force)");
    auto first = read_secret_line("New user password: ");
    if (stdin_is_terminal()) {
        auto second = read_secret_line("Repeat user password: ");
        if (first != second) throw Error(ErrorCode::InvalidParameter, "passwords do not match");
        secure_wipe(second.data(), second.size());
    }
    UserPassword password(first);
    secure_wipe(first.data(), first.size());
    VaultLock lock(config.home);
    auto vault = init_vault(password, params);
    create_vault_file(config.home, vault, force);
    std::cerr << "vault created at " << vault_path(config.home).string() << "\n";
    return kExitOk;
}

void print_password(const Password& pw) {
    if (stdout_is_terminal()) std::cerr << "warning: printing password to a terminal\n";
    std::cout << pw.text << "\n" << std::flush;
}

int cmd_gen(const CliConfig& config, const GenOptions& opts) {
    auto object = read_object(opts.object_path);
    auto password_text = read_secret_line("User password: ");
    UserPassword password(password_text);
    secure_wipe(password_text.data(), password_text.size());

    Password pw;
    {
        VaultLock lock(config.home);
        auto vault = load_vault(config.home);
        auto key = resolve_site(vault, opts.site, source_for(opts.site, opts.site_name));
        const auto master = unlock(vault, password);
        auto client = make_sync_client(config);
        if (ensure_site(vault, key, client.get())) {
            save_vault(config.home, vault);
            std::cerr << "registered new site '" << key.value << "'\n";
        }
        pw = generate_password(vault, master, password, key, view(object));
    }

    if (opts.to_clip) {
        const auto command = clipboard_command(config);
        copy_to_clipboard(command, pw.text);
        schedule_clipboard_clear(command, config.clipboard_clear_seconds);
        std::cerr << "copied to clipboard; clearing in " << config.clipboard_clear_seconds << " s\n";
    } else {
        print_password(pw);
    }
    secure_wipe(pw.text.data(), pw.text.size());
    return kExitOk;
}

struct AddOptions {
    std::string site;
    std::string policy;
    bool use_object = false;
    bool no_user_constant = false;
    std::string user_name;
    std::string reminder;
    std::uint64_t nonce = 0;
    bool site_name = false;
};

int cmd_add(const CliConfig& config, const AddOptions& opts) {
    VaultLock lock(config.home);
    auto vault = load_vault(config.home);
    auto key = resolve_site(vault, opts.site, source_for(opts.site, opts.site_name));
    auto client = make_sync_client(config);

    PasswordPolicy policy = default_policy();
    if (!opts.policy.empty()) {
        policy = parse_policy_arg(opts.policy);
    } else if (key.source == SiteSource::Url && client) {
        try {
            policy = sync::fetch_policy(client.get(), vault, key.value);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unavailable && e.code() != ErrorCode::NotFound) throw;
            std::cerr << "no synced policy for '" << key.value << "'; using the default policy\n";
        }
    }

    SiteConfig config_out = new_site_config(key, policy);
    if (auto it = vault.sites.find(key.value); it != vault.sites.end()) {
        config_out = it->second;
        if (config_out.policy != policy) {
            config_out.policy = policy;
            if (config_out.offset) std::cerr << "policy changed; stored offset discarded\n";
            config_out.offset.reset();
        }
    }
    auto& params = config_out.input_params;
    params.use_object = opts.use_object;
    params.use_user_constant = !opts.no_user_constant;
    params.use_user_name = !opts.user_name.empty();
    params.user_name = opts.user_name.empty() ? std::nullopt : std::optional<std::string>(opts.user_name);
    params.version_nonce = opts.nonce;
    if (!opts.reminder.empty()) config_out.reminder = opts.reminder;
    config_out.updated_at = sync::system_clock_seconds();
    upsert_site(vault, config_out);
    save_vault(config.home, vault);
    std::cerr << "site '" << key.value << "' saved (version " << vault.sites.at(key.value).version << ")\n";
    return kExitOk;
}

int cmd_pin(const CliConfig& config, const std::string& site, const std::string& object_path, bool site_name) {
    auto object = read_object(object_path);
    auto password_text = read_secret_line("User password: ");
    UserPassword password(password_text);
    secure_wipe(password_text.data(), password_text.size());
    Password desired{read_secret_line("Desired site password: ")};

    VaultLock lock(config.home);
    auto vault = load_vault(config.home);
    auto key = resolve_site(vault, site, source_for(site, site_name));
    auto client = make_sync_client(config);
    ensure_site(vault, key, client.get());
    pin_password(vault, password, key, desired, view(object));
    secure_wipe(desired.text.data(), desired.text.size());
    save_vault(config.home, vault);
    std::cerr << "pinned password for '" << key.value << "'\n";
    return kExitOk;
}

int cmd_rotate(const CliConfig& config, const std::string& site, const std::string& object_path, bool site_name) {
    auto object = read_object(object_path);
    auto password_text = read_secret_line("User password: ");
    UserPassword password(password_text);
    secure_wipe(password_text.data(), password_text.size());

    VaultLock lock(config.home);
    auto vault = load_vault(config.home);
    auto key = resolve_site(vault, site, source_for(site, site_name));
    auto client = make_sync_client(config);
    ensure_site(vault, key, client.get());
    std::uint64_t seed = 0;
    crypto::system_random()(std::span(reinterpret_cast<std::uint8_t*>(&seed), sizeof seed));
    OffsetRng rng(seed);
    rotate_password(vault, password, key, rng, view(object));
    save_vault(config.home, vault);
    std::cerr << "rotated password for '" << key.value << "'\n";
    return kExitOk;
}

int cmd_reminder(const CliConfig& config, const std::string& site, const std::optional<std::string>& text,
                 bool site_name) {
    VaultLock lock(config.home);
    auto vault = load_vault(config.home);
    auto key = resolve_site(vault, site, source_for(site, site_name));
    auto current = get_site(vault, key.value);
    if (!text) {
        if (current.reminder) std::cout << *current.reminder << "\n";
        else std::cerr << "no reminder set for '" << key.value << "'\n";
        return kExitOk;
    }
    current.reminder = *text;
    current.updated_at = sync::system_clock_seconds();
    upsert_site(vault, current);
    save_vault(config.home, vault);
    return kExitOk;
}

int cmd_list(const CliConfig& config) {
    auto vault = load_vault(config.home);
    for (const auto& [key, site] : vault.sites) {
        std::cout << key << "\tv" << site.version << "\tlen " << site.policy.length_min
                  << (site.offset ? "\toffset" : "") << (site.input_params.use_object ? "\tobject" : "") << "\n";
    }
    return kExitOk;
}

std::unique_ptr<sync::SyncClient> require_client(const CliConfig& config) {
    auto client = make_sync_client(config);
    if (!client)
        throw Error(ErrorCode::Unavailable, "sync service not configured (set AUTOPASS_SERVER_URL and AUTOPASS_SERVER_PUBKEY)");
    return client;
}

int cmd_login(const CliConfig& config, const std::string& user_id) {
    auto client = require_client(config);
    auto secret = read_secret_line("Login secret: ");
    auto token = client->login(user_id, secret);
    secure_wipe(secret.data(), secret.size());
    save_session(config.home, {user_id, token});
    std::cerr << "logged in as '" << user_id << "'\n";
    return kExitOk;
}

int cmd_sync(const CliConfig& config, const std::string& direction) {
    auto client = require_client(config);
    auto session = load_session(config.home);
    VaultLock lock(config.home);
    auto vault = load_vault(config.home);
    if (direction == "pull") {
        sync::sync_pull(vault, *client, session.user_id, session.token);
    } else {
        sync::sync_push(vault, *client, session.user_id, session.token);
    }
    save_vault(config.home, vault);
    std::cerr << "sync " << direction << " complete (record version " << vault.sync.record_version << ")\n";
    return kExitOk;
}

int cmd_policy_fetch(const CliConfig& config, const std::string& domain) {
    auto client = require_client(config);
    VaultLock lock(config.home);
    auto vault = load_vault(config.home);
    auto policy = sync::fetch_policy(client.get(), vault, domain);
    save_vault(config.home, vault);
    std::cout << json(policy).dump() << "\n";
    return kExitOk;
}

bool split_listen(const std::string& listen, std::string& host, int& port) {
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) return false;
    host = listen.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    try {
        port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        return false;
    }
    return !host.empty() && port >= 0 && port <= 65535;
}

int cmd_serve(const CliConfig& config, const std::string& listen, bool allow_remote, const std::string& ui_dir) {
    std::string host;
    int port = 0;
    if (!split_listen(listen, host, port)) throw Error(ErrorCode::InvalidParameter, "--listen expects host:port");

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    DaemonOptions options;
    options.home = config.home;
    options.client_factory = [config] { return make_sync_client(config); };
    if (!ui_dir.empty()) options.ui_dir = ui_dir;
    Daemon daemon(std::move(options));
    int bound = daemon.start(host, port, allow_remote);
    std::cout << "listening on " << host << ":" << bound << "\n" << std::flush;
    int sig = 0;
    sigwait(&signals, &sig);
    daemon.stop();
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"autopass: deterministic site-specific password generator"};
    app.require_subcommand(1);

    VaultParams params;
    bool force = false;
    auto* init = app.add_subcommand("init", "Create a vault with a fresh master secret");
    init->add_option("--kdf-iterations", params.kdf_iterations, "Vault key derivation iterations")->check(CLI::PositiveNumber);
    init->add_option("--inner-iterations", params.inner_iterations, "Hash iterations for stretching")->check(CLI::PositiveNumber);
    init->add_option("--user-constant", params.user_constant, "Non-secret per-user constant");
    init->add_option("--site-labels", params.site_labels, "Host labels kept when normalizing URLs")->check(CLI::PositiveNumber);
    init->add_flag("--force", force, "Overwrite an existing vault");

    AddOptions add_opts;
    auto* add = app.add_subcommand("add", "Register or update a site");
    add->add_option("site", add_opts.site)->required();
    add->add_option("--policy", add_opts.policy, "Policy JSON or path to a JSON file");
    add->add_flag("--use-object", add_opts.use_object, "Require a digital object for this site");
    add->add_flag("--no-user-constant", add_opts.no_user_constant, "Leave the user constant out");
    add->add_option("--user-name", add_opts.user_name, "Account name to mix into derivation");
    add->add_option("--reminder", add_opts.reminder, "Non-secret hint");
    add->add_option("--nonce", add_opts.nonce, "Derivation version nonce");
    add->add_flag("--name", add_opts.site_name, "Treat <site> as a user-chosen site name");

    GenOptions gen_opts;
    auto* gen = app.add_subcommand("gen", "Generate the password for a site");
    gen->add_option("site", gen_opts.site)->required();
    gen->add_option("--object", gen_opts.object_path, "Digital object file");
    auto* out_stdout = gen->add_flag("--stdout", gen_opts.to_stdout, "Print the password (default)");
    auto* out_clip = gen->add_flag("--clip", gen_opts.to_clip, "Copy to the clipboard and clear it later");
    out_stdout->excludes(out_clip);
    gen->add_flag("--name", gen_opts.site_name, "Treat <site> as a user-chosen site name");

    std::string site, object_path;
    bool site_name = false;
    auto* pin = app.add_subcommand("pin", "Make a site generate a chosen password");
    pin->add_option("site", site)->required();
    pin->add_option("--object", object_path, "Digital object file");
    pin->add_flag("--name", site_name, "Treat <site> as a user-chosen site name");

    auto* rotate = app.add_subcommand("rotate", "Change a site password to a random new value");
    rotate->add_option("site", site)->required();
    rotate->add_option("--object", object_path, "Digital object file");
    rotate->add_flag("--name", site_name, "Treat <site> as a user-chosen site name");

    std::optional<std::string> reminder_text;
    auto* reminder = app.add_subcommand("reminder", "Show or set a site reminder");
    reminder->add_option("site", site)->required();
    reminder->add_option("--set", reminder_text, "New reminder text");
    reminder->add_flag("--name", site_name, "Treat <site> as a user-chosen site name");

    auto* list = app.add_subcommand("list", "List registered sites");

    std::string user_id;
    auto* login = app.add_subcommand("login", "Obtain an access token from the sync service");
    login->add_option("user_id", user_id)->required();

    std::string direction;
    auto* sync_cmd = app.add_subcommand("sync", "Synchronize site configuration");
    sync_cmd->add_option("direction", direction)->required()->check(CLI::IsMember({"push", "pull"}));

    std::string policy_action, domain;
    auto* policy = app.add_subcommand("policy", "Password policy records");
    policy->add_option("action", policy_action)->required()->check(CLI::IsMember({"fetch"}));
    policy->add_option("domain", domain)->required();

    std::string listen = "127.0.0.1:7870";
    bool allow_remote = false;
    std::string ui_dir;
    auto* serve = app.add_subcommand("serve", "Run the local daemon for the web UI");
    serve->add_option("--listen", listen, "host:port");
    serve->add_flag("--allow-remote", allow_remote, "Permit a non-loopback address");
    serve->add_option("--ui-dir", ui_dir, "Static UI assets to serve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        const auto config = load_cli_config();
        if (init->parsed()) return cmd_init(config, params, force);
        if (add->parsed()) return cmd_add(config, add_opts);
        if (gen->parsed()) return cmd_gen(config, gen_opts);
        if (pin->parsed()) return cmd_pin(config, site, object_path, site_name);
        if (rotate->parsed()) return cmd_rotate(config, site, object_path, site_name);
        if (reminder->parsed()) return cmd_reminder(config, site, reminder_text, site_name);
        if (list->parsed()) return cmd_list(config);
        if (login->parsed()) return cmd_login(config, user_id);
        if (sync_cmd->parsed()) return cmd_sync(config, direction);
        if (policy->parsed()) return cmd_policy_fetch(config, domain);
        if (serve->parsed()) return cmd_serve(config, listen, allow_remote, ui_dir);
    } catch (const Error& e) {
        std::cerr << "autopass: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "autopass: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace autopass::app
