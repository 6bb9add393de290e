#include "support/local_service.hpp"

#include <autopass/app.hpp>

#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace autopass;
using namespace autopass::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    fs::path home = fs::temp_directory_path() / ("autopass-daemon-" + std::to_string(std::random_device{}()));
    std::shared_ptr<std::int64_t> now = std::make_shared<std::int64_t>(5000);
    std::unique_ptr<Daemon> daemon;

    Fixture() {
        fs::create_directories(home);
        create_vault_file(home, init_vault(UserPassword("daemon-pw"), {1000, 1000, "uc", 2}), false);
        daemon = std::make_unique<Daemon>(DaemonOptions{home, [n = now] { return *n; }, 600, nullptr, std::nullopt});
    }
    ~Fixture() {
        daemon.reset();
        fs::remove_all(home);
    }

    sync::HttpResponse call(std::string_view method, std::string_view path, const json& body = nullptr) {
        return daemon->handle(method, path, body.is_null() ? "" : body.dump());
    }
    void unlock() { REQUIRE(call("POST", "/session", {{"user_password", "daemon-pw"}}).status == 200); }
};

}  // namespace

TEST_CASE("session lifecycle") {
    Fixture f;
    CHECK_FALSE(f.daemon->unlocked());
    auto denied = f.call("POST", "/generate", {{"site", "example.com"}});
    CHECK(denied.status == 401);
    CHECK(denied.body["code"] == "authentication_failed");
    CHECK(denied.body.contains("message"));

    auto wrong = f.call("POST", "/session", {{"user_password", "guess"}});
    CHECK(wrong.status == 401);
    CHECK(wrong.body.dump().find("guess") == std::string::npos);
    CHECK_FALSE(f.daemon->unlocked());

    f.unlock();
    CHECK(f.daemon->unlocked());
    CHECK(f.call("GET", "/sites").status == 200);
    *f.now += 600;
    CHECK(f.call("GET", "/sites").status == 200);  // activity refreshes the idle timer
    *f.now += 601;
    CHECK(f.call("GET", "/sites").status == 401);
    CHECK_FALSE(f.daemon->unlocked());

    f.unlock();
    CHECK(f.call("DELETE", "/session").body["unlocked"] == false);
    CHECK(f.call("GET", "/sites").status == 401);
}

TEST_CASE("generate, pin, rotate, list and reminders") {
    Fixture f;
    f.unlock();
    auto g1 = f.call("POST", "/generate", {{"site", "https://www.example.com/login"}});
    REQUIRE(g1.status == 200);
    CHECK(g1.body["site"] == "example.com");
    const auto pw = g1.body["password"].get<std::string>();
    CHECK(pw.size() == 12);
    CHECK(f.call("POST", "/generate", {{"site", "example.com"}}).body["password"] == pw);
    CHECK(generate_password(load_vault(f.home), UserPassword("daemon-pw"), "example.com").text == pw);

    auto pin = f.call("POST", "/pin", {{"site", "example.com"}, {"desired", "Hunter2-hunt"}});
    CHECK(pin.status == 200);
    CHECK(pin.body["version"] == 2);
    CHECK(f.call("POST", "/generate", {{"site", "example.com"}}).body["password"] == "Hunter2-hunt");
    CHECK(f.call("POST", "/pin", {{"site", "example.com"}, {"desired", "short"}}).status == 422);

    CHECK(f.call("POST", "/rotate", {{"site", "example.com"}}).status == 200);
    CHECK(f.call("POST", "/generate", {{"site", "example.com"}}).body["password"] != "Hunter2-hunt");

    auto vault = load_vault(f.home);
    auto site = vault.sites.at("example.com");
    site.reminder = "the blue one";
    upsert_site(vault, site);
    save_vault(f.home, vault);

    auto list = f.call("GET", "/sites");
    REQUIRE(list.body["sites"].size() == 1);
    CHECK(list.body["sites"][0]["site"] == "example.com");
    CHECK(list.body["sites"][0]["has_offset"] == true);
    CHECK(list.body["sites"][0]["has_reminder"] == true);
    CHECK(list.body["sites"][0]["policy"]["length_min"] == 12);
    CHECK(f.call("GET", "/reminder/example.com").body["reminder"] == "the blue one");
    CHECK(f.call("GET", "/reminder/unknown.org").status == 404);
}

TEST_CASE("request errors") {
    Fixture f;
    f.unlock();
    CHECK(f.daemon->handle("POST", "/generate", "{not json").status == 400);
    CHECK(f.call("POST", "/generate", {{"nothing", 1}}).status == 400);
    CHECK(f.call("POST", "/generate", {{"site", "http://"}}).body["code"] == "invalid_site");
    CHECK(f.call("GET", "/nowhere").status == 404);

    auto vault = load_vault(f.home);
    auto site = new_site_config({"files.org", SiteSource::Url});
    site.input_params.use_object = true;
    upsert_site(vault, site);
    save_vault(f.home, vault);
    CHECK(f.call("POST", "/generate", {{"site", "files.org"}}).body["code"] == "missing_object");
    auto object = f.home / "object.bin";
    std::ofstream(object) << "object content";
    CHECK(f.call("POST", "/generate", {{"site", "files.org"}, {"object_path", object.string()}}).status == 200);
}

TEST_CASE("synced policies apply to newly seen sites") {
    fixtures::LocalService local;
    PasswordPolicy digits;
    digits.length_min = digits.length_max = 6;
    digits.allowed_classes = {CharClass::Digit};
    digits.required_classes = {};
    local.service.put_policy("bank.co", digits);
    Fixture f;
    f.daemon = std::make_unique<Daemon>(DaemonOptions{f.home, sync::system_clock_seconds, 600,
                                                      [&] { return std::make_unique<sync::SyncClient>(local.client()); },
                                                      std::nullopt});
    f.unlock();
    auto pw = f.call("POST", "/generate", {{"site", "login.bank.co"}}).body["password"].get<std::string>();
    CHECK(pw.size() == 6);
    CHECK(pw.find_first_not_of("0123456789") == std::string::npos);
}

TEST_CASE("loopback only unless explicitly allowed") {
    CHECK(is_loopback_host("127.0.0.1"));
    CHECK(is_loopback_host("localhost"));
    CHECK(is_loopback_host("::1"));
    CHECK_FALSE(is_loopback_host("0.0.0.0"));
    CHECK_FALSE(is_loopback_host("192.168.1.2"));

    Fixture f;
    try {
        f.daemon->start("0.0.0.0", 0, false);
        FAIL("non-loopback bind accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidParameter);
    }
    Fixture g;
    int port = g.daemon->start("127.0.0.1", 0, false);
    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/session", json{{"user_password", "daemon-pw"}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Post("/generate", json{{"site", "example.com"}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(json::parse(res->body)["site"] == "example.com");
    g.daemon->stop();
}
