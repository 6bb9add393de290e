#include <autopass/error.hpp>
#include <autopass/sync.hpp>

#include <httplib.h>

namespace autopass::sync {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
}

json parse_body(const httplib::Request& req) {
    auto j = json::parse(req.body, nullptr, false);
    return j.is_discarded() ? json() : j;
}

}  // namespace

SyncHttpServer::SyncHttpServer(SyncService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& s = *server_;
    s.Get(R"(/v1/policies/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, service_.get_policy(req.matches[1]));
    });
    s.Post("/v1/login", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, service_.login(parse_body(req)));
    });
    s.Get(R"(/v1/user/([^/]+)/sites)", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, service_.get_user_sites(req.matches[1], req.get_header_value("Authorization")));
    });
    s.Put(R"(/v1/user/([^/]+)/sites)", [this](const httplib::Request& req, httplib::Response& res) {
        reply(res, service_.put_user_sites(req.matches[1], req.get_header_value("Authorization"), parse_body(req)));
    });
    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        reply(res, error_response(500, "internal", "internal error"));
    });
}

SyncHttpServer::~SyncHttpServer() { stop(); }

int SyncHttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void SyncHttpServer::listen_blocking() { server_->listen_after_bind(); }

int SyncHttpServer::start(const std::string& host, int port) {
    int bound = bind(host, port);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void SyncHttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace autopass::sync
