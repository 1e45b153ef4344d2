#include <charconv>

#include <httplib.h>

#include "csi/api.hpp"

namespace csi {

struct HttpServer::Impl {
  ApiService& service;
  httplib::Server server;

  explicit Impl(ApiService& s) : service(s) {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
      Params params(req.params.begin(), req.params.end());
      auto r = service.handle(req.method, req.path, params, req.body);
      res.status = r.status;
      for (const auto& [name, value] : r.headers) res.set_header(name, value);
      res.set_content(std::move(r.body), r.content_type);
    };
    server.set_tcp_nodelay(true);
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Put(".*", dispatch);
    server.Patch(".*", dispatch);
    server.Delete(".*", dispatch);
  }
};

HttpServer::HttpServer(ApiService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0)
    port_ = impl_->server.bind_to_any_port(host);
  else
    port_ = impl_->server.bind_to_port(host, port) ? port : -1;
  if (port_ <= 0) throw Error(Errc::io, "cannot listen on " + host + ":" + std::to_string(port));
  return port_;
}

void HttpServer::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  std::string host = "0.0.0.0";
  std::string_view port_text = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535 ||
      host.empty())
    throw Error(Errc::invalid_argument, "listen address must be host:port, got '" +
                                            std::string(text) + "'");
  return {host, port};
}

}  // namespace csi
