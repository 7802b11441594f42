#include <atomic>
#include <thread>

#include <httplib.h>

#include "zkwf/ledger.hpp"

namespace zkwf {

namespace {

using nlohmann::json;

constexpr std::int64_t kMaxWaitMs = 5000;

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"code", code}, {"message", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json history_json(const std::vector<HistoryEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) arr.push_back(to_json(e));
  return {{"entries", arr}};
}

std::uint64_t query_u64(const httplib::Request& req, const char* name, std::uint64_t fallback) {
  if (!req.has_param(name)) return fallback;
  return std::stoull(req.get_param_value(name));
}

}  // namespace

struct LedgerServer::Impl {
  Ledger& ledger;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  explicit Impl(Ledger& l) : ledger(l) { routes(); }

  // Runs a handler, mapping exceptions to {code, message} bodies.
  template <typename F>
  auto guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const LedgerError& e) {
        send_error(res, e.code() == "UNKNOWN_INSTANCE" ? 404 : 500, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, 400, "BAD_REQUEST", e.what());
      }
    };
  }

  void routes() {
    server.Post("/instances", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body);
      VerifierKey vk{parse_key(from_hex(body.at("vk").get<std::string>()))};
      auto digest = Digest::from_hex(body.at("descriptorDigest").get<std::string>());
      auto id = ledger.deploy(vk, digest, record_from_json(body.at("genesis")));
      send_json(res, {{"instanceId", id}}, 201);
    }));
    server.Get("/instances/:id/state", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, to_json(ledger.get_state(req.path_params.at("id"))));
    }));
    server.Get("/instances/:id/history", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto& id = req.path_params.at("id");
      const auto from = query_u64(req, "from", 0);
      const auto wait = std::min<std::int64_t>(static_cast<std::int64_t>(query_u64(req, "wait", 0)), kMaxWaitMs);
      auto entries = wait > 0 ? ledger.wait_history(id, from, std::chrono::milliseconds(wait))
                              : ledger.get_history(id, from);
      send_json(res, history_json(entries));
    }));
    server.Post("/instances/:id/updates", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto result = ledger.submit_update(req.path_params.at("id"), tx_from_json(json::parse(req.body)));
      if (result.accepted) {
        send_json(res, {{"accepted", true}, {"seq", result.seq}});
      } else {
        send_json(res, {{"accepted", false}, {"code", "REJECTED"}, {"message", result.message}}, 409);
      }
    }));
    server.Get("/instances/:id/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      std::uint64_t from = query_u64(req, "from", 0);
      if (req.has_header("Last-Event-ID")) from = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
      auto sub = std::shared_ptr<Subscription>(ledger.subscribe(id, from));
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, sub](std::size_t, httplib::DataSink& sink) {
        if (stopping) return false;
        auto e = sub->next(std::chrono::milliseconds(500));
        if (!e) {
          const std::string ping = ": keep-alive\n\n";
          return sink.write(ping.data(), ping.size());
        }
        std::string msg = "id: " + std::to_string(e->seq) + "\nevent: update\ndata: " + to_json(*e).dump() + "\n\n";
        return sink.write(msg.data(), msg.size());
      });
    }));
  }
};

LedgerServer::LedgerServer(Ledger& ledger) : impl_(std::make_unique<Impl>(ledger)) {}

LedgerServer::~LedgerServer() { stop(); }

int LedgerServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw LedgerError("IO", "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void LedgerServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw LedgerError("IO", "cannot listen on " + host + ":" + std::to_string(port));
}

void LedgerServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

struct HttpLedgerClient::Impl {
  std::string url;

  httplib::Client client(std::chrono::seconds readTimeout = std::chrono::seconds(30)) const {
    httplib::Client c(url);
    c.set_connection_timeout(std::chrono::seconds(5));
    c.set_read_timeout(readTimeout);
    return c;
  }

  static json body_or_throw(const httplib::Result& r, std::initializer_list<int> ok) {
    if (!r) throw ConnectionError("ledger unreachable: " + httplib::to_string(r.error()));
    json body = r->body.empty() ? json::object() : json::parse(r->body);
    for (int s : ok) {
      if (r->status == s) return body;
    }
    throw LedgerError(body.value("code", "HTTP_" + std::to_string(r->status)), body.value("message", r->body));
  }
};

HttpLedgerClient::HttpLedgerClient(const std::string& url) : impl_(std::make_unique<Impl>()) {
  impl_->url = url;
  while (!impl_->url.empty() && impl_->url.back() == '/') impl_->url.pop_back();
  if (impl_->url.rfind("http://", 0) != 0) throw ConnectionError("unsupported ledger URL: " + url);
}

HttpLedgerClient::~HttpLedgerClient() = default;

std::string HttpLedgerClient::deploy(const VerifierKey& vk, const Digest& descriptorDigest,
                                     const CommitmentRecord& genesis) {
  json body{{"vk", to_hex(serialize_key(vk))}, {"descriptorDigest", descriptorDigest.hex()}, {"genesis", to_json(genesis)}};
  auto r = impl_->client().Post("/instances", body.dump(), "application/json");
  return Impl::body_or_throw(r, {201}).at("instanceId").get<std::string>();
}

SubmitResult HttpLedgerClient::submit_update(const std::string& instanceId, const UpdateTx& tx) {
  auto r = impl_->client().Post("/instances/" + instanceId + "/updates", to_json(tx).dump(), "application/json");
  auto body = Impl::body_or_throw(r, {200, 409});
  if (body.value("accepted", false)) return {true, body.at("seq").get<std::uint64_t>(), "accepted"};
  return {false, 0, body.value("message", "rejected")};
}

CommitmentRecord HttpLedgerClient::get_state(const std::string& instanceId) {
  auto r = impl_->client().Get("/instances/" + instanceId + "/state");
  return record_from_json(Impl::body_or_throw(r, {200}));
}

std::vector<HistoryEntry> HttpLedgerClient::get_history(const std::string& instanceId, std::uint64_t from) {
  auto r = impl_->client().Get("/instances/" + instanceId + "/history?from=" + std::to_string(from));
  const json body = Impl::body_or_throw(r, {200});
  std::vector<HistoryEntry> out;
  for (const auto& e : body.at("entries")) out.push_back(entry_from_json(e));
  return out;
}

std::vector<HistoryEntry> HttpLedgerClient::wait_history(const std::string& instanceId, std::uint64_t from,
                                                         std::chrono::milliseconds timeout) {
  const auto wait = std::min<std::int64_t>(timeout.count(), kMaxWaitMs);
  auto r = impl_->client().Get("/instances/" + instanceId + "/history?from=" + std::to_string(from) +
                               "&wait=" + std::to_string(wait));
  const json body = Impl::body_or_throw(r, {200});
  std::vector<HistoryEntry> out;
  for (const auto& e : body.at("entries")) out.push_back(entry_from_json(e));
  return out;
}

}  // namespace zkwf
