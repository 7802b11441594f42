#include "zkwf/bridge.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

namespace zkwf {

using nlohmann::json;

json describe_state(const StatementDescriptor& d, const ProcessState& s, const PublicKey* viewer) {
  json elements = json::array();
  for (std::size_t t = 0; t < d.index.size(); ++t) {
    const auto& e = d.index[t];
    json item{{"id", e.id}, {"kind", std::string(to_string(e.kind))}, {"state", s.v[t]}, {"owner", e.owner.hex()}};
    if (viewer) item["mine"] = e.owner == *viewer;
    elements.push_back(item);
  }
  json vars = json::object();
  for (std::size_t k = 0; k < d.variables.size(); ++k) vars[d.variables[k]] = s.vars[k];
  json messages = json::array();
  for (std::size_t m = 0; m < d.msgSlots.size(); ++m) {
    messages.push_back({{"slot", m},
                        {"throw", d.index[d.msgSlots[m].throwIndex].id},
                        {"catch", d.index[d.msgSlots[m].catchIndex].id},
                        {"sent", !s.msgHashes[m].is_zero()},
                        {"hash", s.msgHashes[m].hex()}});
  }
  return {{"elements", elements}, {"variables", vars}, {"messages", messages}};
}

StepAction step_action_from_json(const json& body) {
  const std::string kind = body.value("action", "");
  if (kind == "fake") return StepAction::fake();
  if (kind == "start") return StepAction::start(body.at("element").get<std::string>());
  if (kind != "complete") throw std::invalid_argument("action must be complete, start or fake");
  StepAction a = StepAction::complete(body.at("element").get<std::string>());
  if (body.contains("set")) {
    for (const auto& [name, value] : body["set"].items()) a.writes[name] = value.get<std::int64_t>();
  }
  if (body.contains("message")) {
    auto text = body["message"].get<std::string>();
    a.message = Bytes(text.begin(), text.end());
  } else if (body.contains("messageHex")) {
    a.message = from_hex(body["messageHex"].get<std::string>());
  }
  if (body.contains("branch")) a.branch = body["branch"].get<std::string>();
  return a;
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"code", code}, {"message", message}});
}

}  // namespace

struct BridgeServer::Impl {
  ParticipantEngine& engine;
  std::string instanceId;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};
  std::mutex stepMu;  // one proposal at a time per engine

  Impl(ParticipantEngine& e, std::string id) : engine(e), instanceId(std::move(id)) { routes(); }

  template <typename F>
  auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const CongruenceViolation& e) {
        json body{{"code", "CONGRUENCE_VIOLATION"}, {"message", e.what()}, {"seq", e.seq()}};
        body["signer"] = e.signer() ? json(e.signer()->hex()) : json(nullptr);
        reply(res, 409, body);
      } catch (const ConnectionError& e) {
        reply_error(res, 502, e.code(), e.what());
      } catch (const LedgerError& e) {
        reply_error(res, 502, e.code(), e.what());
      } catch (const std::exception& e) {
        reply_error(res, 400, "BAD_REQUEST", e.what());
      }
    };
  }

  void routes() {
    server.Get("/bridge/state", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto synced = engine.sync(instanceId);
      json body = describe_state(engine.descriptor(), synced.state, &engine.public_key());
      body["instanceId"] = instanceId;
      body["seq"] = synced.seq;
      body["h_current"] = synced.record.h_current.hex();
      body["participant"] = engine.public_key().hex();
      body["owned"] = engine.owned_elements();
      reply(res, 200, body);
    }));

    server.Post("/bridge/step", guarded([this](const httplib::Request& req, httplib::Response& res) {
      StepAction action = step_action_from_json(json::parse(req.body));
      std::lock_guard lock(stepMu);
      try {
        auto out = engine.step(instanceId, action);
        json body{{"accepted", out.accepted}, {"h_new", out.tx->h_new.hex()}};
        if (out.accepted) {
          body["seq"] = *out.seq;
          reply(res, 200, body);
        } else {
          body["code"] = "LEDGER_REJECTED";
          body["message"] = out.message;
          reply(res, 409, body);
        }
      } catch (const ProposeError& e) {
        reply(res, 422, {{"accepted", false}, {"code", "PROPOSE_ERROR"}, {"message", e.what()}});
      } catch (const StatementRefused& e) {
        reply(res, 403, {{"accepted", false}, {"code", std::string(to_string(e.reason()))}, {"message", e.what()}});
      } catch (const RingModeActive& e) {
        reply(res, 423, {{"accepted", false}, {"code", "RING_MODE"}, {"message", e.what()}});
      }
    }));

    server.Get("/bridge/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t from = req.has_param("from") ? std::stoull(req.get_param_value("from")) : 0;
      if (req.has_header("Last-Event-ID")) from = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
      auto sub = std::make_shared<Subscription>(engine.ledger(), instanceId, from);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, sub](std::size_t, httplib::DataSink& sink) {
        if (stopping) return false;
        std::optional<HistoryEntry> e;
        try {
          e = sub->next(std::chrono::milliseconds(500));
        } catch (const std::exception&) {
          return false;
        }
        if (!e) {
          const std::string ping = ": keep-alive\n\n";
          return sink.write(ping.data(), ping.size());
        }
        json data{{"seq", e->seq},
                  {"h", e->record.h_current.hex()},
                  {"logicalTime", e->logicalTime},
                  {"wallClockMs", e->wallClockMs}};
        std::string msg = "id: " + std::to_string(e->seq) + "\nevent: update\ndata: " + data.dump() + "\n\n";
        return sink.write(msg.data(), msg.size());
      });
    }));
  }
};

BridgeServer::BridgeServer(ParticipantEngine& engine, std::string instanceId)
    : impl_(std::make_unique<Impl>(engine, std::move(instanceId))) {}

BridgeServer::~BridgeServer() { stop(); }

int BridgeServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind bridge to " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void BridgeServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void BridgeServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace zkwf
