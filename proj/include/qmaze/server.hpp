#pragma once

// HTTP+JSON front end for SessionStore.
//
//   POST /sessions               {"n": 9, "params": {...}}      -> {"id": ...}
//   GET  /sessions/{id}/view                                    -> 5x5 window
//   POST /sessions/{id}/move     {"dir": "up", "seq": 3}        -> {pos, blocked, reached_goal}
//   POST /sessions/{id}/result   {"solve_time_s": 12.5}         -> next maze or set complete
//   GET  /sessions/{id}/stats                                   -> solve times + SMA series
//   GET  /healthz

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

// session.hpp pulls in Eigen, which must precede httplib: <resolv.h>
// defines a `_res` macro that collides with Eigen parameter names.
#include "qmaze/errors.hpp"
#include "qmaze/session.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace qmaze {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> data_dir;
};

/// Parses "host:port"; a bare port binds to 127.0.0.1.
inline std::pair<std::string, int> parse_bind_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : addr.substr(0, colon);
  const std::string port = colon == std::string::npos ? addr : addr.substr(colon + 1);
  int p = 0;
  try {
    std::size_t used = 0;
    p = std::stoi(port, &used);
    if (used != port.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw InvalidArgument("invalid bind address '" + addr + "'");
  }
  if (p < 0 || p > 65535) throw InvalidArgument("port out of range in '" + addr + "'");
  if (host.empty()) host = "0.0.0.0";
  return {host, p};
}

/// Reads QMAZE_ADDR and QMAZE_DATA_DIR over the defaults.
inline ServerConfig server_config_from_env(ServerConfig cfg = {}) {
  if (const char* addr = std::getenv("QMAZE_ADDR"); addr && *addr) {
    auto [h, p] = parse_bind_address(addr);
    cfg.host = h;
    cfg.port = p;
  }
  if (const char* dir = std::getenv("QMAZE_DATA_DIR"); dir && *dir) cfg.data_dir = dir;
  return cfg;
}

class SessionServer {
 public:
  explicit SessionServer(std::optional<std::filesystem::path> data_dir = std::nullopt)
      : store_(std::move(data_dir)) {
    routes();
  }

  SessionStore& store() { return store_; }
  httplib::Server& http() { return http_; }

  /// Binds and blocks until stop().
  bool listen(const std::string& host, int port) { return http_.listen(host, port); }
  int bind_any_port(const std::string& host) { return http_.bind_to_any_port(host); }
  bool listen_after_bind() { return http_.listen_after_bind(); }
  void stop() { http_.stop(); }
  void wait_until_ready() { http_.wait_until_ready(); }

 private:
  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("request body is not JSON: ") + e.what());
    }
  }

  template <typename Fn>
  static httplib::Server::Handler guarded(Fn fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const NotFound& e) {
        reply(res, 404, {{"error", e.what()}});
      } catch (const InvalidArgument& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const ParseError& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const StateError& e) {
        reply(res, 409, {{"error", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  }

  void routes() {
    http_.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}});
    }));

    http_.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      if (!body.is_object() || !body.contains("n") || !body.at("n").is_number_integer())
        throw InvalidArgument("body must contain integer 'n'");
      const int n = body.at("n").get<int>();
      const auto params = params_from_json(body.value("params", nlohmann::json()));
      const auto id = store_.create(n, params);
      reply(res, 201, {{"id", id}});
    }));

    http_.Get(R"(/sessions/([0-9a-fA-F]+)/view)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto body = store_.with_session(id, true, [](Session& s) {
        if (s.complete()) throw StateError("set is complete");
        auto j = view_to_json(s.view());
        j["maze_index"] = s.maze_index();
        j["set_size"] = s.params().set_size;
        j["reached_goal"] = s.reached_goal();
        return j;
      });
      reply(res, 200, body);
    }));

    http_.Post(R"(/sessions/([0-9a-fA-F]+)/move)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const auto body = parse_body(req);
      const auto dir = parse_direction(body.value("dir", std::string()));
      if (!dir) throw InvalidArgument("dir must be one of up, right, down, left");
      std::optional<std::int64_t> seq;
      if (body.contains("seq")) {
        if (!body.at("seq").is_number_integer()) throw InvalidArgument("seq must be an integer");
        seq = body.at("seq").get<std::int64_t>();
      }
      auto out = store_.with_session(id, true, [&](Session& s) {
        const auto r = s.move(*dir, seq);
        return nlohmann::json{{"pos", {r.pos.row, r.pos.col}}, {"blocked", r.blocked}, {"reached_goal", r.reached_goal}};
      });
      reply(res, 200, out);
    }));

    http_.Post(R"(/sessions/([0-9a-fA-F]+)/result)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const auto body = parse_body(req);
      if (!body.contains("solve_time_s") || !body.at("solve_time_s").is_number())
        throw InvalidArgument("body must contain numeric solve_time_s");
      const double t = body.at("solve_time_s").get<double>();
      const bool give_up = body.value("give_up", false);
      auto out = store_.with_session(id, true, [&](Session& s) {
        const auto r = s.submit(t, give_up);
        if (r.set_complete) return nlohmann::json{{"status", "complete"}, {"stats", stats_to_json(r.stats)}};
        return nlohmann::json{{"status", "next"}, {"maze_index", r.maze_index}};
      });
      reply(res, 200, out);
    }));

    http_.Get(R"(/sessions/([0-9a-fA-F]+)/stats)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto out = store_.with_session(id, false, [](Session& s) { return stats_to_json(s.stats()); });
      reply(res, 200, out);
    }));
  }

  SessionStore store_;
  httplib::Server http_;
};

}  // namespace qmaze
