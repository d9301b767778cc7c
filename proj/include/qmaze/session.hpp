#pragma once

// Play sessions: one adaptive maze set per player, a 5x5 fog-of-war view,
// solve-time ingestion and JSON snapshots. Also the scripted bot subject.

#include <array>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmaze/adaptive.hpp"
#include "qmaze/benchmark.hpp"
#include "qmaze/errors.hpp"
#include "qmaze/maze.hpp"
#include "qmaze/qubo.hpp"
#include "qmaze/rng.hpp"
#include "qmaze/sampler.hpp"
#include "qmaze/update_state.hpp"

namespace qmaze {

inline constexpr int kViewRadius = 2;
inline constexpr int kViewSize = 2 * kViewRadius + 1;
inline constexpr int kSmaWindow = 10;

struct SessionParams {
  double lambda1 = 2.0;
  double lambda2 = 2.0;
  double lambda_update1 = 0.15;
  double lambda_update2 = 0.30;
  double a = 0.05;
  AnnealParams anneal = [] {
    AnnealParams p;
    p.reads = 100;
    return p;
  }();
  SamplerKind sampler = SamplerKind::SA;
  bool update_enabled = true;
  int set_size = 30;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw InvalidArgument("penalty weights must be > 0");
    if (lambda_update1 < 0.0 || lambda_update2 < 0.0) throw InvalidArgument("update weights must be >= 0");
    if (!(a > 0.0)) throw InvalidArgument("sigmoid steepness a must be > 0");
    if (set_size < 1) throw InvalidArgument("set_size must be >= 1");
    anneal.validate(sampler == SamplerKind::SQA);
  }
};

enum class ViewCell { Wall, Path, Start, Goal, OutOfBounds };

inline const char* to_string(ViewCell c) {
  switch (c) {
    case ViewCell::Wall: return "wall";
    case ViewCell::Path: return "path";
    case ViewCell::Start: return "start";
    case ViewCell::Goal: return "goal";
    case ViewCell::OutOfBounds: return "out";
  }
  return "?";
}

struct ViewWindow {
  Coord center;
  std::array<std::array<ViewCell, kViewSize>, kViewSize> cells{};
};

inline ViewWindow view_around(const Maze& m, Coord center) {
  ViewWindow v;
  v.center = center;
  for (int dr = -kViewRadius; dr <= kViewRadius; ++dr) {
    for (int dc = -kViewRadius; dc <= kViewRadius; ++dc) {
      Coord c{center.row + dr, center.col + dc};
      ViewCell cell = ViewCell::OutOfBounds;
      if (m.in_bounds(c)) {
        if (c == m.start) cell = ViewCell::Start;
        else if (c == m.goal) cell = ViewCell::Goal;
        else cell = m.at(c) == Cell::Wall ? ViewCell::Wall : ViewCell::Path;
      }
      v.cells[static_cast<std::size_t>(dr + kViewRadius)][static_cast<std::size_t>(dc + kViewRadius)] = cell;
    }
  }
  return v;
}

inline nlohmann::json view_to_json(const ViewWindow& v) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : v.cells) {
    nlohmann::json r = nlohmann::json::array();
    for (auto c : row) r.push_back(to_string(c));
    rows.push_back(r);
  }
  return {{"center", {v.center.row, v.center.col}}, {"cells", rows}};
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "up") return Direction::Up;
  if (s == "right") return Direction::Right;
  if (s == "down") return Direction::Down;
  if (s == "left") return Direction::Left;
  return std::nullopt;
}

struct MoveResult {
  Coord pos;
  bool blocked = false;
  bool reached_goal = false;
};

struct SessionStats {
  std::vector<double> solve_times;
  std::vector<double> sma_series;  // empty until kSmaWindow times exist
  std::vector<int> path_lengths;   // cells on the start-goal path, per issued maze
  std::vector<int> fallback_levels;
  int maze_index = 0;
  int updates = 0;
  bool complete = false;
};

inline nlohmann::json stats_to_json(const SessionStats& s) {
  return {{"solve_times", s.solve_times},   {"sma_series", s.sma_series},
          {"path_lengths", s.path_lengths}, {"fallback_levels", s.fallback_levels},
          {"maze_index", s.maze_index},     {"updates", s.updates},
          {"complete", s.complete}};
}

struct SubmitResult {
  bool set_complete = false;
  int maze_index = 0;
  SessionStats stats;  // filled when the set is complete
};

inline double wall_clock_now() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

/// One player's run through a maze set. maze_index is the 0-based index of
/// the maze being played; each accepted result before the last performs
/// exactly one update, so `updates == maze_index` in the update arm.
class Session {
 public:
  static Session create(std::string id, int n, SessionParams params) {
    if (n < 1) throw InvalidArgument("maze size n must be >= 1");
    params.validate();
    Session s;
    s.id_ = std::move(id);
    s.n_ = n;
    s.params_ = params;
    s.state_ = init_update_state(n, params.a, params.lambda_update1, params.lambda_update2, params.seed);
    s.issue_maze();
    return s;
  }

  const std::string& id() const { return id_; }
  int n() const { return n_; }
  const SessionParams& params() const { return params_; }
  const UpdateState& update_state() const { return state_; }
  const Maze& current_maze() const { return maze_; }
  Coord player() const { return player_; }
  int maze_index() const { return maze_index_; }
  int updates() const { return updates_; }
  bool reached_goal() const { return reached_goal_; }
  bool complete() const { return complete_; }
  std::optional<double> view_started_at() const { return view_started_at_; }

  /// Window around the player. The first call for a maze stamps the time
  /// the player first saw it.
  ViewWindow view(double now = wall_clock_now()) {
    if (!view_started_at_) view_started_at_ = now;
    return view_around(maze_, player_);
  }

  /// `seq`, when given, makes retries idempotent: repeating the last
  /// sequence number returns the previous result without moving again.
  MoveResult move(Direction d, std::optional<std::int64_t> seq = std::nullopt) {
    if (seq && last_move_seq_ && *seq == *last_move_seq_) return last_move_;
    if (complete_) throw StateError("set is complete");
    if (reached_goal_) throw StateError("goal already reached; submit the result");
    MoveResult r;
    const Coord target = player_ + step(d);
    if (maze_.is_path(target)) {
      player_ = target;
    } else {
      r.blocked = true;
    }
    reached_goal_ = player_ == maze_.goal;
    r.pos = player_;
    r.reached_goal = reached_goal_;
    if (seq) {
      last_move_seq_ = seq;
      last_move_ = r;
    }
    return r;
  }

  SubmitResult submit(double solve_time, bool give_up = false, double now = wall_clock_now()) {
    if (complete_) throw StateError("set is complete");
    if (solve_time < 0.0 || std::isnan(solve_time)) throw NegativeTime("solve time must be >= 0");
    if (!reached_goal_ && !give_up) throw StateError("maze not finished; reach the goal or give up");
    solve_times_.push_back(solve_time);
    SubmitResult out;
    if (maze_index_ + 1 >= params_.set_size) {
      complete_ = true;
      out.set_complete = true;
      out.maze_index = maze_index_;
      out.stats = stats();
      return out;
    }
    if (params_.update_enabled) {
      state_ = update(state_, solve_time,
                      derive_seed(params_.seed, {stream::kUpdateRandom, static_cast<std::uint64_t>(maze_index_)}),
                      now);
      ++updates_;
    }
    ++maze_index_;
    issue_maze();
    out.maze_index = maze_index_;
    return out;
  }

  SessionStats stats() const {
    SessionStats s;
    s.solve_times = solve_times_;
    if (static_cast<int>(solve_times_.size()) >= kSmaWindow) s.sma_series = sma_increase_rate(solve_times_, kSmaWindow);
    s.path_lengths = path_lengths_;
    s.fallback_levels = fallback_levels_;
    s.maze_index = maze_index_;
    s.updates = updates_;
    s.complete = complete_;
    return s;
  }

  nlohmann::json to_json() const;
  static Session from_json(const nlohmann::json& j);

 private:
  void issue_maze() {
    AnnealParams p = params_.anneal;
    p.seed = derive_seed(params_.seed, {stream::kAnneal, static_cast<std::uint64_t>(maze_index_)});
    const auto base = build_base_qubo(n_, params_.lambda1, params_.lambda2);
    GeneratedMaze g;
    if (params_.update_enabled) {
      g = next_maze(state_, base, p, params_.sampler);
    } else {
      try {
        g = generate_from_qubo(base, p, params_.sampler);
      } catch (const NotFound&) {
        throw Unreachable("base QUBO produced no feasible sample; increase sweeps or reads");
      }
    }
    if (!validate_perfect(g.maze).is_perfect) throw Error("generated maze is not perfect");
    maze_ = std::move(g.maze);
    player_ = maze_.start;
    reached_goal_ = false;
    view_started_at_.reset();
    last_move_seq_.reset();
    fallback_levels_.push_back(g.fallback_level);
    path_lengths_.push_back(static_cast<int>(solve_shortest_path(maze_).size()));
  }

  std::string id_;
  int n_ = 0;
  SessionParams params_;
  UpdateState state_;
  Maze maze_;
  Coord player_;
  int maze_index_ = 0;
  int updates_ = 0;
  bool reached_goal_ = false;
  bool complete_ = false;
  std::vector<double> solve_times_;
  std::vector<int> fallback_levels_;
  std::vector<int> path_lengths_;
  std::optional<double> view_started_at_;
  std::optional<std::int64_t> last_move_seq_;
  MoveResult last_move_;
};

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json params_to_json(const SessionParams& p) {
  return {{"lambda1", p.lambda1},
          {"lambda2", p.lambda2},
          {"lambda_update1", p.lambda_update1},
          {"lambda_update2", p.lambda_update2},
          {"a", p.a},
          {"update_enabled", p.update_enabled},
          {"set_size", p.set_size},
          {"sampler", p.sampler == SamplerKind::SQA ? "sqa" : "sa"},
          {"seed", p.seed},
          {"anneal",
           {{"sweeps", p.anneal.sweeps},
            {"reads", p.anneal.reads},
            {"beta_min", p.anneal.beta_min},
            {"beta_max", p.anneal.beta_max},
            {"interpolation", p.anneal.interpolation == Interpolation::Linear ? "linear" : "geometric"},
            {"trotter_slices", p.anneal.trotter_slices},
            {"gamma_max", p.anneal.gamma_max},
            {"gamma_min", p.anneal.gamma_min}}}};
}

/// Missing keys keep their defaults, so request bodies may be partial.
inline SessionParams params_from_json(const nlohmann::json& j) {
  SessionParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ParseError("params must be a JSON object");
  try {
    p.lambda1 = j.value("lambda1", p.lambda1);
    p.lambda2 = j.value("lambda2", p.lambda2);
    p.lambda_update1 = j.value("lambda_update1", p.lambda_update1);
    p.lambda_update2 = j.value("lambda_update2", p.lambda_update2);
    p.a = j.value("a", p.a);
    p.update_enabled = j.value("update_enabled", p.update_enabled);
    p.set_size = j.value("set_size", p.set_size);
    p.seed = j.value("seed", p.seed);
    const auto sampler = j.value("sampler", std::string("sa"));
    if (sampler == "sa") p.sampler = SamplerKind::SA;
    else if (sampler == "sqa") p.sampler = SamplerKind::SQA;
    else throw ParseError("sampler must be 'sa' or 'sqa'");
    if (j.contains("anneal")) {
      const auto& a = j.at("anneal");
      p.anneal.sweeps = a.value("sweeps", p.anneal.sweeps);
      p.anneal.reads = a.value("reads", p.anneal.reads);
      p.anneal.beta_min = a.value("beta_min", p.anneal.beta_min);
      p.anneal.beta_max = a.value("beta_max", p.anneal.beta_max);
      const auto interp = a.value("interpolation", std::string("geometric"));
      if (interp == "linear") p.anneal.interpolation = Interpolation::Linear;
      else if (interp == "geometric") p.anneal.interpolation = Interpolation::Geometric;
      else throw ParseError("interpolation must be 'linear' or 'geometric'");
      p.anneal.trotter_slices = a.value("trotter_slices", p.anneal.trotter_slices);
      p.anneal.gamma_max = a.value("gamma_max", p.anneal.gamma_max);
      p.anneal.gamma_min = a.value("gamma_min", p.anneal.gamma_min);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed params: ") + e.what());
  }
  return p;
}

inline nlohmann::json Session::to_json() const {
  nlohmann::json j = {{"id", id_},
                      {"n", n_},
                      {"params", params_to_json(params_)},
                      {"update_state", update_state_to_json(state_)},
                      {"maze", maze_to_json(maze_)},
                      {"player", {player_.row, player_.col}},
                      {"maze_index", maze_index_},
                      {"updates", updates_},
                      {"reached_goal", reached_goal_},
                      {"complete", complete_},
                      {"solve_times", solve_times_},
                      {"fallback_levels", fallback_levels_},
                      {"path_lengths", path_lengths_},
                      {"view_started_at", view_started_at_ ? nlohmann::json(*view_started_at_) : nlohmann::json()},
                      {"last_move", nullptr}};
  if (last_move_seq_) {
    j["last_move"] = {{"seq", *last_move_seq_},
                      {"pos", {last_move_.pos.row, last_move_.pos.col}},
                      {"blocked", last_move_.blocked},
                      {"reached_goal", last_move_.reached_goal}};
  }
  return j;
}

inline Session Session::from_json(const nlohmann::json& j) {
  try {
    Session s;
    s.id_ = j.at("id").get<std::string>();
    s.n_ = j.at("n").get<int>();
    s.params_ = params_from_json(j.at("params"));
    s.state_ = update_state_from_json(j.at("update_state"));
    s.maze_ = maze_from_json(j.at("maze"));
    s.player_ = {j.at("player").at(0).get<int>(), j.at("player").at(1).get<int>()};
    s.maze_index_ = j.at("maze_index").get<int>();
    s.updates_ = j.at("updates").get<int>();
    s.reached_goal_ = j.at("reached_goal").get<bool>();
    s.complete_ = j.at("complete").get<bool>();
    s.solve_times_ = j.at("solve_times").get<std::vector<double>>();
    s.fallback_levels_ = j.at("fallback_levels").get<std::vector<int>>();
    s.path_lengths_ = j.at("path_lengths").get<std::vector<int>>();
    if (!j.at("view_started_at").is_null()) s.view_started_at_ = j.at("view_started_at").get<double>();
    if (const auto& lm = j.at("last_move"); !lm.is_null()) {
      s.last_move_seq_ = lm.at("seq").get<std::int64_t>();
      s.last_move_.pos = {lm.at("pos").at(0).get<int>(), lm.at("pos").at(1).get<int>()};
      s.last_move_.blocked = lm.at("blocked").get<bool>();
      s.last_move_.reached_goal = lm.at("reached_goal").get<bool>();
    }
    if (s.state_.n != s.n_ || s.maze_.n() != s.n_) throw ParseError("session parts disagree on n");
    if (!s.maze_.is_path(s.player_)) throw ParseError("player is not on a path cell");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed session JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Store

/// Thread-safe registry of sessions. Each session has its own mutex so
/// requests against one session are serialized while different sessions
/// proceed in parallel. With a data directory, every mutation is written
/// to <dir>/<id>.json and unknown ids are looked up on disk.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt,
                        std::uint64_t id_seed = std::random_device{}())
      : data_dir_(std::move(data_dir)), id_rng_(id_seed) {
    if (data_dir_) std::filesystem::create_directories(*data_dir_);
  }

  std::string create(int n, const SessionParams& params) {
    auto id = fresh_id();
    auto entry = std::make_shared<Entry>(Session::create(id, n, params));
    {
      std::lock_guard lock(entry->mutex);
      persist(entry->session);
    }
    std::lock_guard lock(mutex_);
    sessions_.emplace(id, std::move(entry));
    return id;
  }

  /// Runs `fn` on the session under its lock; persists afterwards when
  /// `mutating`. Throws NotFound for unknown ids.
  template <typename Fn>
  auto with_session(const std::string& id, bool mutating, Fn&& fn) {
    auto entry = lookup(id);
    std::lock_guard lock(entry->mutex);
    if constexpr (std::is_void_v<decltype(fn(entry->session))>) {
      fn(entry->session);
      if (mutating) persist(entry->session);
    } else {
      auto result = fn(entry->session);
      if (mutating) persist(entry->session);
      return result;
    }
  }

  std::optional<std::filesystem::path> snapshot_path(const std::string& id) const {
    if (!data_dir_) return std::nullopt;
    return *data_dir_ / (id + ".json");
  }

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    std::mutex mutex;
    Session session;
  };

  static bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id)
      if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
  }

  std::string fresh_id() {
    std::lock_guard lock(mutex_);
    static constexpr char kHex[] = "0123456789abcdef";
    while (true) {
      std::uint64_t v = id_rng_();
      std::string id(16, '0');
      for (int k = 15; k >= 0; --k, v >>= 4) id[static_cast<std::size_t>(k)] = kHex[v & 0xF];
      if (!sessions_.count(id) && !(data_dir_ && std::filesystem::exists(*data_dir_ / (id + ".json")))) return id;
    }
  }

  std::shared_ptr<Entry> lookup(const std::string& id) {
    if (!valid_id(id)) throw NotFound("unknown session '" + id + "'");
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
    if (data_dir_) {
      const auto path = *data_dir_ / (id + ".json");
      if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        auto entry = std::make_shared<Entry>(Session::from_json(nlohmann::json::parse(in)));
        sessions_.emplace(id, entry);
        return entry;
      }
    }
    throw NotFound("unknown session '" + id + "'");
  }

  void persist(const Session& s) const {
    if (!data_dir_) return;
    const auto path = *data_dir_ / (s.id() + ".json");
    const auto tmp = *data_dir_ / (s.id() + ".json.tmp");
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << s.to_json().dump();
      if (!out) throw Error("failed to write session snapshot " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  std::optional<std::filesystem::path> data_dir_;
  std::mutex mutex_;
  std::mt19937_64 id_rng_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// ---------------------------------------------------------------------------
// Scripted bot subject

/// Solve time = per_cell * moves + N(0, sigma), clipped below at min_time.
struct BotProfile {
  double per_cell = 0.1;
  double sigma = 0.5;
  double min_time = 0.1;
};

struct BotStats {
  std::vector<double> solve_times;
  std::vector<int> path_lengths;
  std::vector<double> sma_series;
  std::map<int, int> fallback_counts;
  int mazes = 0;
  int updates = 0;
  bool all_valid = true;
};

inline nlohmann::json bot_stats_to_json(const BotStats& s) {
  nlohmann::json fb = nlohmann::json::object();
  for (const auto& [level, count] : s.fallback_counts) fb[std::to_string(level)] = count;
  return {{"mazes", s.mazes},           {"updates", s.updates},       {"all_valid", s.all_valid},
          {"solve_times", s.solve_times}, {"path_lengths", s.path_lengths}, {"sma_series", s.sma_series},
          {"fallback_counts", fb}};
}

/// Plays a whole set headlessly: walks the shortest path move by move and
/// reports a solve time drawn from the profile.
inline BotStats run_bot_set(int n, SessionParams params, const BotProfile& profile, std::uint64_t seed) {
  if (profile.per_cell < 0.0 || profile.sigma < 0.0 || profile.min_time < 0.0)
    throw InvalidArgument("bot profile values must be >= 0");
  params.seed = seed;
  Session s = Session::create("bot", n, params);
  auto rng = make_rng(seed, {stream::kBot});
  std::normal_distribution<double> noise(0.0, 1.0);
  BotStats out;
  while (true) {
    const Maze& m = s.current_maze();
    if (!validate_perfect(m).is_perfect) out.all_valid = false;
    const auto path = solve_shortest_path(m);
    s.view(0.0);
    MoveResult last;
    for (std::size_t k = 1; k < path.size(); ++k) {
      const Coord delta{path[k].row - path[k - 1].row, path[k].col - path[k - 1].col};
      Direction d = Direction::Up;
      for (auto cand : kAllDirections)
        if (step(cand) == delta) d = cand;
      last = s.move(d);
    }
    if (!last.reached_goal) throw Error("bot failed to reach the goal");
    const int moves = static_cast<int>(path.size()) - 1;
    const double draw = noise(rng);
    const double t = std::max(profile.min_time, profile.per_cell * moves + profile.sigma * draw);
    out.path_lengths.push_back(static_cast<int>(path.size()));
    const auto r = s.submit(t, false, 0.0);
    if (r.set_complete) break;
  }
  const auto st = s.stats();
  out.solve_times = st.solve_times;
  out.sma_series = st.sma_series;
  out.mazes = static_cast<int>(st.solve_times.size());
  out.updates = st.updates;
  for (int level : st.fallback_levels) ++out.fallback_counts[level];
  return out;
}

}  // namespace qmaze
