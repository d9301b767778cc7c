#pragma once

// Grid geometry, the three classical generators, perfect-maze validation,
// shortest paths and text/JSON I/O.
//
// Layout for a maze built from an N x N lattice of bars:
//   side = 2N + 3, outer ring (row/col 0 and 2N+2) is wall,
//   bar (i, j)            -> cell (2i+2, 2j+2),   i, j in [0, N)
//   start/goal candidate  -> cell (2m+1, 2n+1),   m, n in [0, N]

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmaze/errors.hpp"
#include "qmaze/rng.hpp"

namespace qmaze {

struct Coord {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

enum class Cell : std::uint8_t { Wall, Path };

enum class Direction : std::uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::Up, Direction::Right, Direction::Down, Direction::Left};

inline constexpr Coord step(Direction d) {
  switch (d) {
    case Direction::Up: return {-1, 0};
    case Direction::Right: return {0, 1};
    case Direction::Down: return {1, 0};
    case Direction::Left: return {0, -1};
  }
  return {0, 0};
}

inline constexpr Coord operator+(Coord a, Coord b) { return {a.row + b.row, a.col + b.col}; }

inline constexpr int grid_side(int n) { return 2 * n + 3; }
inline constexpr Coord bar_cell(int i, int j) { return {2 * i + 2, 2 * j + 2}; }
inline constexpr Coord candidate_cell(int m, int n) { return {2 * m + 1, 2 * n + 1}; }
inline constexpr Coord extension_cell(int i, int j, Direction d) { return bar_cell(i, j) + step(d); }

/// Number of legal directions for a bar in column j.
inline constexpr int directions_for_column(int j) { return j == 0 ? 4 : 3; }

class Maze {
 public:
  Maze() = default;

  /// Outer ring of wall around an all-path interior.
  static Maze open(int n) {
    Maze m(n, Cell::Path);
    const int s = m.side();
    for (int k = 0; k < s; ++k) {
      m.set({0, k}, Cell::Wall);
      m.set({s - 1, k}, Cell::Wall);
      m.set({k, 0}, Cell::Wall);
      m.set({k, s - 1}, Cell::Wall);
    }
    return m;
  }

  static Maze solid(int n) { return Maze(n, Cell::Wall); }

  int n() const { return n_; }
  int side() const { return grid_side(n_); }

  bool in_bounds(Coord c) const {
    return c.row >= 0 && c.col >= 0 && c.row < side() && c.col < side();
  }
  Cell at(Coord c) const { return cells_[index(c)]; }
  void set(Coord c, Cell v) { cells_[index(c)] = v; }
  bool is_path(Coord c) const { return in_bounds(c) && at(c) == Cell::Path; }

  Coord start{};
  Coord goal{};

  friend bool operator==(const Maze&, const Maze&) = default;

 private:
  Maze(int n, Cell fill) : n_(n), cells_(static_cast<std::size_t>(grid_side(n) * grid_side(n)), fill) {
    if (n < 1) throw InvalidArgument("maze size n must be >= 1");
  }
  std::size_t index(Coord c) const {
    if (!in_bounds(c)) throw OutOfRange("cell outside grid");
    return static_cast<std::size_t>(c.row * side() + c.col);
  }

  int n_ = 0;
  std::vector<Cell> cells_;
};

// ---------------------------------------------------------------------------
// Bar assignments

/// One direction per bar (row-major over (i, j)) and the two chosen
/// start/goal candidates in (m, n) coordinates.
struct BarAssignment {
  int n = 0;
  std::vector<Direction> dirs;
  std::array<Coord, 2> start_goal{};

  Direction dir(int i, int j) const { return dirs[static_cast<std::size_t>(i * n + j)]; }
  friend bool operator==(const BarAssignment&, const BarAssignment&) = default;
};

/// Human-readable list of broken invariants; empty when the assignment is legal.
inline std::vector<std::string> assignment_problems(const BarAssignment& a) {
  std::vector<std::string> out;
  if (a.n < 1) {
    out.push_back("n must be >= 1");
    return out;
  }
  if (a.dirs.size() != static_cast<std::size_t>(a.n * a.n)) {
    out.push_back("expected " + std::to_string(a.n * a.n) + " bar directions");
    return out;
  }
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.n; ++j) {
      auto d = static_cast<int>(a.dir(i, j));
      if (d < 0 || d > 3) {
        out.push_back("bar (" + std::to_string(i) + "," + std::to_string(j) + ") has no direction");
      } else if (d == 3 && j != 0) {
        out.push_back("bar (" + std::to_string(i) + "," + std::to_string(j) + ") extends left outside column 0");
      }
      if (i + 1 < a.n && a.dir(i, j) == Direction::Down && a.dir(i + 1, j) == Direction::Up) {
        out.push_back("overlap (" + std::to_string(i) + "," + std::to_string(j) + ")-(" +
                      std::to_string(i + 1) + "," + std::to_string(j) + ")");
      }
    }
  }
  for (const auto& c : a.start_goal) {
    if (c.row < 0 || c.col < 0 || c.row > a.n || c.col > a.n) out.push_back("start/goal candidate out of range");
  }
  if (a.start_goal[0] == a.start_goal[1]) out.push_back("start and goal coincide");
  return out;
}

/// Two distinct start/goal candidates drawn uniformly, sorted.
inline std::array<Coord, 2> random_start_goal(int n, Rng& rng) {
  const int count = (n + 1) * (n + 1);
  std::uniform_int_distribution<int> pick(0, count - 1);
  int a = pick(rng);
  int b = pick(rng);
  while (b == a) b = pick(rng);
  if (b < a) std::swap(a, b);
  return {Coord{a / (n + 1), a % (n + 1)}, Coord{b / (n + 1), b % (n + 1)}};
}

/// Decodes a legal assignment into a grid. Which candidate becomes the start
/// is drawn from `label_seed`.
inline Maze assignment_to_maze(const BarAssignment& a, std::uint64_t label_seed) {
  if (auto problems = assignment_problems(a); !problems.empty()) {
    std::string msg = "invalid bar assignment:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw InvalidAssignment(msg);
  }
  Maze m = Maze::open(a.n);
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.n; ++j) {
      m.set(bar_cell(i, j), Cell::Wall);
      m.set(extension_cell(i, j, a.dir(i, j)), Cell::Wall);
    }
  }
  auto rng = make_rng(label_seed, {stream::kLabel});
  const bool swap = std::bernoulli_distribution(0.5)(rng);
  const Coord s = a.start_goal[swap ? 1 : 0];
  const Coord g = a.start_goal[swap ? 0 : 1];
  m.start = candidate_cell(s.row, s.col);
  m.goal = candidate_cell(g.row, g.col);
  return m;
}

// ---------------------------------------------------------------------------
// Classical generators

/// Column-by-column bar tipping. Each bar draws a direction uniformly from
/// its column's set and redraws while the choice would overlap the bar above.
inline BarAssignment random_bar_assignment(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("maze size n must be >= 1");
  auto rng = make_rng(seed, {stream::kGenerator});
  BarAssignment a;
  a.n = n;
  a.dirs.assign(static_cast<std::size_t>(n * n), Direction::Right);
  for (int j = 0; j < n; ++j) {
    std::uniform_int_distribution<int> pick(0, directions_for_column(j) - 1);
    for (int i = 0; i < n; ++i) {
      Direction d;
      do {
        d = static_cast<Direction>(pick(rng));
      } while (d == Direction::Up && i > 0 && a.dir(i - 1, j) == Direction::Down);
      a.dirs[static_cast<std::size_t>(i * n + j)] = d;
    }
  }
  auto sg_rng = make_rng(seed, {stream::kStartGoal});
  a.start_goal = random_start_goal(n, sg_rng);
  return a;
}

inline Maze generate_bar_tipping(int n, std::uint64_t seed) {
  return assignment_to_maze(random_bar_assignment(n, seed), seed);
}

namespace detail {
inline void place_random_start_goal(Maze& m, std::uint64_t seed) {
  auto rng = make_rng(seed, {stream::kStartGoal});
  auto sg = random_start_goal(m.n(), rng);
  auto label = make_rng(seed, {stream::kLabel});
  if (std::bernoulli_distribution(0.5)(label)) std::swap(sg[0], sg[1]);
  m.start = candidate_cell(sg[0].row, sg[0].col);
  m.goal = candidate_cell(sg[1].row, sg[1].col);
}
}  // namespace detail

/// Wall extending: grow walls from even-even seed points until every seed
/// point is wall. A growing wall stops when it touches existing wall and
/// backtracks along itself when boxed in.
inline Maze generate_wall_extending(int n, std::uint64_t seed) {
  Maze m = Maze::open(n);
  auto rng = make_rng(seed, {stream::kGenerator});
  const int side = m.side();
  std::vector<char> in_current(static_cast<std::size_t>(side * side), 0);
  auto cur_flag = [&](Coord c) -> char& { return in_current[static_cast<std::size_t>(c.row * side + c.col)]; };

  std::vector<Coord> seeds;
  for (int r = 2; r < side - 1; r += 2)
    for (int c = 2; c < side - 1; c += 2) seeds.push_back({r, c});

  while (true) {
    std::vector<Coord> open_seeds;
    for (auto s : seeds)
      if (m.at(s) == Cell::Path) open_seeds.push_back(s);
    if (open_seeds.empty()) break;
    Coord cur = open_seeds[std::uniform_int_distribution<std::size_t>(0, open_seeds.size() - 1)(rng)];

    std::vector<Coord> trail{cur};
    m.set(cur, Cell::Wall);
    cur_flag(cur) = 1;
    bool attached = false;
    while (!attached) {
      std::vector<Direction> options;
      for (auto d : kAllDirections) {
        Coord one = cur + step(d);
        Coord two = one + step(d);
        if (m.at(one) == Cell::Path && !cur_flag(two)) options.push_back(d);
      }
      if (options.empty()) {
        trail.pop_back();
        cur = trail.back();
        continue;
      }
      Direction d = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
      Coord one = cur + step(d);
      Coord two = one + step(d);
      m.set(one, Cell::Wall);
      if (m.at(two) == Cell::Wall) {
        attached = true;
      } else {
        m.set(two, Cell::Wall);
        cur_flag(two) = 1;
        trail.push_back(two);
        cur = two;
      }
    }
    std::fill(in_current.begin(), in_current.end(), 0);
  }
  detail::place_random_start_goal(m, seed);
  return m;
}

/// Hunt and kill: carve a random walk through odd-odd cells; when stuck,
/// restart from a random already-carved cell that still has an uncarved
/// neighbour.
inline Maze generate_hunt_and_kill(int n, std::uint64_t seed) {
  Maze m = Maze::solid(n);
  auto rng = make_rng(seed, {stream::kGenerator});
  const int span = n + 1;
  auto carved_neighbours = [&](Coord c, bool want_wall) {
    std::vector<Direction> out;
    for (auto d : kAllDirections) {
      Coord two = c + step(d) + step(d);
      if (two.row >= 1 && two.col >= 1 && two.row <= 2 * n + 1 && two.col <= 2 * n + 1 &&
          (m.at(two) == Cell::Wall) == want_wall)
        out.push_back(d);
    }
    return out;
  };

  std::uniform_int_distribution<int> pick(0, span * span - 1);
  int first = pick(rng);
  Coord cur = candidate_cell(first / span, first % span);
  m.set(cur, Cell::Path);
  while (true) {
    auto options = carved_neighbours(cur, true);
    if (!options.empty()) {
      Direction d = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
      m.set(cur + step(d), Cell::Path);
      cur = cur + step(d) + step(d);
      m.set(cur, Cell::Path);
      continue;
    }
    std::vector<Coord> restart;
    for (int a = 0; a < span; ++a)
      for (int b = 0; b < span; ++b) {
        Coord c = candidate_cell(a, b);
        if (m.at(c) == Cell::Path && !carved_neighbours(c, true).empty()) restart.push_back(c);
      }
    if (restart.empty()) break;
    cur = restart[std::uniform_int_distribution<std::size_t>(0, restart.size() - 1)(rng)];
  }
  detail::place_random_start_goal(m, seed);
  return m;
}

// ---------------------------------------------------------------------------
// Validation and solving

enum class DefectKind { Cycle, Disconnected, StartGoal };

struct Defect {
  DefectKind kind;
  std::string detail;
};

struct ValidationReport {
  bool is_perfect = false;
  int path_cell_count = 0;
  bool connected = false;
  int edge_count = 0;
  std::vector<Defect> violations;
};

inline std::string_view to_string(DefectKind k) {
  switch (k) {
    case DefectKind::Cycle: return "cycle";
    case DefectKind::Disconnected: return "disconnected region";
    case DefectKind::StartGoal: return "start/goal fault";
  }
  return "?";
}

/// Tree test on the path cells: connected with exactly P - 1 adjacencies.
inline ValidationReport validate_perfect(const Maze& m) {
  ValidationReport r;
  const int side = m.side();
  std::optional<Coord> first;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      Coord c{row, col};
      if (m.at(c) != Cell::Path) continue;
      ++r.path_cell_count;
      if (!first) first = c;
      if (m.is_path(c + step(Direction::Right))) ++r.edge_count;
      if (m.is_path(c + step(Direction::Down))) ++r.edge_count;
    }
  }

  int components = 0;
  std::vector<char> seen(static_cast<std::size_t>(side * side), 0);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      Coord origin{row, col};
      auto idx = static_cast<std::size_t>(row * side + col);
      if (m.at(origin) != Cell::Path || seen[idx]) continue;
      ++components;
      std::queue<Coord> q;
      q.push(origin);
      seen[idx] = 1;
      while (!q.empty()) {
        Coord c = q.front();
        q.pop();
        for (auto d : kAllDirections) {
          Coord nb = c + step(d);
          if (!m.is_path(nb)) continue;
          auto& s = seen[static_cast<std::size_t>(nb.row * side + nb.col)];
          if (!s) {
            s = 1;
            q.push(nb);
          }
        }
      }
    }
  }
  r.connected = components <= 1 && r.path_cell_count > 0;
  if (components > 1)
    r.violations.push_back({DefectKind::Disconnected, std::to_string(components) + " path components"});

  // Cyclomatic number of the path graph.
  const int independent_cycles = r.edge_count - r.path_cell_count + components;
  if (independent_cycles > 0)
    r.violations.push_back({DefectKind::Cycle, std::to_string(independent_cycles) + " independent cycle(s)"});

  bool sg_ok = true;
  auto check_endpoint = [&](Coord c, const char* name) {
    if (!m.in_bounds(c) || m.at(c) != Cell::Path) {
      r.violations.push_back({DefectKind::StartGoal, std::string(name) + " is not a path cell"});
      sg_ok = false;
    } else if (c.row % 2 != 1 || c.col % 2 != 1) {
      r.violations.push_back({DefectKind::StartGoal, std::string(name) + " is not an odd-odd candidate cell"});
      sg_ok = false;
    }
  };
  check_endpoint(m.start, "start");
  check_endpoint(m.goal, "goal");
  if (m.start == m.goal) {
    r.violations.push_back({DefectKind::StartGoal, "start equals goal"});
    sg_ok = false;
  }

  r.is_perfect = r.connected && r.edge_count == r.path_cell_count - 1 && sg_ok;
  return r;
}

/// BFS shortest path, start and goal inclusive.
inline std::vector<Coord> solve_shortest_path(const Maze& m) {
  if (!m.is_path(m.start) || !m.is_path(m.goal)) throw NoPath("start or goal is not a path cell");
  const int side = m.side();
  std::vector<int> parent(static_cast<std::size_t>(side * side), -1);
  auto idx = [side](Coord c) { return c.row * side + c.col; };
  std::queue<Coord> q;
  q.push(m.start);
  parent[static_cast<std::size_t>(idx(m.start))] = idx(m.start);
  while (!q.empty()) {
    Coord c = q.front();
    q.pop();
    if (c == m.goal) break;
    for (auto d : kAllDirections) {
      Coord nb = c + step(d);
      if (!m.is_path(nb) || parent[static_cast<std::size_t>(idx(nb))] != -1) continue;
      parent[static_cast<std::size_t>(idx(nb))] = idx(c);
      q.push(nb);
    }
  }
  if (parent[static_cast<std::size_t>(idx(m.goal))] == -1) throw NoPath("goal unreachable from start");
  std::vector<Coord> path;
  for (int at = idx(m.goal);; at = parent[static_cast<std::size_t>(at)]) {
    path.push_back({at / side, at % side});
    if (at == idx(m.start)) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// ---------------------------------------------------------------------------
// Text and JSON

inline std::string render_ascii(const Maze& m) {
  std::string out;
  const int side = m.side();
  out.reserve(static_cast<std::size_t>(side * (side + 1)));
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      Coord p{r, c};
      if (p == m.start) out += 'S';
      else if (p == m.goal) out += 'G';
      else out += m.at(p) == Cell::Wall ? '#' : '.';
    }
    out += '\n';
  }
  return out;
}

inline Maze parse_ascii(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  const int side = static_cast<int>(rows.size());
  if (side < 5 || side % 2 == 0) throw ParseError("maze must have an odd side length >= 5");
  Maze m = Maze::open((side - 3) / 2);
  bool have_start = false, have_goal = false;
  for (int r = 0; r < side; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != side) throw ParseError("maze rows must be square");
    for (int c = 0; c < side; ++c) {
      char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      switch (ch) {
        case '#': m.set({r, c}, Cell::Wall); break;
        case '.': m.set({r, c}, Cell::Path); break;
        case 'S': m.set({r, c}, Cell::Path); m.start = {r, c}; have_start = true; break;
        case 'G': m.set({r, c}, Cell::Path); m.goal = {r, c}; have_goal = true; break;
        default: throw ParseError(std::string("unexpected maze character '") + ch + "'");
      }
    }
  }
  if (!have_start || !have_goal) throw ParseError("maze needs exactly one S and one G");
  return m;
}

inline nlohmann::json maze_to_json(const Maze& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.side(); ++r) {
    std::string line;
    for (int c = 0; c < m.side(); ++c) line += m.at({r, c}) == Cell::Wall ? '#' : '.';
    rows.push_back(line);
  }
  return {{"n", m.n()},
          {"grid", rows},
          {"start", {m.start.row, m.start.col}},
          {"goal", {m.goal.row, m.goal.col}}};
}

inline Maze maze_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParseError("maze n must be >= 1");
    const auto& grid = j.at("grid");
    Maze m = Maze::open(n);
    if (static_cast<int>(grid.size()) != m.side()) throw ParseError("grid row count does not match 2n+3");
    for (int r = 0; r < m.side(); ++r) {
      const auto line = grid.at(static_cast<std::size_t>(r)).get<std::string>();
      if (static_cast<int>(line.size()) != m.side()) throw ParseError("grid row length does not match 2n+3");
      for (int c = 0; c < m.side(); ++c) {
        if (line[static_cast<std::size_t>(c)] == '#') m.set({r, c}, Cell::Wall);
        else if (line[static_cast<std::size_t>(c)] == '.') m.set({r, c}, Cell::Path);
        else throw ParseError("grid cells must be '#' or '.'");
      }
    }
    m.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
    m.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed maze JSON: ") + e.what());
  }
}

}  // namespace qmaze
