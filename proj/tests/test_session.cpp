#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "qmaze/session.hpp"

using namespace qmaze;

namespace {

SessionParams fast_params(std::uint64_t seed = 1, bool update = true, int set_size = 30) {
  SessionParams p;
  p.anneal.sweeps = 300;
  p.anneal.reads = 8;
  p.seed = seed;
  p.update_enabled = update;
  p.set_size = set_size;
  return p;
}

Direction direction_between(Coord a, Coord b) {
  for (auto d : kAllDirections)
    if (a + step(d) == b) return d;
  throw std::logic_error("cells are not adjacent");
}

// Plays the current maze optimally; returns the number of moves made.
int walk_to_goal(Session& s) {
  const auto path = solve_shortest_path(s.current_maze());
  MoveResult r;
  for (std::size_t k = 1; k < path.size(); ++k) {
    EXPECT_FALSE(r.reached_goal);
    r = s.move(direction_between(path[k - 1], path[k]));
    EXPECT_FALSE(r.blocked);
    EXPECT_EQ(r.pos, path[k]);
  }
  EXPECT_TRUE(r.reached_goal);
  return static_cast<int>(path.size()) - 1;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qmaze_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Session, CreatesFullSizeMaze) {
  auto p = fast_params(3);
  p.anneal.reads = 10;
  p.anneal.sweeps = 1000;
  const auto s = Session::create("a", 9, p);
  EXPECT_EQ(s.current_maze().side(), 21);
  EXPECT_TRUE(validate_perfect(s.current_maze()).is_perfect);
  EXPECT_EQ(s.player(), s.current_maze().start);
  EXPECT_EQ(s.maze_index(), 0);
}

TEST(Session, RejectsBadInput) {
  EXPECT_THROW(Session::create("a", 0, fast_params()), InvalidArgument);
  auto p = fast_params();
  p.a = -1;
  EXPECT_THROW(Session::create("a", 3, p), InvalidArgument);
}

TEST(View, CornerWindow) {
  const Maze m = generate_bar_tipping(3, 1);
  const auto v = view_around(m, {1, 1});
  for (int k = 0; k < kViewSize; ++k) {
    EXPECT_EQ(v.cells[0][static_cast<std::size_t>(k)], ViewCell::OutOfBounds);
    EXPECT_EQ(v.cells[static_cast<std::size_t>(k)][0], ViewCell::OutOfBounds);
  }
  for (int k = 1; k < kViewSize; ++k) {
    EXPECT_EQ(v.cells[1][static_cast<std::size_t>(k)], ViewCell::Wall);
    EXPECT_EQ(v.cells[static_cast<std::size_t>(k)][1], ViewCell::Wall);
  }
}

TEST(View, MidGridMatchesSlice) {
  const Maze m = generate_hunt_and_kill(6, 4);
  for (int r = 2; r < m.side() - 2; ++r)
    for (int c = 2; c < m.side() - 2; ++c) {
      const auto v = view_around(m, {r, c});
      for (int dr = -2; dr <= 2; ++dr)
        for (int dc = -2; dc <= 2; ++dc) {
          const Coord g{r + dr, c + dc};
          const ViewCell want = g == m.start ? ViewCell::Start
                                : g == m.goal ? ViewCell::Goal
                                : m.at(g) == Cell::Wall ? ViewCell::Wall
                                                        : ViewCell::Path;
          ASSERT_EQ(v.cells[static_cast<std::size_t>(dr + 2)][static_cast<std::size_t>(dc + 2)], want);
        }
    }
}

TEST(View, JsonShapeIsFiveByFive) {
  auto s = Session::create("a", 3, fast_params());
  const auto j = view_to_json(s.view(10.0));
  ASSERT_EQ(j.at("cells").size(), 5u);
  for (const auto& row : j.at("cells")) EXPECT_EQ(row.size(), 5u);
  EXPECT_EQ(j.at("cells")[2][2], "start");
  EXPECT_EQ(s.view_started_at(), 10.0);
  s.view(20.0);
  EXPECT_EQ(s.view_started_at(), 10.0);
}

TEST(Move, BlockedAndRecentred) {
  auto s = Session::create("a", 4, fast_params(2));
  const Coord start = s.player();
  bool saw_block = false, saw_move = false;
  for (auto d : kAllDirections) {
    const Coord target = start + step(d);
    auto copy = s;
    const auto r = copy.move(d);
    if (s.current_maze().is_path(target)) {
      EXPECT_FALSE(r.blocked);
      EXPECT_EQ(r.pos, target);
      EXPECT_EQ(copy.view(0.0).center, target);
      saw_move = true;
    } else {
      EXPECT_TRUE(r.blocked);
      EXPECT_EQ(r.pos, start);
      saw_block = true;
    }
  }
  EXPECT_TRUE(saw_move);
  EXPECT_TRUE(saw_block);
}

TEST(Move, OptimalWalkReachesGoal) {
  auto s = Session::create("a", 5, fast_params(6));
  const int moves = walk_to_goal(s);
  EXPECT_EQ(moves + 1, s.stats().path_lengths.front());
  EXPECT_THROW(s.move(Direction::Up), StateError);
}

TEST(Move, RepeatedSequenceIsIdempotent) {
  auto s = Session::create("a", 4, fast_params(2));
  const auto path = solve_shortest_path(s.current_maze());
  const auto d = direction_between(path[0], path[1]);
  const auto first = s.move(d, 7);
  const auto again = s.move(d, 7);
  EXPECT_EQ(first.pos, again.pos);
  EXPECT_EQ(s.player(), path[1]);
}

TEST(Submit, NeedsGoalOrGiveUp) {
  auto s = Session::create("a", 3, fast_params());
  EXPECT_THROW(s.submit(5.0), StateError);
  walk_to_goal(s);
  EXPECT_THROW(s.submit(-1.0), NegativeTime);
  const auto r = s.submit(5.0);
  EXPECT_FALSE(r.set_complete);
  EXPECT_EQ(r.maze_index, 1);
  EXPECT_EQ(s.updates(), 1);
  EXPECT_EQ(s.update_state().history.size(), 1u);
}

TEST(Submit, FullSetCompletes) {
  auto s = Session::create("a", 3, fast_params(4));
  SubmitResult r;
  for (int k = 0; k < 30; ++k) {
    ASSERT_FALSE(s.complete());
    EXPECT_EQ(s.updates(), s.maze_index());
    ASSERT_TRUE(validate_perfect(s.current_maze()).is_perfect);
    walk_to_goal(s);
    r = s.submit(1.0 + k);
  }
  EXPECT_TRUE(r.set_complete);
  EXPECT_EQ(r.stats.sma_series.size(), 21u);
  EXPECT_EQ(r.stats.solve_times.size(), 30u);
  EXPECT_EQ(r.stats.updates, 29);
  EXPECT_NEAR(r.stats.sma_series.back(), 25.5 / 5.5, 1e-12);
  EXPECT_THROW(s.submit(1.0, true), StateError);
  EXPECT_THROW(s.move(Direction::Up), StateError);
}

TEST(Submit, GiveUpAdvances) {
  auto s = Session::create("a", 3, fast_params(4, true, 2));
  EXPECT_FALSE(s.submit(100.0, true).set_complete);
  EXPECT_TRUE(s.submit(100.0, true).set_complete);
}

TEST(ControlArm, IgnoresSolveTime) {
  auto a = Session::create("a", 4, fast_params(8, false));
  auto b = Session::create("b", 4, fast_params(8, false));
  EXPECT_EQ(a.current_maze(), b.current_maze());
  a.submit(1.0, true);
  b.submit(500.0, true);
  EXPECT_EQ(a.current_maze(), b.current_maze());
  EXPECT_EQ(a.updates(), 0);
  EXPECT_EQ(a.update_state().matrix, b.update_state().matrix);
}

TEST(UpdateArm, SolveTimeChangesState) {
  auto a = Session::create("a", 4, fast_params(8));
  auto b = Session::create("b", 4, fast_params(8));
  a.submit(1.0, true);
  b.submit(500.0, true);
  EXPECT_NE(a.update_state().matrix, b.update_state().matrix);
}

TEST(Snapshot, ByteRoundTrip) {
  auto s = Session::create("abc", 3, fast_params(5));
  s.view(42.0);
  walk_to_goal(s);
  s.submit(3.25, false, 1000.0);
  s.view(43.0);
  s.move(Direction::Up, 1);
  const auto text = s.to_json().dump();
  const auto back = Session::from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.to_json().dump(), text);
  EXPECT_EQ(back.current_maze(), s.current_maze());
  EXPECT_EQ(back.update_state(), s.update_state());
  auto broken = s.to_json();
  broken.erase("maze");
  EXPECT_THROW(Session::from_json(broken), ParseError);
}

TEST(Params, PartialJsonKeepsDefaults) {
  const auto p = params_from_json({{"update_enabled", false}, {"anneal", {{"reads", 7}}}});
  EXPECT_FALSE(p.update_enabled);
  EXPECT_EQ(p.anneal.reads, 7);
  EXPECT_EQ(p.anneal.sweeps, 1000);
  EXPECT_EQ(p.lambda_update1, 0.15);
  EXPECT_EQ(p.lambda_update2, 0.30);
  EXPECT_EQ(p.a, 0.05);
  EXPECT_EQ(p.set_size, 30);
  const auto round = params_from_json(params_to_json(fast_params(9)));
  EXPECT_EQ(params_to_json(round), params_to_json(fast_params(9)));
  EXPECT_THROW(params_from_json({{"sampler", "qpu"}}), ParseError);
  EXPECT_THROW(params_from_json(nlohmann::json::array()), ParseError);
}

TEST(Store, UnknownIdIsNotFound) {
  SessionStore store(std::nullopt, 1);
  EXPECT_THROW(store.with_session("deadbeef", false, [](Session&) {}), NotFound);
  EXPECT_THROW(store.with_session("../etc", false, [](Session&) {}), NotFound);
}

TEST(Store, PersistsAndReloads) {
  const auto dir = temp_dir("store");
  std::string id;
  std::string before;
  {
    SessionStore store(dir, 3);
    id = store.create(3, fast_params(2));
    EXPECT_EQ(id.size(), 16u);
    store.with_session(id, true, [](Session& s) {
      s.view(1.0);
      s.submit(4.0, true, 2.0);
    });
    before = store.with_session(id, false, [](Session& s) { return s.to_json().dump(); });
    ASSERT_TRUE(std::filesystem::exists(*store.snapshot_path(id)));
    std::ifstream in(*store.snapshot_path(id));
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str(), before);
  }
  SessionStore reopened(dir, 4);
  const auto after = reopened.with_session(id, false, [](Session& s) { return s.to_json().dump(); });
  EXPECT_EQ(after, before);
  std::filesystem::remove_all(dir);
}

TEST(Bot, DeterministicPerSeed) {
  BotProfile profile;
  profile.sigma = 0.0;
  const auto a = run_bot_set(3, fast_params(0, true, 12), profile, 5);
  const auto b = run_bot_set(3, fast_params(0, true, 12), profile, 5);
  EXPECT_EQ(a.solve_times, b.solve_times);
  EXPECT_EQ(a.path_lengths, b.path_lengths);
  EXPECT_EQ(a.mazes, 12);
  EXPECT_EQ(a.updates, 11);
  EXPECT_EQ(a.sma_series.size(), 3u);
  EXPECT_TRUE(a.all_valid);
  for (std::size_t k = 0; k < a.solve_times.size(); ++k)
    EXPECT_DOUBLE_EQ(a.solve_times[k], std::max(0.1, 0.1 * (a.path_lengths[k] - 1)));
}

TEST(Bot, ControlArmRuns) {
  const auto s = run_bot_set(3, fast_params(0, false, 10), BotProfile{}, 9);
  EXPECT_EQ(s.mazes, 10);
  EXPECT_EQ(s.updates, 0);
  EXPECT_EQ(s.sma_series.size(), 1u);
  EXPECT_TRUE(s.all_valid);
}

TEST(Bot, RejectsNegativeProfile) {
  BotProfile p;
  p.sigma = -1.0;
  EXPECT_THROW(run_bot_set(3, fast_params(), p, 1), InvalidArgument);
}
