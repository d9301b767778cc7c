#pragma once

// Player-adaptive Q_update state: a dense dim x dim matrix mixed toward a
// fresh random matrix after every solved maze, weighted by a sigmoid of the
// solve time.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmaze/errors.hpp"
#include "qmaze/rng.hpp"

namespace qmaze {

/// Variables for an N x N bar lattice: N(3N+1) bar directions then (N+1)^2
/// start/goal candidates.
inline constexpr std::size_t bar_variable_count(int n) {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(3 * n + 1);
}
inline constexpr std::size_t qubo_dim(int n) {
  return bar_variable_count(n) + static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1);
}

struct SolveRecord {
  double solve_time = 0.0;
  double timestamp = 0.0;  // seconds since the Unix epoch
  friend bool operator==(const SolveRecord&, const SolveRecord&) = default;
};

struct UpdateState {
  int n = 0;
  std::size_t dim = 0;
  std::vector<double> matrix;  // row-major dim x dim, entries in [-1, 1]
  double a = 0.05;
  double lambda_update1 = 0.15;
  double lambda_update2 = 0.30;
  std::vector<SolveRecord> history;

  double at(std::size_t r, std::size_t c) const { return matrix[r * dim + c]; }
  double& at(std::size_t r, std::size_t c) { return matrix[r * dim + c]; }

  friend bool operator==(const UpdateState&, const UpdateState&) = default;
};

namespace detail {
inline std::vector<double> uniform_matrix(std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> m(dim * dim);
  for (auto& v : m) v = u(rng);
  return m;
}
}  // namespace detail

inline UpdateState init_update_state(int n, double a, double lambda_update1, double lambda_update2,
                                     std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("maze size n must be >= 1");
  if (!(a > 0.0)) throw InvalidArgument("sigmoid steepness a must be > 0");
  UpdateState s;
  s.n = n;
  s.dim = qubo_dim(n);
  s.a = a;
  s.lambda_update1 = lambda_update1;
  s.lambda_update2 = lambda_update2;
  auto rng = make_rng(seed, {stream::kUpdateInit});
  s.matrix = detail::uniform_matrix(s.dim, rng);
  return s;
}

/// Share of the previous matrix kept after a solve that took `t` seconds.
inline double p_of_t(double a, double t) {
  if (t < 0.0 || std::isnan(t)) throw NegativeTime("solve time must be >= 0");
  return 1.0 / (1.0 + std::exp(-a * t));
}

/// The random matrix an update with this seed mixes in. Exposed so callers
/// can recompute an update independently.
inline std::vector<double> update_random_matrix(std::size_t dim, std::uint64_t seed) {
  auto rng = make_rng(seed, {stream::kUpdateRandom});
  return detail::uniform_matrix(dim, rng);
}

/// matrix <- p(t) * matrix + (1 - p(t)) * R with R uniform in [-1, 1].
inline UpdateState update(UpdateState s, double t, std::uint64_t seed, double timestamp = 0.0) {
  const double p = p_of_t(s.a, t);
  const auto fresh = update_random_matrix(s.dim, seed);
  for (std::size_t k = 0; k < s.matrix.size(); ++k) s.matrix[k] = p * s.matrix[k] + (1.0 - p) * fresh[k];
  s.history.push_back({t, timestamp});
  return s;
}

inline nlohmann::json update_state_to_json(const UpdateState& s) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : s.history) hist.push_back({{"solve_time", h.solve_time}, {"timestamp", h.timestamp}});
  return {{"n", s.n},
          {"a", s.a},
          {"lambdas", {{"update1", s.lambda_update1}, {"update2", s.lambda_update2}}},
          {"matrix", s.matrix},
          {"history", hist}};
}

inline UpdateState update_state_from_json(const nlohmann::json& j) {
  try {
    UpdateState s;
    s.n = j.at("n").get<int>();
    if (s.n < 1) throw ParseError("update state n must be >= 1");
    s.dim = qubo_dim(s.n);
    s.a = j.at("a").get<double>();
    s.lambda_update1 = j.at("lambdas").at("update1").get<double>();
    s.lambda_update2 = j.at("lambdas").at("update2").get<double>();
    s.matrix = j.at("matrix").get<std::vector<double>>();
    if (s.matrix.size() != s.dim * s.dim) throw ParseError("update matrix size does not match n");
    for (const auto& h : j.at("history"))
      s.history.push_back({h.at("solve_time").get<double>(), h.at("timestamp").get<double>()});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed update state JSON: ") + e.what());
  }
}

}  // namespace qmaze
