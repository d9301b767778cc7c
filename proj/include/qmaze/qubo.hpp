#pragma once

// Bar-tipping maze generation as a QUBO.
//
// Variables, under a single flat index:
//   x(i, j, d)  bar (i, j) extends in direction d      k in [0, N(3N+1))
//   X(m, n)     candidate (m, n) is the start or goal  l in [N(3N+1), dim)
//
// Energy = sum of overlap couplings
//        + lambda1 * sum_bars (sum_d x - 1)^2
//        + lambda2 * (sum X - 2)^2
// with the penalty constants kept in `offset`, so every feasible
// configuration scores exactly 0 on the base problem.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qmaze/errors.hpp"
#include "qmaze/maze.hpp"
#include "qmaze/update_state.hpp"

namespace qmaze {

struct BarVariable {
  int i = 0;
  int j = 0;
  int d = 0;
  friend bool operator==(const BarVariable&, const BarVariable&) = default;
};

inline std::size_t index_of_bar(int n, int i, int j, int d) {
  if (n < 1 || i < 0 || j < 0 || i >= n || j >= n) throw OutOfRange("bar coordinate out of range");
  if (d < 0 || d >= directions_for_column(j)) throw OutOfRange("direction out of range for bar column");
  const auto row = static_cast<std::size_t>(3 * n + 1) * static_cast<std::size_t>(i);
  return row + static_cast<std::size_t>(j == 0 ? d : d + 3 * j + 1);
}

inline std::size_t index_of_sg(int n, int m, int col) {
  if (n < 1 || m < 0 || col < 0 || m > n || col > n) throw OutOfRange("start/goal candidate out of range");
  return bar_variable_count(n) + static_cast<std::size_t>((n + 1) * m + col);
}

inline BarVariable bar_of_index(int n, std::size_t k) {
  if (k >= bar_variable_count(n)) throw OutOfRange("index is not a bar variable");
  const auto stride = static_cast<std::size_t>(3 * n + 1);
  const int i = static_cast<int>(k / stride);
  const int r = static_cast<int>(k % stride);
  if (r < 4) return {i, 0, r};
  return {i, (r - 1) / 3, (r - 1) % 3};
}

inline Coord sg_of_index(int n, std::size_t l) {
  if (l < bar_variable_count(n) || l >= qubo_dim(n)) throw OutOfRange("index is not a start/goal variable");
  const int r = static_cast<int>(l - bar_variable_count(n));
  return {r / (n + 1), r % (n + 1)};
}

struct Bitstring {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::uint8_t operator[](std::size_t k) const { return bits[k]; }
  std::uint8_t& operator[](std::size_t k) { return bits[k]; }

  std::string to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t k = 0; k < bits.size(); ++k) s[k] = bits[k] ? '1' : '0';
    return s;
  }
  static Bitstring from_string(std::string_view s) {
    Bitstring b;
    b.bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw ParseError("bitstring must contain only 0/1");
      b.bits.push_back(static_cast<std::uint8_t>(c == '1'));
    }
    return b;
  }
  friend auto operator<=>(const Bitstring&, const Bitstring&) = default;
};

/// Upper-triangular sparse QUBO. Keys satisfy first <= second.
struct QuboProblem {
  int n = 0;
  std::size_t dim = 0;
  std::map<std::pair<std::size_t, std::size_t>, double> coeffs;
  double offset = 0.0;
  std::optional<double> lambda1;
  std::optional<double> lambda2;

  void add(std::size_t a, std::size_t b, double w) {
    if (a >= dim || b >= dim) throw OutOfRange("coefficient index out of range");
    if (b < a) std::swap(a, b);
    coeffs[{a, b}] += w;
  }
  double coefficient(std::size_t a, std::size_t b) const {
    if (b < a) std::swap(a, b);
    auto it = coeffs.find({a, b});
    return it == coeffs.end() ? 0.0 : it->second;
  }
  friend bool operator==(const QuboProblem&, const QuboProblem&) = default;
};

inline QuboProblem build_base_qubo(int n, double lambda1 = 2.0, double lambda2 = 2.0) {
  if (n < 1) throw InvalidArgument("maze size n must be >= 1");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw InvalidArgument("penalty weights must be > 0");
  QuboProblem q;
  q.n = n;
  q.dim = qubo_dim(n);
  q.lambda1 = lambda1;
  q.lambda2 = lambda2;

  // Face-to-face vertical overlap: upper bar down, lower bar up.
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j < n; ++j) q.add(index_of_bar(n, i, j, 2), index_of_bar(n, i + 1, j, 0), 1.0);

  // One direction per bar.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int dirs = directions_for_column(j);
      for (int d = 0; d < dirs; ++d) {
        q.add(index_of_bar(n, i, j, d), index_of_bar(n, i, j, d), -lambda1);
        for (int e = d + 1; e < dirs; ++e) q.add(index_of_bar(n, i, j, d), index_of_bar(n, i, j, e), 2.0 * lambda1);
      }
      q.offset += lambda1;
    }
  }

  // Exactly two start/goal picks.
  const std::size_t first = bar_variable_count(n);
  for (std::size_t a = first; a < q.dim; ++a) {
    q.add(a, a, -3.0 * lambda2);
    for (std::size_t b = a + 1; b < q.dim; ++b) q.add(a, b, 2.0 * lambda2);
  }
  q.offset += 4.0 * lambda2;
  return q;
}

inline double energy(const QuboProblem& q, const Bitstring& b) {
  if (b.size() != q.dim) throw LengthMismatch("bitstring length does not match QUBO dimension");
  double e = q.offset;
  for (const auto& [key, w] : q.coeffs)
    if (b[key.first] && b[key.second]) e += w;
  return e;
}

inline Bitstring encode(const BarAssignment& a) {
  Bitstring b;
  b.bits.assign(qubo_dim(a.n), 0);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) b[index_of_bar(a.n, i, j, static_cast<int>(a.dir(i, j)))] = 1;
  for (const auto& c : a.start_goal) b[index_of_sg(a.n, c.row, c.col)] = 1;
  return b;
}

enum class ViolationKind { DirectionCount, Overlap, StartGoalCount };

struct Violation {
  ViolationKind kind;
  std::string detail;
};

using DecodeResult = std::variant<BarAssignment, std::vector<Violation>>;

inline DecodeResult decode(const QuboProblem& q, const Bitstring& b) {
  if (b.size() != q.dim) throw LengthMismatch("bitstring length does not match QUBO dimension");
  const int n = q.n;
  std::vector<Violation> violations;
  BarAssignment a;
  a.n = n;
  a.dirs.assign(static_cast<std::size_t>(n * n), Direction::Up);

  auto coord = [](int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int count = 0;
      for (int d = 0; d < directions_for_column(j); ++d) {
        if (b[index_of_bar(n, i, j, d)]) {
          ++count;
          a.dirs[static_cast<std::size_t>(i * n + j)] = static_cast<Direction>(d);
        }
      }
      if (count != 1)
        violations.push_back({ViolationKind::DirectionCount,
                              "bar " + coord(i, j) + " direction count = " + std::to_string(count)});
      if (i + 1 < n && b[index_of_bar(n, i, j, 2)] && b[index_of_bar(n, i + 1, j, 0)])
        violations.push_back({ViolationKind::Overlap, "overlap " + coord(i, j) + "-" + coord(i + 1, j)});
    }
  }

  std::vector<Coord> picks;
  for (std::size_t l = bar_variable_count(n); l < q.dim; ++l)
    if (b[l]) picks.push_back(sg_of_index(n, l));
  if (picks.size() != 2) {
    violations.push_back({ViolationKind::StartGoalCount, "start/goal count = " + std::to_string(picks.size())});
  } else {
    a.start_goal = {picks[0], picks[1]};
  }

  if (!violations.empty()) return violations;
  return a;
}

inline bool is_feasible(const DecodeResult& r) { return std::holds_alternative<BarAssignment>(r); }

/// Adds the weighted Q_update blocks to a copy of `q`. Bar-bar and bar-
/// candidate entries use lambda_update1, candidate-candidate entries use
/// lambda_update2. The matrix is summed over ordered pairs, so (a, b) and
/// (b, a) fold into one upper-triangular coefficient.
inline QuboProblem apply_update_term(const QuboProblem& q, const UpdateState& u) {
  if (u.dim != q.dim || u.matrix.size() != q.dim * q.dim)
    throw DimMismatch("update state dimension does not match QUBO");
  QuboProblem out = q;
  const std::size_t split = bar_variable_count(q.n);
  for (std::size_t a = 0; a < q.dim; ++a) {
    for (std::size_t b = a; b < q.dim; ++b) {
      const double lambda = (a >= split && b >= split) ? u.lambda_update2 : u.lambda_update1;
      const double raw = a == b ? u.at(a, a) : u.at(a, b) + u.at(b, a);
      const double delta = lambda * raw;
      if (delta != 0.0) out.coeffs[{a, b}] += delta;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// COO text: header "n dim offset", then one "k1 k2 weight" per line.

namespace detail {
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline double parse_real(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + token + "'");
  }
  if (used != token.size()) throw ParseError("invalid number '" + token + "'");
  return v;
}
}  // namespace detail

inline void write_coo(std::ostream& os, const QuboProblem& q) {
  os << q.n << ' ' << q.dim << ' ' << detail::format_real(q.offset) << '\n';
  for (const auto& [key, w] : q.coeffs) os << key.first << ' ' << key.second << ' ' << detail::format_real(w) << '\n';
}

inline std::string to_coo(const QuboProblem& q) {
  std::ostringstream os;
  write_coo(os, q);
  return os.str();
}

inline QuboProblem read_coo(std::istream& is) {
  QuboProblem q;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty COO input");
  {
    std::istringstream hs(line);
    std::string offset;
    if (!(hs >> q.n >> q.dim >> offset)) throw ParseError("COO header must be 'n dim offset'");
    if (q.n < 1 || q.dim != qubo_dim(q.n)) throw ParseError("COO header dimension does not match n");
    q.offset = detail::parse_real(offset);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t a = 0, b = 0;
    std::string w;
    if (!(ls >> a >> b >> w)) throw ParseError("COO line must be 'k1 k2 weight'");
    if (a > b || b >= q.dim) throw ParseError("COO entry must satisfy k1 <= k2 < dim");
    if (q.coeffs.count({a, b})) throw ParseError("duplicate COO entry");
    q.coeffs[{a, b}] = detail::parse_real(w);
  }
  return q;
}

inline QuboProblem from_coo(const std::string& text) {
  std::istringstream is(text);
  return read_coo(is);
}

}  // namespace qmaze
