#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "qmaze/qubo.hpp"

using namespace qmaze;

namespace {

Bitstring bits_of(std::uint64_t mask, std::size_t dim) {
  Bitstring b;
  b.bits.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) b[k] = (mask >> k) & 1u;
  return b;
}

// Constraint-level count of legal direction grids, written without the QUBO.
long long count_direction_grids(int n) {
  long long total = 1;
  for (int j = 0; j < n; ++j) {
    const int dirs = j == 0 ? 4 : 3;
    // Sequences down a column where no "down" is directly followed by "up".
    long long ends_down = 1, other = dirs - 1;
    for (int i = 1; i < n; ++i) {
      const long long next_down = ends_down + other;
      const long long next_other = ends_down * (dirs - 2) + other * (dirs - 1);
      ends_down = next_down;
      other = next_other;
    }
    total *= ends_down + other;
  }
  return total;
}

// Direct evaluation of the three penalty terms from a bitstring.
double energy_oracle(int n, const Bitstring& b, double l1, double l2) {
  double e = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j < n; ++j) e += b[index_of_bar(n, i, j, 2)] * b[index_of_bar(n, i + 1, j, 0)];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int s = 0;
      for (int d = 0; d < (j == 0 ? 4 : 3); ++d) s += b[index_of_bar(n, i, j, d)];
      e += l1 * (s - 1) * (s - 1);
    }
  }
  int x = 0;
  for (std::size_t l = bar_variable_count(n); l < qubo_dim(n); ++l) x += b[l];
  e += l2 * (x - 2) * (x - 2);
  return e;
}

}  // namespace

TEST(QuboIndex, BarExamples) {
  EXPECT_EQ(index_of_bar(3, 0, 0, 0), 0u);
  EXPECT_EQ(index_of_bar(3, 0, 1, 0), 4u);
  EXPECT_EQ(index_of_bar(3, 1, 0, 2), 12u);
}

TEST(QuboIndex, CandidateExamples) {
  EXPECT_EQ(index_of_sg(3, 0, 0), 30u);
  EXPECT_EQ(index_of_sg(3, 3, 3), 45u);
  EXPECT_EQ(qubo_dim(3), 46u);
  EXPECT_EQ(index_of_sg(1, 1, 1), 7u);
  EXPECT_EQ(qubo_dim(1), 8u);
  EXPECT_EQ(qubo_dim(9), 352u);
}

TEST(QuboIndex, OutOfRange) {
  EXPECT_THROW(index_of_bar(3, 0, 1, 3), OutOfRange);
  EXPECT_THROW(index_of_bar(3, 3, 0, 0), OutOfRange);
  EXPECT_THROW(index_of_sg(3, 4, 0), OutOfRange);
  EXPECT_THROW(index_of_sg(3, 0, -1), OutOfRange);
}

TEST(QuboIndex, BijectionUpToTen) {
  for (int n = 1; n <= 10; ++n) {
    std::set<std::size_t> seen;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int d = 0; d < directions_for_column(j); ++d) {
          const auto k = index_of_bar(n, i, j, d);
          const auto v = bar_of_index(n, k);
          ASSERT_EQ(v.i, i);
          ASSERT_EQ(v.j, j);
          ASSERT_EQ(v.d, d);
          seen.insert(k);
        }
    for (int m = 0; m <= n; ++m)
      for (int c = 0; c <= n; ++c) {
        const auto l = index_of_sg(n, m, c);
        ASSERT_EQ(sg_of_index(n, l), (Coord{m, c}));
        seen.insert(l);
      }
    ASSERT_EQ(seen.size(), qubo_dim(n));
    ASSERT_EQ(*seen.rbegin(), qubo_dim(n) - 1);
  }
}

TEST(BaseQubo, Coefficients) {
  const auto q = build_base_qubo(3, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(q.coefficient(index_of_bar(3, 0, 0, 2), index_of_bar(3, 1, 0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(q.coefficient(index_of_bar(3, 1, 0, 0), index_of_bar(3, 0, 0, 2)), 1.0);
  for (std::size_t l = bar_variable_count(3); l < q.dim; ++l) EXPECT_DOUBLE_EQ(q.coefficient(l, l), -6.0);
  EXPECT_DOUBLE_EQ(q.coefficient(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(q.coefficient(0, 1), 4.0);
  // No bar/candidate couplings in the base model.
  for (const auto& [key, w] : q.coeffs)
    EXPECT_FALSE(key.first < bar_variable_count(3) && key.second >= bar_variable_count(3));
  for (const auto& [key, w] : q.coeffs) EXPECT_LE(key.first, key.second);
}

TEST(BaseQubo, RejectsBadInput) {
  EXPECT_THROW(build_base_qubo(0), InvalidArgument);
  EXPECT_THROW(build_base_qubo(2, 0.0, 2.0), InvalidArgument);
  EXPECT_THROW(build_base_qubo(2, 2.0, -1.0), InvalidArgument);
}

TEST(Energy, AllZeros) {
  for (int n = 1; n <= 5; ++n) {
    const auto q = build_base_qubo(n, 2.0, 3.0);
    Bitstring z;
    z.bits.assign(q.dim, 0);
    EXPECT_DOUBLE_EQ(energy(q, z), 2.0 * n * n + 4.0 * 3.0);
  }
}

TEST(Energy, LengthMismatch) {
  const auto q = build_base_qubo(2);
  Bitstring b;
  b.bits.assign(q.dim - 1, 0);
  EXPECT_THROW(energy(q, b), LengthMismatch);
  EXPECT_THROW(decode(q, b), LengthMismatch);
}

TEST(Energy, DoubleDirectionCostsAtLeastLambda) {
  const auto q = build_base_qubo(2, 2.0, 2.0);
  BarAssignment a{2, {Direction::Right, Direction::Up, Direction::Up, Direction::Up}, {Coord{0, 0}, Coord{2, 1}}};
  auto b = encode(a);
  ASSERT_DOUBLE_EQ(energy(q, b), 0.0);
  b[index_of_bar(2, 0, 0, 3)] = 1;
  EXPECT_GE(energy(q, b), 2.0);
}

TEST(Energy, MatchesDirectOracleOnRandomBitstrings) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 6; ++n) {
    const auto q = build_base_qubo(n, 1.5, 2.5);
    for (int trial = 0; trial < 200; ++trial) {
      Bitstring b;
      b.bits.resize(q.dim);
      for (auto& v : b.bits) v = rng() & 1u;
      EXPECT_NEAR(energy(q, b), energy_oracle(n, b, 1.5, 2.5), 1e-9);
    }
  }
}

TEST(BruteForce, SizeOneHasTwentyFourGroundStates) {
  const auto q = build_base_qubo(1);
  int zero = 0;
  double min_e = 1e9;
  for (std::uint64_t mask = 0; mask < 256; ++mask) {
    const auto b = bits_of(mask, q.dim);
    const double e = energy(q, b);
    min_e = std::min(min_e, e);
    const bool ok = is_feasible(decode(q, b));
    EXPECT_EQ(ok, e == 0.0) << b.to_string();
    zero += e == 0.0;
  }
  EXPECT_EQ(min_e, 0.0);
  EXPECT_EQ(zero, 4 * 6);
}

TEST(BruteForce, SizeTwoMatchesConstraintCount) {
  const auto q = build_base_qubo(2);
  long long zero = 0;
  ASSERT_EQ(q.dim, 23u);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << q.dim); ++mask) {
    const auto b = bits_of(mask, q.dim);
    const double e = energy(q, b);
    ASSERT_GE(e, 0.0);
    const bool ok = is_feasible(decode(q, b));
    ASSERT_EQ(ok, e == 0.0) << b.to_string();
    zero += ok;
  }
  EXPECT_EQ(count_direction_grids(2), 120);
  EXPECT_EQ(zero, count_direction_grids(2) * 36);
}

TEST(Decode, RoundTripsEncode) {
  const auto q = build_base_qubo(1);
  std::set<std::string> seen;
  for (std::uint64_t mask = 0; mask < 256; ++mask) {
    const auto b = bits_of(mask, q.dim);
    const auto r = decode(q, b);
    if (!is_feasible(r)) continue;
    const auto& a = std::get<BarAssignment>(r);
    EXPECT_TRUE(assignment_problems(a).empty());
    EXPECT_EQ(encode(a), b);
    seen.insert(b.to_string());
  }
  EXPECT_EQ(seen.size(), 24u);
}

TEST(Decode, ReportsStartGoalCount) {
  const auto q = build_base_qubo(2);
  BarAssignment a{2, {Direction::Right, Direction::Up, Direction::Up, Direction::Up}, {Coord{0, 0}, Coord{2, 1}}};
  auto b = encode(a);
  b[index_of_sg(2, 1, 1)] = 1;
  const auto r = decode(q, b);
  ASSERT_FALSE(is_feasible(r));
  const auto& v = std::get<std::vector<Violation>>(r);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::StartGoalCount);
  EXPECT_EQ(v[0].detail, "start/goal count = 3");
}

TEST(Decode, ReportsOverlap) {
  const auto q = build_base_qubo(2);
  BarAssignment a{2, {Direction::Down, Direction::Up, Direction::Up, Direction::Up}, {Coord{0, 0}, Coord{2, 1}}};
  const auto r = decode(q, encode(a));
  ASSERT_FALSE(is_feasible(r));
  const auto& v = std::get<std::vector<Violation>>(r);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::Overlap);
  EXPECT_NE(v[0].detail.find("overlap"), std::string::npos);
  EXPECT_DOUBLE_EQ(energy(q, encode(a)), 1.0);
}

TEST(Decode, ReportsDirectionCount) {
  const auto q = build_base_qubo(2);
  Bitstring b;
  b.bits.assign(q.dim, 0);
  b[index_of_sg(2, 0, 0)] = 1;
  b[index_of_sg(2, 0, 1)] = 1;
  const auto r = decode(q, b);
  ASSERT_FALSE(is_feasible(r));
  EXPECT_EQ(std::get<std::vector<Violation>>(r).size(), 4u);
  EXPECT_EQ(std::get<std::vector<Violation>>(r)[0].detail, "bar (0,0) direction count = 0");
}

TEST(UpdateTerm, ZeroMatrixIsIdentity) {
  const auto q = build_base_qubo(2);
  auto u = init_update_state(2, 0.05, 0.15, 0.30, 1);
  std::fill(u.matrix.begin(), u.matrix.end(), 0.0);
  EXPECT_EQ(apply_update_term(q, u), q);
}

TEST(UpdateTerm, MaskedBlocks) {
  const auto q = build_base_qubo(2);
  const auto u = init_update_state(2, 0.05, 0.0, 1.0, 3);
  const auto out = apply_update_term(q, u);
  const std::size_t split = bar_variable_count(2);
  for (std::size_t a = 0; a < q.dim; ++a)
    for (std::size_t b = a; b < q.dim; ++b) {
      const double delta = out.coefficient(a, b) - q.coefficient(a, b);
      if (a < split) EXPECT_EQ(delta, 0.0) << a << "," << b;
      else {
        const double want = a == b ? u.at(a, a) : u.at(a, b) + u.at(b, a);
        EXPECT_NEAR(delta, want, 1e-12);
      }
    }
  EXPECT_EQ(out.offset, q.offset);
}

TEST(UpdateTerm, HandComputedSizeOne) {
  const auto q = build_base_qubo(1);
  UpdateState u = init_update_state(1, 0.05, 0.15, 0.30, 0);
  std::fill(u.matrix.begin(), u.matrix.end(), 0.0);
  for (std::size_t k = 0; k < 8; ++k) u.at(k, k) = 1.0;
  u.at(0, 5) = 1.0;  // bar/candidate block
  u.at(5, 0) = 0.5;
  u.at(6, 4) = 1.0;  // candidate/candidate block, lower triangle
  u.at(1, 2) = -1.0;  // bar/bar block
  const auto out = apply_update_term(q, u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(out.coefficient(k, k), -2.0 + 0.15, 1e-12);
  for (std::size_t k = 4; k < 8; ++k) EXPECT_NEAR(out.coefficient(k, k), -6.0 + 0.30, 1e-12);
  EXPECT_NEAR(out.coefficient(0, 5), 0.15 * 1.5, 1e-12);
  EXPECT_NEAR(out.coefficient(4, 6), 4.0 + 0.30, 1e-12);
  EXPECT_NEAR(out.coefficient(1, 2), 4.0 - 0.15, 1e-12);
  EXPECT_EQ(out.coefficient(0, 4), 0.0);
  EXPECT_EQ(out.coeffs.size(), q.coeffs.size() + 1);  // only (0,5) is new
  // The input stays untouched.
  EXPECT_EQ(q, build_base_qubo(1));
}

TEST(UpdateTerm, DimMismatch) {
  const auto q = build_base_qubo(2);
  const auto u = init_update_state(3, 0.05, 0.15, 0.30, 0);
  EXPECT_THROW(apply_update_term(q, u), DimMismatch);
}

TEST(UpdateTerm, EnergyEqualsBasePlusQuadraticForm) {
  const auto q = build_base_qubo(3);
  const auto u = init_update_state(3, 0.05, 0.15, 0.30, 9);
  const auto out = apply_update_term(q, u);
  const std::size_t split = bar_variable_count(3);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Bitstring b;
    b.bits.resize(q.dim);
    for (auto& v : b.bits) v = rng() & 1u;
    double extra = 0.0;
    for (std::size_t r = 0; r < q.dim; ++r)
      for (std::size_t c = 0; c < q.dim; ++c)
        if (b[r] && b[c]) extra += (r >= split && c >= split ? 0.30 : 0.15) * u.at(r, c);
    EXPECT_NEAR(energy(out, b), energy(q, b) + extra, 1e-9);
  }
}

TEST(Storage, CanonicalUpperTriangle) {
  QuboProblem a;
  a.n = 1;
  a.dim = 8;
  a.add(5, 2, 1.0);
  a.add(2, 5, 0.5);
  EXPECT_EQ(a.coeffs.size(), 1u);
  EXPECT_DOUBLE_EQ(a.coefficient(2, 5), 1.5);
  EXPECT_THROW(a.add(0, 8, 1.0), OutOfRange);
}

TEST(Coo, RoundTripIsExact) {
  const auto q = apply_update_term(build_base_qubo(3, 2.0, 2.0), init_update_state(3, 0.05, 0.15, 0.30, 4));
  const auto text = to_coo(q);
  const auto back = from_coo(text);
  EXPECT_EQ(back.n, q.n);
  EXPECT_EQ(back.dim, q.dim);
  EXPECT_EQ(back.offset, q.offset);
  EXPECT_EQ(back.coeffs, q.coeffs);
  EXPECT_EQ(to_coo(back), text);
  EXPECT_EQ(text.substr(0, text.find('\n')), "3 46 " + detail::format_real(q.offset));
}

TEST(Coo, RejectsMalformed) {
  EXPECT_THROW(from_coo(""), ParseError);
  EXPECT_THROW(from_coo("1 9 6\n"), ParseError);
  EXPECT_THROW(from_coo("1 8 6\n3 2 1.0\n"), ParseError);
  EXPECT_THROW(from_coo("1 8 6\n0 8 1.0\n"), ParseError);
  EXPECT_THROW(from_coo("1 8 6\n0 1 1.0\n0 1 2.0\n"), ParseError);
  EXPECT_THROW(from_coo("1 8 6\n0 1 abc\n"), ParseError);
}

TEST(BitstringText, RoundTrip) {
  const auto b = Bitstring::from_string("01101");
  EXPECT_EQ(b.to_string(), "01101");
  EXPECT_THROW(Bitstring::from_string("01x"), ParseError);
}
