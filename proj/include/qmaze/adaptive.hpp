#pragma once

#include <cstdint>
#include <string>

#include "qmaze/maze.hpp"
#include "qmaze/qubo.hpp"
#include "qmaze/sampler.hpp"
#include "qmaze/update_state.hpp"

namespace qmaze {

enum class SamplerKind { SA, SQA };

inline SampleSet run_sampler(SamplerKind kind, const QuboProblem& q, const AnnealParams& p) {
  return kind == SamplerKind::SQA ? sample_sqa(q, p) : sample_sa(q, p);
}

inline constexpr int kMaxHalvings = 5;
/// Fallback level reported when the update term had to be dropped entirely.
inline constexpr int kFallbackBaseOnly = kMaxHalvings + 1;

struct GeneratedMaze {
  Maze maze;
  BarAssignment assignment;
  double energy = 0.0;
  int fallback_level = 0;  // 0 = full update weights, k = weights halved k times
};

/// Samples `q` and decodes the best feasible record; NotFound if none.
inline GeneratedMaze generate_from_qubo(const QuboProblem& q, const AnnealParams& anneal,
                                        SamplerKind kind = SamplerKind::SA) {
  const auto samples = run_sampler(kind, q, anneal);
  auto best = best_feasible(samples, q);
  GeneratedMaze g;
  g.maze = assignment_to_maze(best.assignment, anneal.seed);
  g.assignment = std::move(best.assignment);
  g.energy = best.energy;
  return g;
}

/// Generates the next maze from base + update term. If no read is feasible
/// the update weights are halved (up to kMaxHalvings times) for this build
/// only, and finally dropped.
inline GeneratedMaze next_maze(const UpdateState& s, const QuboProblem& base, const AnnealParams& anneal,
                               SamplerKind kind = SamplerKind::SA) {
  if (s.dim != base.dim) throw DimMismatch("update state dimension does not match QUBO");
  UpdateState scaled = s;
  for (int level = 0; level <= kMaxHalvings; ++level) {
    try {
      auto g = generate_from_qubo(apply_update_term(base, scaled), anneal, kind);
      g.fallback_level = level;
      return g;
    } catch (const NotFound&) {
      scaled.lambda_update1 *= 0.5;
      scaled.lambda_update2 *= 0.5;
    }
  }
  try {
    auto g = generate_from_qubo(base, anneal, kind);
    g.fallback_level = kFallbackBaseOnly;
    return g;
  } catch (const NotFound&) {
    throw Unreachable("base QUBO produced no feasible sample; increase sweeps or reads");
  }
}

}  // namespace qmaze
