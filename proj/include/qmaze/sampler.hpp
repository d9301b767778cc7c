#pragma once

// In-process annealers over a QuboProblem: single-spin Metropolis simulated
// annealing and path-integral (Trotter replica) simulated quantum annealing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmaze/errors.hpp"
#include "qmaze/qubo.hpp"
#include "qmaze/rng.hpp"

namespace qmaze {

enum class Interpolation { Linear, Geometric };

struct AnnealParams {
  int sweeps = 1000;
  int reads = 1000;
  std::uint64_t seed = 0;
  double beta_min = 0.1;
  double beta_max = 10.0;
  Interpolation interpolation = Interpolation::Geometric;
  int trotter_slices = 8;
  double gamma_max = 3.0;
  double gamma_min = 0.01;
  int threads = 1;  // 0 = hardware concurrency

  void validate(bool quantum = false) const {
    if (sweeps < 1) throw InvalidArgument("sweeps must be >= 1");
    if (reads < 1) throw InvalidArgument("reads must be >= 1");
    if (!(beta_min > 0.0) || !(beta_min < beta_max)) throw InvalidArgument("need 0 < beta_min < beta_max");
    if (threads < 0) throw InvalidArgument("threads must be >= 0");
    if (quantum) {
      if (trotter_slices < 2) throw InvalidArgument("trotter_slices must be >= 2");
      if (gamma_max < 0.0 || gamma_min < 0.0 || gamma_min > gamma_max)
        throw InvalidArgument("need 0 <= gamma_min <= gamma_max");
    }
  }

  double beta_at(int sweep) const {
    const double f = sweeps == 1 ? 1.0 : static_cast<double>(sweep) / (sweeps - 1);
    if (interpolation == Interpolation::Linear) return beta_min + f * (beta_max - beta_min);
    return beta_min * std::pow(beta_max / beta_min, f);
  }
  double gamma_at(int sweep) const {
    const double f = sweeps == 1 ? 1.0 : static_cast<double>(sweep) / (sweeps - 1);
    return gamma_max + f * (gamma_min - gamma_max);
  }
};

struct SampleRecord {
  Bitstring bits;
  double energy = 0.0;
  int occurrences = 1;
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct SampleSet {
  std::vector<SampleRecord> records;  // distinct bitstrings, in first-read order
  double per_read_time = 0.0;         // mean wall seconds per read
  double total_time = 0.0;

  int total_reads() const {
    int r = 0;
    for (const auto& rec : records) r += rec.occurrences;
    return r;
  }
};

namespace detail {

/// Off-diagonal couplings plus the linear terms. Sparse problems use CSR
/// rows; problems with an update term are nearly dense and use a full
/// matrix so the field update is a contiguous loop.
struct CouplingGraph {
  std::size_t dim = 0;
  std::vector<double> linear;
  bool dense = false;
  std::vector<double> matrix;  // dense: dim x dim, zero diagonal
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> neighbour;
  std::vector<double> weight;

  explicit CouplingGraph(const QuboProblem& q) : dim(q.dim), linear(q.dim, 0.0), row_start(q.dim + 1, 0) {
    std::size_t off_diagonal = 0;
    for (const auto& [key, w] : q.coeffs) {
      if (key.first == key.second) {
        linear[key.first] += w;
      } else {
        ++off_diagonal;
        ++row_start[key.first + 1];
        ++row_start[key.second + 1];
      }
    }
    dense = 4 * off_diagonal > dim * dim;
    if (dense) {
      matrix.assign(dim * dim, 0.0);
      for (const auto& [key, w] : q.coeffs) {
        if (key.first == key.second) continue;
        matrix[key.first * dim + key.second] = w;
        matrix[key.second * dim + key.first] = w;
      }
      return;
    }
    for (std::size_t k = 0; k < dim; ++k) row_start[k + 1] += row_start[k];
    neighbour.resize(row_start.back());
    weight.resize(row_start.back());
    std::vector<std::size_t> fill(row_start.begin(), row_start.end() - 1);
    for (const auto& [key, w] : q.coeffs) {
      if (key.first == key.second) continue;
      neighbour[fill[key.first]] = key.second;
      weight[fill[key.first]++] = w;
      neighbour[fill[key.second]] = key.first;
      weight[fill[key.second]++] = w;
    }
  }

  /// Energy change of switching each variable on, given the others.
  std::vector<double> local_fields(const std::vector<std::uint8_t>& x) const {
    std::vector<double> f(linear);
    for (std::size_t k = 0; k < dim; ++k) {
      double acc = 0.0;
      if (dense) {
        const double* row = &matrix[k * dim];
        for (std::size_t j = 0; j < dim; ++j) acc += x[j] ? row[j] : 0.0;
      } else {
        for (std::size_t e = row_start[k]; e < row_start[k + 1]; ++e)
          if (x[neighbour[e]]) acc += weight[e];
      }
      f[k] += acc;
    }
    return f;
  }

  void flip(std::vector<std::uint8_t>& x, std::vector<double>& field, std::size_t k) const {
    x[k] ^= 1;
    const double sign = x[k] ? 1.0 : -1.0;
    if (dense) {
      const double* row = &matrix[k * dim];
      double* f = field.data();
      for (std::size_t j = 0; j < dim; ++j) f[j] += sign * row[j];
      return;
    }
    for (std::size_t e = row_start[k]; e < row_start[k + 1]; ++e) field[neighbour[e]] += sign * weight[e];
  }
};

/// Uniform draw in [0, 1) with 53 random bits.
inline double unit_draw(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Metropolis test on a dimensionless action change. Above kRejectAbove the
/// acceptance probability is below the resolution of a 53-bit draw.
inline constexpr double kRejectAbove = 37.0;

inline bool metropolis_accept(double delta, Rng& rng) {
  if (delta <= 0.0) return true;
  if (delta > kRejectAbove) return false;
  return unit_draw(rng) < std::exp(-delta);
}

inline std::vector<std::uint8_t> random_bits(std::size_t dim, Rng& rng) {
  std::vector<std::uint8_t> x(dim);
  std::bernoulli_distribution coin(0.5);
  for (auto& v : x) v = static_cast<std::uint8_t>(coin(rng));
  return x;
}

/// Runs `reads` independent reads, possibly on several threads, and merges
/// them in read-index order.
template <typename ReadFn>
SampleSet run_reads(const QuboProblem& q, const AnnealParams& p, ReadFn&& one_read) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  std::vector<Bitstring> out(static_cast<std::size_t>(p.reads));
  std::vector<double> seconds(static_cast<std::size_t>(p.reads), 0.0);

  auto work = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      const auto s0 = clock::now();
      auto rng = make_rng(p.seed, {stream::kRead, static_cast<std::uint64_t>(r)});
      out[static_cast<std::size_t>(r)] = one_read(rng);
      seconds[static_cast<std::size_t>(r)] = std::chrono::duration<double>(clock::now() - s0).count();
    }
  };

  int threads = p.threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : p.threads;
  threads = std::min(threads, p.reads);
  if (threads <= 1) {
    work(0, p.reads);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (p.reads + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int b = t * chunk;
      const int e = std::min(p.reads, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }

  SampleSet set;
  std::map<Bitstring, std::size_t> slot;
  for (auto& bits : out) {
    auto [it, fresh] = slot.try_emplace(bits, set.records.size());
    if (fresh) {
      const double e = energy(q, bits);
      set.records.push_back({std::move(bits), e, 1});
    } else {
      ++set.records[it->second].occurrences;
    }
  }
  double sum = 0.0;
  for (double s : seconds) sum += s;
  set.per_read_time = sum / p.reads;
  set.total_time = std::chrono::duration<double>(clock::now() - t0).count();
  return set;
}

}  // namespace detail

/// Simulated annealing: each read starts from uniformly random bits and
/// performs `sweeps` in-order Metropolis passes over every variable while
/// beta follows the schedule. The final configuration is recorded.
inline SampleSet sample_sa(const QuboProblem& q, const AnnealParams& p) {
  p.validate();
  const detail::CouplingGraph graph(q);
  std::vector<double> betas(static_cast<std::size_t>(p.sweeps));
  for (int s = 0; s < p.sweeps; ++s) betas[static_cast<std::size_t>(s)] = p.beta_at(s);

  return detail::run_reads(q, p, [&](Rng& rng) {
    auto x = detail::random_bits(q.dim, rng);
    auto field = graph.local_fields(x);
    for (double beta : betas) {
      for (std::size_t k = 0; k < q.dim; ++k) {
        const double delta = x[k] ? -field[k] : field[k];
        if (detail::metropolis_accept(beta * delta, rng)) graph.flip(x, field, k);
      }
    }
    return Bitstring{std::move(x)};
  });
}

/// Inter-slice coupling of the Suzuki-Trotter decomposition with slice
/// weight beta. A vanishing transverse field decouples the slices.
inline double trotter_coupling(double beta, double gamma) {
  if (gamma <= 0.0) return 0.0;
  const double x = beta * gamma;
  return 0.5 * std::log(1.0 / std::tanh(x));
}

/// Path-integral simulated quantum annealing over `trotter_slices` replicas
/// on a ring. Slice k is weighted by beta * E(x_k); neighbouring slices are
/// coupled ferromagnetically (in spin variables) with trotter_coupling. The
/// transverse field decreases linearly from gamma_max to gamma_min. Each
/// read records its lowest-energy slice.
inline SampleSet sample_sqa(const QuboProblem& q, const AnnealParams& p) {
  p.validate(true);
  const detail::CouplingGraph graph(q);
  const int slices = p.trotter_slices;

  return detail::run_reads(q, p, [&](Rng& rng) {
    std::vector<std::vector<std::uint8_t>> x;
    std::vector<std::vector<double>> field;
    for (int s = 0; s < slices; ++s) {
      x.push_back(detail::random_bits(q.dim, rng));
      field.push_back(graph.local_fields(x.back()));
    }
    for (int sweep = 0; sweep < p.sweeps; ++sweep) {
      const double beta = p.beta_at(sweep);
      const double coupling = trotter_coupling(beta, p.gamma_at(sweep));
      for (int s = 0; s < slices; ++s) {
        auto& xs = x[static_cast<std::size_t>(s)];
        auto& fs = field[static_cast<std::size_t>(s)];
        const auto& up = x[static_cast<std::size_t>((s + slices - 1) % slices)];
        const auto& down = x[static_cast<std::size_t>((s + 1) % slices)];
        for (std::size_t k = 0; k < q.dim; ++k) {
          const double classical = xs[k] ? -fs[k] : fs[k];
          const int spin = xs[k] ? 1 : -1;
          const int neighbours = (up[k] ? 1 : -1) + (down[k] ? 1 : -1);
          const double delta = beta * classical + 2.0 * coupling * spin * neighbours;
          if (detail::metropolis_accept(delta, rng)) graph.flip(xs, fs, k);
        }
      }
    }
    std::size_t best = 0;
    double best_e = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < x.size(); ++s) {
      const double e = energy(q, Bitstring{x[s]});
      if (e < best_e) {
        best_e = e;
        best = s;
      }
    }
    return Bitstring{std::move(x[best])};
  });
}

struct FeasibleSample {
  BarAssignment assignment;
  Bitstring bits;
  double energy = 0.0;
};

/// Lowest-energy record that decodes; earlier records win ties.
inline FeasibleSample best_feasible(const SampleSet& s, const QuboProblem& q) {
  std::optional<FeasibleSample> best;
  for (const auto& rec : s.records) {
    if (best && !(rec.energy < best->energy)) continue;
    auto decoded = decode(q, rec.bits);
    if (auto* a = std::get_if<BarAssignment>(&decoded)) best = FeasibleSample{*a, rec.bits, rec.energy};
  }
  if (!best) throw NotFound("no sample decodes to a feasible bar assignment");
  return *best;
}

inline nlohmann::json sample_set_to_json(const SampleSet& s) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : s.records)
    records.push_back({{"bitstring", r.bits.to_string()}, {"energy", r.energy}, {"occurrences", r.occurrences}});
  return {{"records", records}, {"per_read_time", s.per_read_time}, {"total_time", s.total_time}};
}

inline SampleSet sample_set_from_json(const nlohmann::json& j) {
  try {
    SampleSet s;
    for (const auto& r : j.at("records"))
      s.records.push_back({Bitstring::from_string(r.at("bitstring").get<std::string>()), r.at("energy").get<double>(),
                           r.at("occurrences").get<int>()});
    s.per_read_time = j.at("per_read_time").get<double>();
    s.total_time = j.at("total_time").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed sample set JSON: ") + e.what());
  }
}

}  // namespace qmaze
