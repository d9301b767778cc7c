#pragma once

// Time-to-solution, success-probability and scaling statistics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "qmaze/errors.hpp"
#include "qmaze/maze.hpp"
#include "qmaze/qubo.hpp"
#include "qmaze/rng.hpp"
#include "qmaze/sampler.hpp"

namespace qmaze {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct SuccessEstimate {
  double p = 0.0;
  Interval ci95;
  int successes = 0;
  int trials = 0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(int successes, int trials, double confidence = 0.95) {
  if (trials < 1) throw InvalidArgument("need at least one trial");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
  const double n = trials;
  const double p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline SuccessEstimate estimate_success_prob(const SampleSet& s, double ground_energy, double tol = 1e-9) {
  SuccessEstimate e;
  for (const auto& r : s.records) {
    e.trials += r.occurrences;
    if (r.energy <= ground_energy + tol) e.successes += r.occurrences;
  }
  if (e.trials < 1) throw InvalidArgument("sample set has no reads");
  e.p = static_cast<double>(e.successes) / e.trials;
  e.ci95 = wilson_interval(e.successes, e.trials);
  return e;
}

struct TtsEstimate {
  double t_anneal = 0.0;
  double p_success = 0.0;
  double target = 0.99;
  double tts = 0.0;
  Interval ci95;
};

namespace detail {
inline double tts_value(double t_anneal, double p, double target) {
  if (p >= target) return t_anneal;
  return t_anneal * std::log(1.0 - target) / std::log(1.0 - p);
}
}  // namespace detail

/// Expected time to observe the ground state at least once with probability
/// `target`, given per-read time and per-read success probability.
inline TtsEstimate tts(double t_anneal, double p_success, double target = 0.99) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target must lie in (0, 1)");
  if (!(t_anneal >= 0.0)) throw InvalidArgument("anneal time must be >= 0");
  if (p_success > 1.0 || std::isnan(p_success)) throw InvalidArgument("success probability must be <= 1");
  if (p_success <= 0.0) throw UndefinedTts("time-to-solution is undefined for zero success probability");
  TtsEstimate e;
  e.t_anneal = t_anneal;
  e.p_success = p_success;
  e.target = target;
  e.tts = detail::tts_value(t_anneal, p_success, target);
  e.ci95 = {e.tts, e.tts};
  return e;
}

/// As above, propagating a confidence interval on p (upper bound may be
/// infinite when the interval reaches 0).
inline TtsEstimate tts(double t_anneal, double p_success, Interval p_ci, double target) {
  auto e = tts(t_anneal, p_success, target);
  e.ci95.low = detail::tts_value(t_anneal, p_ci.high, target);
  e.ci95.high = p_ci.low > 0.0 ? detail::tts_value(t_anneal, p_ci.low, target)
                               : std::numeric_limits<double>::infinity();
  return e;
}

// ---------------------------------------------------------------------------
// Polynomial least squares

struct FitCoefficient {
  int power = 0;
  double value = 0.0;
  double stderr_ = 0.0;
  Interval ci95;
  double t_stat() const { return stderr_ > 0.0 ? value / stderr_ : std::numeric_limits<double>::infinity(); }
};

struct RegressionFit {
  int degree = 1;
  std::vector<FitCoefficient> coefficients;  // ascending power
  double residual_variance = 0.0;
  int dof = 0;
  int points = 0;

  double coefficient(int power) const { return coefficients.at(static_cast<std::size_t>(power)).value; }
  double predict(double x) const {
    double y = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) y = y * x + it->value;
    return y;
  }
};

inline double student_t_quantile(double prob, int dof) {
  return boost::math::quantile(boost::math::students_t(dof), prob);
}

/// Ordinary least squares on the monomial basis with Student-t 95% intervals.
inline RegressionFit fit_poly(const std::vector<double>& xs, const std::vector<double>& ys, int degree) {
  if (degree < 1) throw InvalidArgument("degree must be >= 1");
  if (xs.size() != ys.size()) throw LengthMismatch("xs and ys differ in length");
  const int n = static_cast<int>(xs.size());
  const int k = degree + 1;
  if (n <= k) throw SingularFit("need more points than coefficients");

  Eigen::MatrixXd design(n, k);
  Eigen::VectorXd y(n);
  for (int r = 0; r < n; ++r) {
    double v = 1.0;
    for (int c = 0; c < k; ++c, v *= xs[static_cast<std::size_t>(r)]) design(r, c) = v;
    y(r) = ys[static_cast<std::size_t>(r)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k) throw SingularFit("design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;

  RegressionFit fit;
  fit.degree = degree;
  fit.points = n;
  fit.dof = n - k;
  fit.residual_variance = resid.squaredNorm() / fit.dof;
  const Eigen::MatrixXd gram_inv = (design.transpose() * design).inverse();
  const double tq = student_t_quantile(0.975, fit.dof);
  for (int c = 0; c < k; ++c) {
    FitCoefficient fc;
    fc.power = c;
    fc.value = beta(c);
    fc.stderr_ = std::sqrt(std::max(0.0, fit.residual_variance * gram_inv(c, c)));
    fc.ci95 = {fc.value - tq * fc.stderr_, fc.value + tq * fc.stderr_};
    fit.coefficients.push_back(fc);
  }
  return fit;
}

inline nlohmann::json fit_to_json(const RegressionFit& f) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : f.coefficients) {
    const double t = c.t_stat();
    coeffs.push_back({{"power", c.power},
                      {"value", c.value},
                      {"stderr", c.stderr_},
                      {"ci95", {c.ci95.low, c.ci95.high}},
                      {"t_stat", std::isfinite(t) ? nlohmann::json(t) : nlohmann::json(nullptr)}});
  }
  return {{"degree", f.degree},
          {"points", f.points},
          {"dof", f.dof},
          {"residual_variance", f.residual_variance},
          {"coefficients", coeffs}};
}

// ---------------------------------------------------------------------------
// Moving-average increase rate

/// Simple moving averages of `window` consecutive times, each divided by the
/// first average.
inline std::vector<double> sma_increase_rate(const std::vector<double>& times, int window = 10) {
  if (window < 1) throw InvalidArgument("window must be >= 1");
  if (static_cast<int>(times.size()) < window) throw TooShort("fewer solve times than the averaging window");
  std::vector<double> sma;
  for (std::size_t i = 0; i + static_cast<std::size_t>(window) <= times.size(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < window; ++k) sum += times[i + static_cast<std::size_t>(k)];
    sma.push_back(sum / window);
  }
  std::vector<double> ratio;
  ratio.reserve(sma.size());
  for (double v : sma) ratio.push_back(v / sma.front());
  return ratio;
}

// ---------------------------------------------------------------------------
// Scaling benchmark

struct BenchConfig {
  std::vector<std::string> solvers;  // classic-bar, classic-wall, classic-hunt, sa, sqa
  int n_min = 1;
  int n_max = 1;
  int reps = 10;
  std::uint64_t seed = 0;
  double lambda1 = 2.0;
  double lambda2 = 2.0;
  AnnealParams anneal{};
  double target = 0.99;

  void validate() const {
    if (solvers.empty()) throw InvalidArgument("no solvers selected");
    for (const auto& s : solvers)
      if (s != "classic-bar" && s != "classic-wall" && s != "classic-hunt" && s != "sa" && s != "sqa")
        throw InvalidArgument("unknown solver '" + s + "'");
    if (n_min < 1 || n_max < n_min) throw InvalidArgument("empty N range");
    if (reps < 1) throw InvalidArgument("reps must be >= 1");
    anneal.validate();
  }
};

struct BenchRow {
  std::string solver;
  int n = 0;
  int reps = 0;
  double mean_seconds = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_success = 1.0;
  double tts_seconds = 0.0;  // NaN when undefined
};

inline Interval mean_ci95(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, mean};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  const double tq = student_t_quantile(0.975, static_cast<int>(v.size()) - 1);
  return {mean - tq * se, mean + tq * se};
}

/// Times every (solver, N) cell sequentially. Classical solvers report the
/// mean generation time; samplers additionally report pooled success
/// probability against the zero ground energy and per-read TTS.
inline std::vector<BenchRow> run_scaling_bench(const BenchConfig& cfg) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (const auto& solver : cfg.solvers) {
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
      BenchRow row;
      row.solver = solver;
      row.n = n;
      row.reps = cfg.reps;
      std::vector<double> times;
      const bool sampler = solver == "sa" || solver == "sqa";
      const QuboProblem q = sampler ? build_base_qubo(n, cfg.lambda1, cfg.lambda2) : QuboProblem{};
      int successes = 0, trials = 0;
      double per_read = 0.0;
      for (int r = 0; r < cfg.reps; ++r) {
        const auto seed = derive_seed(cfg.seed, {stream::kBench, static_cast<std::uint64_t>(n),
                                                 static_cast<std::uint64_t>(r)});
        if (sampler) {
          AnnealParams p = cfg.anneal;
          p.seed = seed;
          const auto set = solver == "sa" ? sample_sa(q, p) : sample_sqa(q, p);
          times.push_back(set.total_time);
          per_read += set.per_read_time;
          const auto est = estimate_success_prob(set, 0.0);
          successes += est.successes;
          trials += est.trials;
        } else {
          const auto t0 = clock::now();
          Maze m = solver == "classic-bar"    ? generate_bar_tipping(n, seed)
                   : solver == "classic-wall" ? generate_wall_extending(n, seed)
                                              : generate_hunt_and_kill(n, seed);
          times.push_back(std::chrono::duration<double>(clock::now() - t0).count());
          if (m.side() != grid_side(n)) throw Error("generator produced wrong grid size");
        }
      }
      const auto ci = mean_ci95(times);
      row.mean_seconds = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
      row.ci_low = ci.low;
      row.ci_high = ci.high;
      if (sampler) {
        row.p_success = static_cast<double>(successes) / trials;
        row.tts_seconds = row.p_success > 0.0 ? tts(per_read / cfg.reps, row.p_success, cfg.target).tts
                                              : std::numeric_limits<double>::quiet_NaN();
      } else {
        row.p_success = 1.0;
        row.tts_seconds = row.mean_seconds;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline constexpr const char* kBenchCsvHeader = "solver,n,reps,mean_seconds,ci_low,ci_high,p_success,tts_seconds";

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << kBenchCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.solver << ',' << r.n << ',' << r.reps << ',' << detail::format_real(r.mean_seconds) << ','
       << detail::format_real(r.ci_low) << ',' << detail::format_real(r.ci_high) << ','
       << detail::format_real(r.p_success) << ',' << detail::format_real(r.tts_seconds) << '\n';
  }
}

inline std::vector<BenchRow> read_bench_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBenchCsvHeader) throw ParseError("unexpected CSV header");
  std::vector<BenchRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ParseError("CSV row must have 8 fields");
    BenchRow r;
    r.solver = f[0];
    try {
      r.n = std::stoi(f[1]);
      r.reps = std::stoi(f[2]);
    } catch (const std::exception&) {
      throw ParseError("invalid integer in CSV row");
    }
    r.mean_seconds = detail::parse_real(f[3]);
    r.ci_low = detail::parse_real(f[4]);
    r.ci_high = detail::parse_real(f[5]);
    r.p_success = detail::parse_real(f[6]);
    r.tts_seconds = detail::parse_real(f[7]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace qmaze
