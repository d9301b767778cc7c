// qmaze: generate, check, solve and benchmark bar-tipping mazes; run bot
// sets; serve play sessions over HTTP.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qmaze/adaptive.hpp"
#include "qmaze/benchmark.hpp"
#include "qmaze/errors.hpp"
#include "qmaze/maze.hpp"
#include "qmaze/qubo.hpp"
#include "qmaze/sampler.hpp"
#include "qmaze/server.hpp"
#include "qmaze/session.hpp"

namespace {

using namespace qmaze;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Maze load_maze(const std::string& path) {
  const auto text = slurp(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return maze_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed maze JSON: ") + e.what());
    }
  }
  return parse_ascii(text);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::pair<int, int> parse_range(const std::string& s) {
  const auto parts = split(s, ':');
  try {
    if (parts.size() == 1) return {std::stoi(parts[0]), std::stoi(parts[0])};
    if (parts.size() == 2) return {std::stoi(parts[0]), std::stoi(parts[1])};
  } catch (const std::exception&) {
  }
  throw InvalidArgument("range must look like 'min:max'");
}

BotProfile parse_profile(const std::string& s) {
  BotProfile p;
  for (const auto& kv : split(s, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("profile entries must be key=value");
    const auto key = kv.substr(0, eq);
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("profile value for '" + key + "' is not a number");
    }
    if (key == "c" || key == "per_cell") p.per_cell = v;
    else if (key == "sigma") p.sigma = v;
    else if (key == "min" || key == "min_time") p.min_time = v;
    else throw InvalidArgument("unknown profile key '" + key + "'");
  }
  return p;
}

struct Options {
  std::uint64_t seed = 0;
  bool json = false;
  bool ascii = false;
  std::string out;

  int n = 9;
  std::string algo = "bar";
  double lambda1 = 2.0;
  double lambda2 = 2.0;
  double lambda_update1 = 0.15;
  double lambda_update2 = 0.30;
  double a = 0.05;
  int sweeps = 1000;
  int reads = 1000;
  int threads = 1;

  std::string in;
  std::string solvers = "classic-bar";
  std::string n_range = "2:10";
  int reps = 10;
  std::string csv;
  int degree = 2;
  std::string solver_filter;
  std::string column = "mean_seconds";
  int mazes = 30;
  bool update_enabled = true;
  std::string profile;
  std::string addr;
  std::string data_dir;
};

AnnealParams anneal_from(const Options& o) {
  AnnealParams p;
  p.sweeps = o.sweeps;
  p.reads = o.reads;
  p.seed = o.seed;
  p.threads = o.threads;
  return p;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::trunc);
  if (!f) throw Error("cannot write '" + o.out + "'");
  f << text;
}

int cmd_generate(const Options& o) {
  if (o.n < 1) throw InvalidArgument("--n must be >= 1");
  Maze m;
  if (o.algo == "bar") m = generate_bar_tipping(o.n, o.seed);
  else if (o.algo == "wall") m = generate_wall_extending(o.n, o.seed);
  else if (o.algo == "hunt") m = generate_hunt_and_kill(o.n, o.seed);
  else if (o.algo == "qubo-sa" || o.algo == "qubo-sqa") {
    const auto q = build_base_qubo(o.n, o.lambda1, o.lambda2);
    const auto kind = o.algo == "qubo-sa" ? SamplerKind::SA : SamplerKind::SQA;
    m = generate_from_qubo(q, anneal_from(o), kind).maze;
  } else {
    throw InvalidArgument("unknown --algo '" + o.algo + "'");
  }
  emit(o, o.json ? maze_to_json(m).dump() + "\n" : render_ascii(m));
  return 0;
}

int cmd_validate(const Options& o) {
  const auto r = validate_perfect(load_maze(o.in));
  if (o.json) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& d : r.violations) v.push_back({{"kind", std::string(to_string(d.kind))}, {"detail", d.detail}});
    emit(o, nlohmann::json{{"perfect", r.is_perfect},
                           {"connected", r.connected},
                           {"path_cells", r.path_cell_count},
                           {"edges", r.edge_count},
                           {"violations", v}}
                    .dump() +
                "\n");
    return 0;
  }
  std::ostringstream ss;
  ss << "perfect: " << (r.is_perfect ? "true" : "false") << "\n"
     << "connected: " << (r.connected ? "true" : "false") << "\n"
     << "path_cells: " << r.path_cell_count << "\n"
     << "edges: " << r.edge_count << "\n";
  for (const auto& d : r.violations) ss << "violation: " << to_string(d.kind) << ": " << d.detail << "\n";
  emit(o, ss.str());
  return 0;
}

int cmd_solve(const Options& o) {
  const auto path = solve_shortest_path(load_maze(o.in));
  if (o.json) {
    nlohmann::json p = nlohmann::json::array();
    for (auto c : path) p.push_back({c.row, c.col});
    emit(o, nlohmann::json{{"length", path.size()}, {"path", p}}.dump() + "\n");
    return 0;
  }
  std::ostringstream ss;
  ss << "length: " << path.size() << "\n";
  for (auto c : path) ss << c.row << ' ' << c.col << "\n";
  emit(o, ss.str());
  return 0;
}

int cmd_bench(const Options& o) {
  BenchConfig cfg;
  cfg.solvers = split(o.solvers, ',');
  std::tie(cfg.n_min, cfg.n_max) = parse_range(o.n_range);
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  cfg.lambda1 = o.lambda1;
  cfg.lambda2 = o.lambda2;
  cfg.anneal = anneal_from(o);
  const auto rows = run_scaling_bench(cfg);
  std::ostringstream ss;
  write_bench_csv(ss, rows);
  if (!o.csv.empty()) {
    std::ofstream f(o.csv, std::ios::trunc);
    if (!f) throw Error("cannot write '" + o.csv + "'");
    f << ss.str();
    std::cerr << "wrote " << rows.size() << " rows to " << o.csv << "\n";
    return 0;
  }
  emit(o, ss.str());
  return 0;
}

int cmd_fit(const Options& o) {
  std::ifstream in(o.in);
  if (!in) throw InvalidArgument("cannot open '" + o.in + "'");
  const auto rows = read_bench_csv(in);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!o.solver_filter.empty() && r.solver != o.solver_filter) continue;
    double y = 0.0;
    if (o.column == "mean_seconds") y = r.mean_seconds;
    else if (o.column == "tts_seconds") y = r.tts_seconds;
    else throw InvalidArgument("--column must be mean_seconds or tts_seconds");
    if (!std::isfinite(y)) continue;
    xs.push_back(r.n);
    ys.push_back(y);
  }
  auto j = fit_to_json(fit_poly(xs, ys, o.degree));
  j["column"] = o.column;
  if (!o.solver_filter.empty()) j["solver"] = o.solver_filter;
  emit(o, j.dump(2) + "\n");
  return 0;
}

int cmd_bot_run(const Options& o) {
  SessionParams p;
  p.lambda1 = o.lambda1;
  p.lambda2 = o.lambda2;
  p.lambda_update1 = o.lambda_update1;
  p.lambda_update2 = o.lambda_update2;
  p.a = o.a;
  p.anneal = anneal_from(o);
  p.update_enabled = o.update_enabled;
  p.set_size = o.mazes;
  const auto stats = run_bot_set(o.n, p, parse_profile(o.profile), o.seed);
  emit(o, bot_stats_to_json(stats).dump(2) + "\n");
  return 0;
}

int cmd_serve(const Options& o) {
  ServerConfig cfg = server_config_from_env();
  if (!o.addr.empty()) std::tie(cfg.host, cfg.port) = parse_bind_address(o.addr);
  if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
  SessionServer server(cfg.data_dir);
  std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
  if (!server.listen(cfg.host, cfg.port)) throw Error("failed to bind " + cfg.host + ":" + std::to_string(cfg.port));
  return 0;
}

int cmd_export_qubo(const Options& o) {
  emit(o, to_coo(build_base_qubo(o.n, o.lambda1, o.lambda2)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Bar-tipping maze generation via QUBO annealing"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "RNG seed");
  auto* json_flag = app.add_flag("--json", o.json, "JSON output");
  app.add_flag("--ascii", o.ascii, "ASCII output (default)")->excludes(json_flag);
  app.add_option("--out", o.out, "write output to a file instead of stdout");

  auto lambdas = [&](CLI::App* sub) {
    sub->add_option("--lambda1", o.lambda1, "one-direction penalty weight");
    sub->add_option("--lambda2", o.lambda2, "start/goal penalty weight");
  };
  auto anneal = [&](CLI::App* sub) {
    sub->add_option("--sweeps", o.sweeps, "Metropolis sweeps per read");
    sub->add_option("--reads", o.reads, "independent reads");
    sub->add_option("--threads", o.threads, "worker threads for reads (0 = all cores)");
  };

  auto* gen = app.add_subcommand("generate", "generate a maze");
  gen->add_option("--algo", o.algo, "bar, wall, hunt, qubo-sa or qubo-sqa")
      ->check(CLI::IsMember({"bar", "wall", "hunt", "qubo-sa", "qubo-sqa"}));
  gen->add_option("--n", o.n, "bar lattice size");
  lambdas(gen);
  anneal(gen);

  auto* val = app.add_subcommand("validate", "check that a maze is perfect");
  val->add_option("--in", o.in, "maze file (JSON or ASCII)")->required();

  auto* sol = app.add_subcommand("solve", "print the start-goal path");
  sol->add_option("--in", o.in, "maze file (JSON or ASCII)")->required();

  auto* bench = app.add_subcommand("bench", "time generators and samplers over a range of N");
  bench->add_option("--solvers", o.solvers, "comma list of classic-bar, classic-wall, classic-hunt, sa, sqa");
  bench->add_option("--n-range", o.n_range, "min:max");
  bench->add_option("--reps", o.reps, "repetitions per cell");
  bench->add_option("--csv", o.csv, "CSV output file");
  lambdas(bench);
  anneal(bench);

  auto* fit = app.add_subcommand("fit", "least-squares fit of a benchmark CSV");
  fit->add_option("--in", o.in, "benchmark CSV")->required();
  fit->add_option("--degree", o.degree, "polynomial degree");
  fit->add_option("--solver", o.solver_filter, "only rows for this solver");
  fit->add_option("--column", o.column, "mean_seconds or tts_seconds");

  auto* bot = app.add_subcommand("bot-run", "play a full set with the scripted bot");
  bot->add_option("--n", o.n, "bar lattice size");
  bot->add_option("--mazes", o.mazes, "mazes per set");
  bot->add_flag("--update,!--no-update", o.update_enabled, "enable the adaptive update term");
  bot->add_option("--profile", o.profile, "c=0.1,sigma=0.5,min=0.1");
  bot->add_option("--lambda-update1", o.lambda_update1);
  bot->add_option("--lambda-update2", o.lambda_update2);
  bot->add_option("--a", o.a, "sigmoid steepness (1/s)");
  lambdas(bot);
  anneal(bot);

  auto* serve = app.add_subcommand("serve", "run the session HTTP service");
  serve->add_option("--addr", o.addr, "host:port (env QMAZE_ADDR)");
  serve->add_option("--data-dir", o.data_dir, "snapshot directory (env QMAZE_DATA_DIR)");

  auto* exp = app.add_subcommand("export-qubo", "write the base QUBO as COO text");
  exp->add_option("--n", o.n, "bar lattice size");
  lambdas(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*val) return cmd_validate(o);
    if (*sol) return cmd_solve(o);
    if (*bench) return cmd_bench(o);
    if (*fit) return cmd_fit(o);
    if (*bot) return cmd_bot_run(o);
    if (*serve) return cmd_serve(o);
    if (*exp) return cmd_export_qubo(o);
  } catch (const qmaze::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
