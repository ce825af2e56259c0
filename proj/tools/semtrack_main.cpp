// Command-line pipeline around the semtrack library: synthetic cascade
// generation, real-data ingestion, topology tracking, and evaluation.
//
// Every command writes its outputs plus a manifest.json echoing the full
// configuration, seeds, and paths needed to reproduce the run. Errors exit
// nonzero with a single machine-parsable `E_CODE: message` line on stderr.

#include "semtrack/ingest.hpp"
#include "semtrack/io.hpp"
#include "semtrack/metrics.hpp"
#include "semtrack/rng.hpp"
#include "semtrack/simulator.hpp"
#include "semtrack/solvers.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace semtrack;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

void write_manifest(const fs::path& out_dir, const std::string& command, json options,
                    json inputs, json outputs, double duration_seconds) {
  json manifest;
  manifest["command"] = command;
  manifest["artifact_version"] = kVersion;
  manifest["options"] = std::move(options);
  manifest["inputs"] = std::move(inputs);
  manifest["outputs"] = std::move(outputs);
  manifest["duration_seconds"] = duration_seconds;
  write_text_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

struct CommonFlags {
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out, "output directory")->required();
  cmd->add_option("--seed", flags.seed, "RNG seed");
  cmd->add_option("--threads", flags.threads, "worker cap for per-node updates")
      ->check(CLI::PositiveNumber);
  cmd->set_config("--config", "", "flat key=value config file (flags take precedence)");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
  CommonFlags common;
  int kron_power = 3;
  std::string seed_matrix_file;
  std::string pattern = "smooth";
  double p = 0.5;
  int horizon = 1000;
  int contagions = 80;
  double noise_std = 1.0;
  double x_low = 0.0;
  double x_high = 3.0;
};

int run_simulate(const SimulateFlags& flags) {
  Stopwatch watch;
  SimConfig config;
  config.seed_matrix = flags.seed_matrix_file.empty() ? default_seed_graph()
                                                      : read_matrix_csv(flags.seed_matrix_file);
  config.kron_power = flags.kron_power;
  config.T = flags.horizon;
  config.C = flags.contagions;
  config.noise_std = flags.noise_std;
  config.x_low = flags.x_low;
  config.x_high = flags.x_high;
  config.rng_seed = flags.common.seed;

  EdgePattern pattern;
  pattern.kind = pattern_kind_from_string(flags.pattern);
  pattern.p = flags.p;
  pattern.rng_seed = mix_seed(flags.common.seed, 0xed6e5ULL);

  auto out = simulate(config, pattern);

  const fs::path dir(flags.common.out);
  fs::create_directories(dir);
  write_matrix_csv(dir / "X.csv", out.susceptibility.values());
  write_observations(dir / "observations", out.observations);
  write_network_jsonl(dir / "truth.jsonl", out.network);

  json options{{"kron_power", config.kron_power},
               {"pattern", flags.pattern},
               {"p", flags.p},
               {"T", config.T},
               {"C", config.C},
               {"noise_std", config.noise_std},
               {"x_low", config.x_low},
               {"x_high", config.x_high},
               {"seed", flags.common.seed},
               {"threads", flags.common.threads},
               {"seed_matrix", flags.seed_matrix_file.empty() ? "builtin" : flags.seed_matrix_file},
               {"N", out.network.num_nodes()}};
  json outputs{{"susceptibility", (dir / "X.csv").string()},
               {"observations", (dir / "observations").string()},
               {"truth", (dir / "truth.jsonl").string()}};
  write_manifest(dir, "simulate", options, json::object(), outputs, watch.seconds());
  std::cout << "simulate: N=" << out.network.num_nodes() << " T=" << config.T
            << " C=" << config.C << " -> " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// track

struct TrackFlags {
  CommonFlags common;
  std::string data;
  std::string solver = "fista";
  double beta = 0.98;
  double lambda = 0.0;
  std::string lambda_schedule = "constant";
  double tol = 1e-6;
  int max_inner = 100;
  double eta = 0.0;
  int checkpoint_every = 0;
  std::string resume_file;
};

int run_track(const TrackFlags& flags) {
  Stopwatch watch;
  SolverConfig config;
  config.solver = solver_kind_from_string(flags.solver);
  config.beta = flags.beta;
  config.lambda0 = flags.lambda;
  if (flags.lambda_schedule == "constant") {
    config.lambda_schedule = LambdaSchedule::constant;
  } else if (flags.lambda_schedule == "sqrt_t") {
    config.lambda_schedule = LambdaSchedule::sqrt_t;
  } else {
    fail("E_CONFIG", "unknown lambda schedule '" + flags.lambda_schedule + "'");
  }
  config.tol = flags.tol;
  config.max_inner = flags.max_inner;
  config.eta = flags.eta;
  config.rng_seed = flags.common.seed;
  config.threads = flags.common.threads;
  config.validate();

  const fs::path data_dir(flags.data);
  auto observations = read_observations(data_dir / "observations");
  Matrix x_values = read_matrix_csv(data_dir / "X.csv");
  auto dataset = validate_dataset(std::move(observations), Susceptibility(std::move(x_values)));

  const fs::path dir(flags.common.out);
  fs::create_directories(dir);

  Tracker tracker =
      flags.resume_file.empty()
          ? Tracker(dataset.susceptibility(), config)
          : Tracker::restore(read_text(flags.resume_file), dataset.susceptibility(), config);
  const int start_t = tracker.t();
  if (start_t >= dataset.num_intervals())
    fail("E_CONFIG", "nothing to do: tracker state is at or past the end of the dataset");

  if (flags.checkpoint_every > 0) fs::create_directories(dir / "checkpoints");

  TrackingResult result;
  std::string estimates_jsonl;
  for (int t = start_t; t < dataset.num_intervals(); ++t) {
    tracker.step(dataset.interval(t));
    estimates_jsonl += estimate_to_json_line(tracker.estimate());
    estimates_jsonl += '\n';
    result.estimates.push_back(tracker.estimate());
    result.objective_trace.push_back(tracker.last_objective());
    result.inner_iters_used.push_back(tracker.last_inner_iters());
    result.lipschitz_trace.push_back(tracker.last_lipschitz());
    result.nnz_trace.push_back(tracker.last_nnz());
    if (flags.checkpoint_every > 0 && tracker.t() % flags.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%05d.json", tracker.t());
      write_text_atomic(dir / "checkpoints" / name, tracker.checkpoint_json());
    }
  }
  write_text_atomic(dir / "estimates.jsonl", estimates_jsonl);
  write_text_atomic(dir / "diagnostics.csv", diagnostics_csv(result));

  json options{{"solver", flags.solver},
               {"beta", config.beta},
               {"lambda", config.lambda0},
               {"lambda_schedule", flags.lambda_schedule},
               {"tol", config.tol},
               {"max_inner", config.max_inner},
               {"eta", config.eta},
               {"seed", flags.common.seed},
               {"threads", config.threads},
               {"checkpoint_every", flags.checkpoint_every},
               {"resume", flags.resume_file}};
  json inputs{{"data", data_dir.string()}};
  json outputs{{"estimates", (dir / "estimates.jsonl").string()},
               {"diagnostics", (dir / "diagnostics.csv").string()}};
  write_manifest(dir, "track", options, inputs, outputs, watch.seconds());
  std::cout << "track: solver=" << flags.solver << " intervals=" << result.estimates.size()
            << " -> " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  CommonFlags common;
  std::string estimates;
  std::string truth;
  double threshold = kDefaultSupportThreshold;
};

int run_eval(const EvalFlags& flags) {
  Stopwatch watch;
  auto estimates = read_estimates_jsonl(flags.estimates);
  std::vector<MetricRecord> records;
  const bool with_truth = !flags.truth.empty();
  if (with_truth) {
    auto truth = read_network_jsonl(flags.truth);
    records = evaluate(estimates, truth, flags.threshold);
  } else {
    records = evaluate_nnz_only(estimates, flags.threshold);
  }

  const fs::path dir(flags.common.out);
  fs::create_directories(dir);
  write_text_atomic(dir / "metrics.csv", metrics_csv(records, with_truth));

  json options{{"threshold", flags.threshold},
               {"seed", flags.common.seed},
               {"threads", flags.common.threads}};
  json inputs{{"estimates", flags.estimates}, {"truth", flags.truth}};
  json outputs{{"metrics", (dir / "metrics.csv").string()}};
  write_manifest(dir, "eval", options, inputs, outputs, watch.seconds());
  std::cout << "eval: intervals=" << records.size() << " -> " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestFlags {
  CommonFlags common;
  std::string input;
  int min_sites = 7;
  double interval_hours = 168.0;
  int max_nodes = 0;  // 0 = unlimited
  std::string x_mode = "uniform";
  std::string x_file;
  double x_low = 0.0;
  double x_high = 0.01;
};

int run_ingest(const IngestFlags& flags) {
  Stopwatch watch;
  std::ifstream in(flags.input);
  if (!in) fail("E_IO", "cannot open " + flags.input);
  auto parsed = parse_cascades(in);

  auto filtered = filter_cascades(std::move(parsed.records), flags.min_sites);
  IngestConfig config;
  config.min_sites = flags.min_sites;
  config.interval_hours = flags.interval_hours;
  if (flags.max_nodes > 0) config.max_nodes = flags.max_nodes;
  auto built = build_intervals(filtered, config);

  const int n = static_cast<int>(built.node_map.size());
  const int c = built.intervals.front().num_contagions();
  Susceptibility x = flags.x_mode == "file"
                         ? build_susceptibility(n, c, flags.x_file)
                         : build_susceptibility(n, c, flags.x_low, flags.x_high,
                                                mix_seed(flags.common.seed, 0x5caeULL));

  const fs::path dir(flags.common.out);
  fs::create_directories(dir);
  write_observations(dir / "observations", built.intervals);
  write_matrix_csv(dir / "X.csv", x.values());
  write_text_atomic(dir / "node_map.csv", node_map_csv(built.node_map));
  write_text_atomic(dir / "rejects.txt", rejects_report(parsed.rejects));

  json options{{"min_sites", flags.min_sites},
               {"interval_hours", flags.interval_hours},
               {"max_nodes", flags.max_nodes},
               {"x_mode", flags.x_mode},
               {"x_file", flags.x_file},
               {"x_low", flags.x_low},
               {"x_high", flags.x_high},
               {"seed", flags.common.seed},
               {"threads", flags.common.threads},
               {"cascades_kept", static_cast<int>(filtered.size())},
               {"lines_rejected", static_cast<int>(parsed.rejects.size())},
               {"nodes", n},
               {"intervals", static_cast<int>(built.intervals.size())},
               {"origin", built.origin},
               {"t_max", built.t_max},
               {"fill_value", built.fill_value}};
  json inputs{{"cascades", flags.input}};
  json outputs{{"observations", (dir / "observations").string()},
               {"susceptibility", (dir / "X.csv").string()},
               {"node_map", (dir / "node_map.csv").string()},
               {"rejects", (dir / "rejects.txt").string()}};
  write_manifest(dir, "ingest", options, inputs, outputs, watch.seconds());
  std::cout << "ingest: nodes=" << n << " cascades=" << c
            << " intervals=" << built.intervals.size() << " -> " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semtrack: time-varying network topology tracking from cascade data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic cascade dataset");
  add_common(sim_cmd, sim.common);
  sim_cmd->add_option("--kron-power", sim.kron_power, "Kronecker power of the seed graph")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed-matrix", sim.seed_matrix_file,
                      "CSV 0/1 seed matrix (default: builtin 4x4)");
  sim_cmd->add_option("--pattern", sim.pattern, "edge evolution: bernoulli|smooth|nonsmooth");
  sim_cmd->add_option("--p", sim.p, "bernoulli edge probability");
  sim_cmd->add_option("--T", sim.horizon, "number of intervals")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--C", sim.contagions, "number of contagions")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--noise-std", sim.noise_std, "noise standard deviation");
  sim_cmd->add_option("--x-low", sim.x_low, "susceptibility lower bound");
  sim_cmd->add_option("--x-high", sim.x_high, "susceptibility upper bound");

  TrackFlags trk;
  auto* trk_cmd = app.add_subcommand("track", "track topology over a dataset");
  add_common(trk_cmd, trk.common);
  trk_cmd->add_option("--data", trk.data, "dataset directory (X.csv + observations/)")
      ->required();
  trk_cmd->add_option("--solver", trk.solver, "ista|fista|rt-fista|sgd");
  trk_cmd->add_option("--beta", trk.beta, "forgetting factor in (0,1]");
  trk_cmd->add_option("--lambda", trk.lambda, "l1 penalty weight");
  trk_cmd->add_option("--lambda-schedule", trk.lambda_schedule, "constant|sqrt_t");
  trk_cmd->add_option("--tol", trk.tol, "inner stopping tolerance");
  trk_cmd->add_option("--max-inner", trk.max_inner, "inner iteration budget");
  trk_cmd->add_option("--eta", trk.eta, "sgd step size");
  trk_cmd->add_option("--checkpoint-every", trk.checkpoint_every,
                      "write a resumable state snapshot every k intervals (0 = off)");
  trk_cmd->add_option("--resume", trk.resume_file, "resume from a checkpoint file");

  EvalFlags evl;
  auto* evl_cmd = app.add_subcommand("eval", "score estimates against ground truth");
  add_common(evl_cmd, evl.common);
  evl_cmd->add_option("--estimates", evl.estimates, "estimates JSONL file")->required();
  evl_cmd->add_option("--truth", evl.truth, "ground-truth JSONL file (omit for nnz-only)");
  evl_cmd->add_option("--threshold", evl.threshold, "support threshold");

  IngestFlags ing;
  auto* ing_cmd = app.add_subcommand("ingest", "parse, filter, and bin cascade timestamps");
  add_common(ing_cmd, ing.common);
  ing_cmd->add_option("--input", ing.input, "cascade TSV file")->required();
  ing_cmd->add_option("--min-sites", ing.min_sites, "minimum distinct nodes per cascade");
  ing_cmd->add_option("--interval-hours", ing.interval_hours, "interval length in hours");
  ing_cmd->add_option("--max-nodes", ing.max_nodes, "keep only the most-active nodes (0 = all)");
  ing_cmd->add_option("--x-mode", ing.x_mode, "uniform|file");
  ing_cmd->add_option("--x-file", ing.x_file, "susceptibility CSV when --x-mode file");
  ing_cmd->add_option("--x-low", ing.x_low, "uniform susceptibility lower bound");
  ing_cmd->add_option("--x-high", ing.x_high, "uniform susceptibility upper bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (trk_cmd->parsed()) return run_track(trk);
    if (evl_cmd->parsed()) return run_eval(evl);
    if (ing_cmd->parsed()) return run_ingest(ing);
  } catch (const semtrack::Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
