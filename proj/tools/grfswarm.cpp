#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "grfswarm/batch.hpp"
#include "grfswarm/engine.hpp"
#include "grfswarm/io.hpp"
#include "grfswarm/scenario.hpp"
#include "grfswarm/service/protocol.hpp"
#include "grfswarm/service/server.hpp"

namespace fs = std::filesystem;
using namespace grfswarm;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

/// Thrown for bad arguments or scenario files; maps to exit status 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("grfswarm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char *env = std::getenv("GRFSWARM_LOG")) {
    const std::string v = env;
    if (v == "error") spdlog::set_level(spdlog::level::err);
    else if (v == "warn") spdlog::set_level(spdlog::level::warn);
    else if (v == "info") spdlog::set_level(spdlog::level::info);
    else if (v == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("GRFSWARM_LOG={} not recognised; using warn", v);
  }
}

Scenario load_config(const std::string &path) {
  try {
    return load_scenario_file(path);
  } catch (const ScenarioError &e) {
    throw ConfigError(e.what());
  }
}

void make_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path &path, const std::string &text) {
  auto out = open_output(path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string summary_line(const MetricsFrame &f) {
  std::string comp;
  for (const auto &[sig, n] : f.composition) comp += (comp.empty() ? "" : " ") + sig + "x" + std::to_string(n);
  return "tick " + std::to_string(f.tick) + ": molecules " + std::to_string(f.molecule_count) +
         ", remaining_bonds " + std::to_string(f.remaining_bonds) + ", velocity_error " +
         format_number(f.velocity_error) + (comp.empty() ? "" : ", composition " + comp);
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> ticks;
  std::string out = "out";
  bool trajectory = false;
  std::string commands;
};

int cmd_run(const RunArgs &a) {
  const Scenario s = load_config(a.config);
  const std::uint64_t seed = a.seed.value_or(s.rng_seed);
  RunOptions opt{.ticks = a.ticks};
  if (!a.commands.empty()) {
    try {
      opt.commands = service::parse_command_log(read_text_file(a.commands), s);
    } catch (const std::exception &e) {
      throw ConfigError(e.what());
    }
  }

  const fs::path dir = a.out;
  make_dir(dir);
  auto metrics = open_output((dir / "metrics.csv").string());
  metrics << kMetricsHeader << '\n';
  std::optional<std::ofstream> traj;
  if (a.trajectory) traj = open_output((dir / "trajectory.ndjson").string());

  opt.on_frame = [&](const MetricsFrame &f, const WorldState &w, const BondGraph &g) {
    write_metrics_row(metrics, f);
    if (traj) write_trajectory(*traj, w, g, s);
    if (!metrics || (traj && !*traj)) throw IoError("write failed in " + dir.string());
    spdlog::debug("{}", summary_line(f));
  };

  spdlog::info("run seed {} for {} ticks", seed, opt.ticks.value_or(s.ticks));
  RunResult res;
  try {
    res = run(s, seed, opt);
  } catch (const CommandError &e) {
    throw ConfigError(std::string("command log: ") + e.what());
  }
  metrics.flush();
  if (res.aborted) {
    std::cerr << "error: run aborted at tick " << res.final_state.tick << ": " << res.error
              << " (partial results in " << dir.string() << ")\n";
    return kExitIo;
  }
  write_file(dir / "composition.json", composition_json(res.metrics_series).dump(2) + "\n");
  spdlog::info("finished in {:.2f} s", res.wall_time);
  if (!res.metrics_series.empty()) std::cout << summary_line(res.metrics_series.back()) << '\n';
  return 0;
}

struct BatchArgs {
  std::string config;
  int runs = 1;
  std::uint64_t base_seed = 0;
  int jobs = 1;
  std::optional<int> ticks;
  std::string out;
};

int cmd_batch(const BatchArgs &a) {
  const Scenario s = load_config(a.config);
  if (a.runs < 1) throw ConfigError("--runs must be >= 1");
  const fs::path dir = a.out;
  make_dir(dir);

  std::mutex log_mu;
  BatchSpec spec{.runs = a.runs, .base_seed = a.base_seed, .jobs = a.jobs, .ticks = a.ticks};
  auto results = run_batch(s, spec, [&](const RunResult &r) {
    std::lock_guard lock(log_mu);
    if (r.aborted) spdlog::error("seed {} failed: {}", r.seed, r.error);
    else spdlog::info("seed {} done in {:.2f} s", r.seed, r.wall_time);
  });

  nlohmann::json seeds = nlohmann::json::array(), completed = nlohmann::json::array(),
                 failed = nlohmann::json::array();
  for (const auto &r : results) {
    seeds.push_back(r.seed);
    if (r.aborted) {
      failed.push_back({{"seed", r.seed}, {"error", r.error}});
      continue;
    }
    completed.push_back(r.seed);
    const fs::path run_dir = dir / ("run_" + std::to_string(r.seed));
    make_dir(run_dir);
    auto csv = open_output((run_dir / "metrics.csv").string());
    write_metrics_csv(csv, r.metrics_series);
    if (!csv) throw IoError("write failed: " + (run_dir / "metrics.csv").string());
    write_file(run_dir / "composition.json", composition_json(r.metrics_series).dump(2) + "\n");
  }

  if (completed.empty()) {
    std::cerr << "error: every run failed; no aggregate written\n";
    return kExitIo;
  }
  const bool ci_defined = completed.size() >= 2;
  auto agg = open_output((dir / "aggregate.csv").string());
  write_aggregate_csv(agg, aggregate_completed(results));
  if (!agg) throw IoError("write failed: aggregate.csv");

  nlohmann::json manifest = {{"tool", "grfswarm"},
                             {"version", kVersion},
                             {"scenario", a.config},
                             {"scenario_hash", scenario_hash(s)},
                             {"ticks", a.ticks.value_or(s.ticks)},
                             {"seeds", seeds},
                             {"completed", completed},
                             {"failed", failed},
                             {"ci_defined", ci_defined}};
  if (!ci_defined) manifest["warning"] = "CI undefined";
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  if (!failed.empty())
    std::cerr << "warning: " << failed.size() << " of " << results.size()
              << " runs failed; aggregate uses completed runs only\n";
  if (!ci_defined) std::cerr << "warning: CI undefined (fewer than 2 completed runs)\n";
  std::cout << completed.size() << " runs written to " << dir.string() << '\n';
  return 0;
}

int cmd_validate(const std::string &config) {
  Scenario s;
  try {
    s = parse_scenario(read_text_file(config));
  } catch (const ScenarioError &e) {
    throw ConfigError(e.what());
  }
  const auto problems = validate_scenario(s);
  if (problems.empty()) {
    std::cout << config << ": ok (" << s.robot_count() << " robots, " << s.anchors.size()
              << " anchors, " << s.species.size() << " species)\n";
    return 0;
  }
  for (const auto &p : problems) std::cerr << "error: " << p << '\n';
  return kExitConfig;
}

struct ServeArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  service::ServeOptions opt;
};

volatile std::sig_atomic_t g_stop = 0;

int cmd_serve(const ServeArgs &a) {
  const Scenario s = load_config(a.config);
  if (!(a.opt.tick_rate_hz > 0.0)) throw ConfigError("--tick-rate must be > 0");
  if (a.opt.frame_stride < 1) throw ConfigError("--frame-stride must be >= 1");
  service::LiveServer server(s, a.seed.value_or(s.rng_seed), a.opt);
  try {
    server.start();
  } catch (const std::exception &e) {
    std::cerr << "error: cannot listen on " << a.opt.address << ':' << a.opt.port << ": " << e.what()
              << '\n';
    return kExitIo;
  }
  std::cout << "serving ws://" << a.opt.address << ':' << server.port() << "/ws" << std::endl;
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  spdlog::info("stopped after {} steps", server.steps_taken());
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  setup_logging();
  CLI::App app{"Gibbs random field swarm simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunArgs run_args;
  auto *run = app.add_subcommand("run", "Run one seed and write metrics");
  run->add_option("--config", run_args.config, "Scenario file")->required();
  run->add_option("--seed", run_args.seed, "Master seed (default: scenario rng_seed)");
  run->add_option("--ticks", run_args.ticks, "Override scenario tick count")->check(CLI::NonNegativeNumber);
  run->add_option("--out", run_args.out, "Output directory")->capture_default_str();
  run->add_flag("--trajectory", run_args.trajectory, "Also write trajectory.ndjson");
  run->add_option("--commands", run_args.commands, "Replay a session log of commands");

  BatchArgs batch_args;
  auto *batch = app.add_subcommand("batch", "Run a seed sweep and aggregate");
  batch->add_option("--config", batch_args.config, "Scenario file")->required();
  batch->add_option("--runs", batch_args.runs, "Number of runs")->required();
  batch->add_option("--base-seed", batch_args.base_seed, "First seed")->capture_default_str();
  batch->add_option("--jobs", batch_args.jobs, "Runs executed concurrently")->capture_default_str();
  batch->add_option("--ticks", batch_args.ticks, "Override scenario tick count")->check(CLI::NonNegativeNumber);
  batch->add_option("--out", batch_args.out, "Output directory")->required();

  std::string validate_config;
  auto *validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--config", validate_config, "Scenario file")->required();

  ServeArgs serve_args;
  auto *serve = app.add_subcommand("serve", "Live simulation over a websocket at /ws");
  serve->add_option("--config", serve_args.config, "Scenario file")->required();
  serve->add_option("--seed", serve_args.seed, "Master seed (default: scenario rng_seed)");
  serve->add_option("--address", serve_args.opt.address, "Listen address")->capture_default_str();
  serve->add_option("--port", serve_args.opt.port, "Listen port, 0 for any")->capture_default_str();
  serve->add_option("--tick-rate", serve_args.opt.tick_rate_hz, "Engine steps per second")->capture_default_str();
  serve->add_option("--frame-stride", serve_args.opt.frame_stride, "Steps between frames")->capture_default_str();
  serve->add_option("--session-log", serve_args.opt.session_log, "Record commands for offline replay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*batch) return cmd_batch(batch_args);
    if (*validate) return cmd_validate(validate_config);
    if (*serve) return cmd_serve(serve_args);
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
