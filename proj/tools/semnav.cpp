// semnav: command-line front end.
//
//   semnav parse <world>
//   semnav genmap <scenario> -o <dir>
//   semnav plan <scenario>
//   semnav run <scenario> [-o <dir>] [--seed N] [--noise SIGMA] [--max-ticks N]
//   semnav bench <scenario> [-n N]
//
// Exit codes: 0 success, 1 domain failure, 2 usage or input error.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "semnav/behavior_planner.hpp"
#include "semnav/map_generator.hpp"
#include "semnav/mission.hpp"
#include "semnav/navigation.hpp"
#include "semnav/simulator.hpp"
#include "semnav/world.hpp"

namespace fs = std::filesystem;
using namespace semnav;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bare names that do not exist relative to the working directory are looked up
// in the bundled data directory.
std::string locate(const std::string& path) {
  if (fs::exists(path) || fs::path(path).is_absolute()) return path;
  const auto bundled = fs::path(data_dir()) / path;
  return fs::exists(bundled) ? bundled.string() : path;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) throw UsageError(fmt::format("cannot write '{}'", path.string()));
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError(fmt::format("cannot create output directory '{}'", dir));
  return dir;
}

struct Loaded {
  Scenario scenario;
  MissionInputs inputs;
};

Loaded load(const std::string& scenario_path) {
  const auto path = locate(scenario_path);
  if (!fs::exists(path)) throw UsageError(fmt::format("scenario '{}' not found", scenario_path));
  Loaded l;
  l.scenario = load_scenario_file(path);
  l.inputs = load_mission_inputs(l.scenario);
  return l;
}

// Seeds a store, prefetches around the goal and start, and generates the map.
struct PreparedMap {
  std::unique_ptr<TierStore> store;
  SemanticEpisodicMap map;
  std::string start;
};

std::optional<PreparedMap> prepare_map(const Loaded& l) {
  PreparedMap p;
  p.store = std::make_unique<TierStore>(l.scenario.tiers);
  seed_store(*p.store, *l.inputs.world, l.inputs.behaviors);
  const auto& goal = l.scenario.goal.front();
  if (goal.args.empty() || !p.store->prefetch_mission(goal.args.back(), l.scenario.prefetch_depth)) return std::nullopt;
  p.start = l.scenario.start_space;
  if (p.start.empty())
    for (const auto& s : l.inputs.world->spaces)
      if (point_in_footprint(l.inputs.world->robot_spawn.position(), *s.explicit_model.model2d)) p.start = s.symbol();
  if (!p.start.empty() && !p.store->local_entries("env").contains(env_key(p.start)))
    p.store->prefetch_mission(p.start, l.scenario.prefetch_depth);
  p.map = generate_map(*p.store, l.scenario.sensors, goal.args.back(), l.scenario.resolution);
  return p;
}

int cmd_parse(const std::string& world_path) {
  if (!fs::exists(world_path)) {
    fmt::print(stderr, "error: world file '{}' not found\n", world_path);
    return kUsageError;
  }
  WorldDescription world;
  try {
    world = load_world_file(world_path);
  } catch (const WorldParseError& e) {
    fmt::print(stderr, "{}:{}:{}: {}\n", world_path, e.line, e.column, e.what());
    return e.kind == WorldParseError::Kind::Semantic ? kDomainFailure : kUsageError;
  }
  const auto diags = validate_world(world);
  for (const auto& d : diags)
    fmt::print("{}: {}: {}\n", d.severity == Diagnostic::Severity::Error ? "error" : "warning", d.symbol, d.message);
  fmt::print("world {}: {} spaces, {} elements, {} actors\n", world.name, world.spaces.size(), world.elements.size(),
             world.actors.size());
  return has_errors(diags) ? kDomainFailure : kOk;
}

int cmd_genmap(const std::string& scenario_path, const std::string& out_dir) {
  const auto l = load(scenario_path);
  const auto out = prepare_out_dir(out_dir);
  std::optional<PreparedMap> p;
  try {
    p = prepare_map(l);
  } catch (const MapGenerationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDomainFailure;
  }
  if (!p) {
    fmt::print(stderr, "error: {}\n", kFailUnknownGoal);
    return kDomainFailure;
  }
  write_file(out / "metric.pgm", metric_to_pgm(p->map.metric));
  write_file(out / "metric.yaml", metric_sidecar(p->map.metric));
  write_file(out / "layers.txt", layers_document(p->map));
  for (const auto& d : p->map.diagnostics) fmt::print(stderr, "note: {}\n", d);
  fmt::print("map {}x{} @ {} m: {} spaces, {} annotations -> {}\n", p->map.metric.width, p->map.metric.height,
             p->map.metric.resolution, p->map.topology.nodes.size(), p->map.semantic.annotations.size(), out.string());
  return kOk;
}

int cmd_plan(const std::string& scenario_path) {
  const auto l = load(scenario_path);
  std::optional<PreparedMap> p;
  try {
    p = prepare_map(l);
  } catch (const MapGenerationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDomainFailure;
  }
  if (!p) {
    fmt::print(stderr, "error: {}\n", kFailUnknownGoal);
    return kDomainFailure;
  }
  const auto grounded = ground_actions(l.inputs.behaviors, p->map);
  for (const auto& d : grounded.diagnostics) fmt::print(stderr, "note: {}\n", d);
  auto facts = map_facts(p->map);
  facts.push_back(Fact{"at", {"robot", p->start}});
  SearchStats stats;
  const auto bp = plan(facts, Mission{l.scenario.goal, p->start}, grounded.actions, &stats);
  if (!bp) {
    fmt::print("{} ({} ground actions, {} states expanded)\n", kFailUnsolvable, grounded.actions.size(), stats.expanded);
    return kDomainFailure;
  }
  for (std::size_t i = 0; i < bp->steps.size(); ++i)
    fmt::print("{}. {} cost={:.3f}\n", i + 1, bp->steps[i].label(), bp->steps[i].cost);
  fmt::print("total cost {:.3f} ({} ground actions, {} states expanded)\n", bp->total_cost, grounded.actions.size(),
             stats.expanded);
  return kOk;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::optional<double> noise, std::optional<std::uint64_t> max_ticks) {
  auto l = load(scenario_path);
  if (seed) l.scenario.seed = *seed;
  if (noise) {
    if (*noise < 0.0) throw UsageError("--noise must be non-negative");
    l.scenario.noise_sigma = *noise;
  }
  if (max_ticks) {
    if (*max_ticks == 0) throw UsageError("--max-ticks must be positive");
    l.scenario.max_ticks = *max_ticks;
  }
  const auto out = prepare_out_dir(out_dir);
  const auto run = run_mission(l.scenario, l.inputs);
  const auto report = serialize_report(run.report);
  write_file(out / "report.txt", report);
  write_file(out / "trace.csv", trace_csv(run));
  write_file(out / "episodes.txt", episodes_document(run.map.episodic));
  fmt::print("{}", report);
  return run.report.success ? kOk : kDomainFailure;
}

struct Timing {
  double mean_us = 0.0;
  double p99_us = 0.0;
};

Timing summarize(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  Timing t;
  for (double s : samples) t.mean_us += s;
  t.mean_us /= static_cast<double>(samples.size());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples.size()))) - 1;
  t.p99_us = samples[std::min(idx, samples.size() - 1)];
  return t;
}

template <typename F>
double time_us(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_bench(const std::string& scenario_path, int repetitions) {
  if (repetitions < 1) throw UsageError("repetitions must be at least 1");
  const auto l = load(scenario_path);
  const auto p = prepare_map(l);
  if (!p) {
    fmt::print(stderr, "error: {}\n", kFailUnknownGoal);
    return kDomainFailure;
  }
  DrivingMap dm = build_driving_map(p->map.metric, l.inputs.world->robot_radius);
  const GridCell start = dm.cell_of(l.inputs.world->robot_spawn.position());
  const auto& goal_sym = l.scenario.goal.front().args.back();
  GridCell goal = dm.cell_of(p->map.topology.nodes.contains(goal_sym) ? p->map.topology.nodes.at(goal_sym)
                                                                       : l.inputs.world->robot_spawn.position());
  if (!dm.passable(goal)) goal = start;

  std::vector<double> global, incremental, lidar;
  for (int i = 0; i < repetitions; ++i) global.push_back(time_us([&] { (void)plan_global(dm, start, goal); }));

  ReplanState rs(dm, start, goal);
  (void)rs.replan();
  std::mt19937_64 rng(l.scenario.seed);
  std::vector<GridCell> free_cells;
  for (int y = 0; y < dm.height(); ++y)
    for (int x = 0; x < dm.width(); ++x)
      if (dm.cost(GridCell{x, y}) == kFreeCost && GridCell{x, y} != start && GridCell{x, y} != goal)
        free_cells.push_back({x, y});
  for (int i = 0; i < repetitions && !free_cells.empty(); ++i) {
    std::vector<GridCell> toggled;
    for (int k = 0; k < 5; ++k) toggled.push_back(free_cells[rng() % free_cells.size()]);
    std::sort(toggled.begin(), toggled.end(), [&](GridCell a, GridCell b) { return dm.index(a) < dm.index(b); });
    toggled.erase(std::unique(toggled.begin(), toggled.end()), toggled.end());
    for (const auto& c : toggled) dm.set_dynamic(c, 1);
    incremental.push_back(time_us([&] { (void)replan_incremental(rs, toggled); }));
    for (const auto& c : toggled) dm.clear_dynamic(c);
    rs.notify(toggled);
  }
  if (incremental.empty()) incremental.push_back(0.0);

  const LidarSpec spec = l.scenario.sensors.lidar2d.value_or(LidarSpec{});
  const auto ws = make_world_state(l.inputs.world, l.scenario.seed, l.scenario.noise_sigma);
  for (int i = 0; i < repetitions; ++i) lidar.push_back(time_us([&] { (void)lidar_scan(ws, spec); }));

  fmt::print("operation,repetitions,mean_us,p99_us\n");
  for (const auto& [name, samples] : {std::pair{"plan_global", &global}, std::pair{"replan_incremental", &incremental},
                                      std::pair{"lidar_scan", &lidar}}) {
    const auto t = summarize(*samples);
    fmt::print("{},{},{:.3f},{:.3f}\n", name, repetitions, t.mean_us, t.p99_us);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic navigation toolkit: worlds, maps, plans and simulated missions"};
  app.require_subcommand(1);

  std::string world_path, scenario_path, out_dir = ".";
  auto* parse = app.add_subcommand("parse", "Parse and validate a world file");
  parse->add_option("world", world_path, "World file")->required();

  auto* genmap = app.add_subcommand("genmap", "Prefetch and generate the semantic-episodic map");
  genmap->add_option("scenario", scenario_path, "Scenario file")->required();
  genmap->add_option("-o,--out", out_dir, "Output directory")->required();

  auto* plan_cmd = app.add_subcommand("plan", "Print the behavior plan for a scenario");
  plan_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string run_out = "semnav_out";
  std::optional<std::uint64_t> seed, max_ticks;
  std::optional<double> noise;
  auto* run = app.add_subcommand("run", "Run a full mission in the simulator");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("-o,--out", run_out, "Output directory for report.txt, trace.csv, episodes.txt");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--noise", noise, "Override lidar range noise sigma (meters)");
  run->add_option("--max-ticks", max_ticks, "Override the tick budget");

  int repetitions = 100;
  auto* bench = app.add_subcommand("bench", "Time planning, replanning and lidar synthesis");
  bench->add_option("scenario", scenario_path, "Scenario file")->required();
  bench->add_option("-n,--repetitions", repetitions, "Repetitions per operation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*parse) return cmd_parse(world_path);
    if (*genmap) return cmd_genmap(scenario_path, out_dir);
    if (*plan_cmd) return cmd_plan(scenario_path);
    if (*run) return cmd_run(scenario_path, run_out, seed, noise, max_ticks);
    if (*bench) return cmd_bench(scenario_path, repetitions);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    // malformed scenario, world, behavior or rules input
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}
