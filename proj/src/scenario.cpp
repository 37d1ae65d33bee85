#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "semnav/mission.hpp"

namespace semnav {

namespace fs = std::filesystem;

ScenarioError::ScenarioError(int l, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", l, what)), line(l) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& v, int line, const std::string& key) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ScenarioError(line, fmt::format("{}: '{}' is not a valid number", key, v));
  return out;
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& base_dir) {
  Scenario sc;
  sc.behaviors_path = resolve(base_dir, "behaviors.txt");
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  bool have_world = false;

  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string l = trim(raw);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw ScenarioError(line, "unterminated section header");
      section = trim(std::string_view(l).substr(1, l.size() - 2));
      if (section != "world" && section != "sensors" && section != "tiers" && section != "mission" && section != "sim")
        throw ScenarioError(line, fmt::format("unknown section [{}]", section));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ScenarioError(line, "expected key = value");
    const std::string key = trim(std::string_view(l).substr(0, eq));
    const std::string val = trim(std::string_view(l).substr(eq + 1));
    if (section.empty()) throw ScenarioError(line, "key outside any section");
    const std::string full = section + "." + key;

    if (full == "world.path") {
      sc.world_path = resolve(base_dir, val);
      have_world = true;
    } else if (section == "sensors") {
      if (key.starts_with("lidar.") && !sc.sensors.lidar2d) sc.sensors.lidar2d.emplace();
      if (key.starts_with("semantic.") && !sc.sensors.semantic3d) sc.sensors.semantic3d.emplace();
      if (key == "lidar.range") sc.sensors.lidar2d->range = parse_number<double>(val, line, full);
      else if (key == "lidar.fov") sc.sensors.lidar2d->fov = parse_number<double>(val, line, full);
      else if (key == "lidar.beams") sc.sensors.lidar2d->beam_count = parse_number<int>(val, line, full);
      else if (key == "semantic.range") sc.sensors.semantic3d->range = parse_number<double>(val, line, full);
      else if (key == "semantic.fov") sc.sensors.semantic3d->fov = parse_number<double>(val, line, full);
      else throw ScenarioError(line, fmt::format("unknown key {}", full));
    } else if (section == "tiers") {
      const auto dot = key.find('.');
      std::string name = key.substr(0, dot == std::string::npos ? 0 : dot);
      for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      const auto tier = parse_tier(name);
      if (!tier) throw ScenarioError(line, fmt::format("unknown tier in {}", full));
      auto& cfg = sc.tiers[index_of(*tier)];
      const auto field = key.substr(dot + 1);
      if (field == "capacity")
        cfg.capacity = val == "unbounded" ? std::nullopt : std::optional(parse_number<std::uint64_t>(val, line, full));
      else if (field == "latency")
        cfg.latency = parse_number<std::uint64_t>(val, line, full);
      else
        throw ScenarioError(line, fmt::format("unknown key {}", full));
    } else if (full == "mission.goal") {
      try {
        sc.goal = parse_fact_list(val);
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(line, e.what());
      }
      if (sc.goal.empty()) throw ScenarioError(line, "mission.goal is empty");
    } else if (full == "mission.start") {
      sc.start_space = val;
    } else if (full == "mission.prefetch_depth") {
      sc.prefetch_depth = parse_number<unsigned>(val, line, full);
    } else if (full == "mission.behaviors") {
      sc.behaviors_path = resolve(base_dir, val);
    } else if (full == "mission.rules") {
      sc.rules_path = resolve(base_dir, val);
    } else if (full == "sim.seed") {
      sc.seed = parse_number<std::uint64_t>(val, line, full);
    } else if (full == "sim.dt") {
      sc.dt = parse_number<double>(val, line, full);
    } else if (full == "sim.max_ticks") {
      sc.max_ticks = parse_number<std::uint64_t>(val, line, full);
    } else if (full == "sim.noise") {
      sc.noise_sigma = parse_number<double>(val, line, full);
    } else if (full == "sim.resolution") {
      sc.resolution = parse_number<double>(val, line, full);
    } else if (full == "sim.ttl") {
      sc.dynamic_ttl = parse_number<std::uint64_t>(val, line, full);
    } else if (full == "sim.patience") {
      sc.patience = parse_number<std::uint64_t>(val, line, full);
    } else {
      throw ScenarioError(line, fmt::format("unknown key {}", full));
    }
  }

  if (!have_world) throw ScenarioError(0, "missing [world] path");
  if (sc.goal.empty()) throw ScenarioError(0, "missing [mission] goal");
  if (sc.max_ticks == 0) throw ScenarioError(0, "sim.max_ticks must be positive");
  if (!(sc.dt > 0.0)) throw ScenarioError(0, "sim.dt must be positive");
  if (!(sc.resolution > 0.0)) throw ScenarioError(0, "sim.resolution must be positive");
  if (sc.noise_sigma < 0.0) throw ScenarioError(0, "sim.noise must be non-negative");
  try {
    sc.sensors.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(0, e.what());
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  const auto dir = fs::path(path).parent_path();
  return parse_scenario(read_file(path), dir.empty() ? "." : dir.string());
}

std::string data_dir() {
  if (const char* env = std::getenv("SEMNAV_DATA_DIR"); env && *env) return env;
  return SEMNAV_DEFAULT_DATA_DIR;
}

MissionInputs load_mission_inputs(const Scenario& scenario) {
  MissionInputs in;
  in.world = std::make_shared<const WorldDescription>(load_world_file(scenario.world_path));
  in.behaviors = parse_behavior_database(read_file(scenario.behaviors_path));
  if (!scenario.rules_path.empty()) in.rules = parse_rules(read_file(scenario.rules_path));
  return in;
}

void seed_store(TierStore& store, const WorldDescription& world, const std::vector<ActionTemplate>& behaviors) {
  for (const auto* group : {&world.spaces, &world.elements})
    for (const auto& e : *group) store.put(StoredEntry{env_key(e.symbol()), e}, TierId::Cloud);
  for (const auto& b : behaviors) store.put(StoredEntry{behavior_key(b.name), b}, TierId::Network);
}

}  // namespace semnav
