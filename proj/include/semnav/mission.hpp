#pragma once

// Mission pipeline: prefetch, map generation, behavior planning, the
// navigation loop against the simulator, and learning at action boundaries.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semnav/behavior_planner.hpp"
#include "semnav/learning.hpp"
#include "semnav/map_generator.hpp"
#include "semnav/memory.hpp"
#include "semnav/navigation.hpp"
#include "semnav/simulator.hpp"
#include "semnav/strips.hpp"
#include "semnav/world.hpp"

namespace semnav {

struct Scenario {
  std::string world_path;
  std::string behaviors_path;
  std::string rules_path;  // empty = no rules
  SensorSpec sensors;
  TierConfigs tiers = default_tier_configs();
  std::vector<Fact> goal;
  std::string start_space;  // empty = the space containing the spawn pose
  unsigned prefetch_depth = 3;
  std::uint64_t seed = 0;
  double dt = 0.1;
  std::uint64_t max_ticks = 3000;
  double noise_sigma = 0.0;
  double resolution = kDefaultResolution;
  std::uint64_t dynamic_ttl = kDefaultDynamicTtl;
  std::uint64_t patience = 50;  // ticks without a path before a topology edge counts as blocked
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& what);
  int line;
};

/// INI-style text: `[section]` headers and `key = value` lines, `#` comments.
/// Relative paths are resolved against base_dir.
Scenario parse_scenario(std::string_view text, const std::string& base_dir = ".");
Scenario load_scenario_file(const std::string& path);

/// Bundled asset directory: $SEMNAV_DATA_DIR if set, else the build-time default.
std::string data_dir();

struct MissionInputs {
  std::shared_ptr<const WorldDescription> world;
  std::vector<ActionTemplate> behaviors;
  std::vector<Rule> rules;
};

/// Reads the world, behavior database and rules named by the scenario.
/// Throws WorldParseError, BehaviorParseError, RuleParseError or std::runtime_error.
MissionInputs load_mission_inputs(const Scenario& scenario);

/// Everything needed to seed a store: env entries in CLOUD, behaviors in NETWORK.
void seed_store(TierStore& store, const WorldDescription& world, const std::vector<ActionTemplate>& behaviors);

inline constexpr std::string_view kFailUnknownGoal = "unknown goal symbol";
inline constexpr std::string_view kFailUnknownStart = "unknown start symbol";
inline constexpr std::string_view kFailUnsolvable = "unsolvable mission";
inline constexpr std::string_view kFailUnreachable = "unreachable goal";
inline constexpr std::string_view kFailTimeout = "timeout";

struct MissionReport {
  bool success = false;
  std::string failure;  // empty on success
  std::vector<std::string> plan;
  std::uint64_t ticks = 0;
  double distance = 0.0;
  std::uint64_t static_collisions = 0;
  std::uint64_t actor_contacts = 0;
  std::uint64_t replans = 0;           // incremental path repairs triggered by blocked path cells
  std::uint64_t behavior_replans = 0;  // re-plans after a blocked topology edge
  std::uint64_t learned_writes = 0;
  std::uint64_t learned_entries = 0;       // distinct learned keys across all tiers at the end
  std::uint64_t learned_in_cloud = 0;      // of those, resident in CLOUD
  TierStats tier_stats;
  std::vector<EpisodeEvent> episodes;
  std::uint64_t trace_digest = kEmptyTraceDigest;
};

struct MissionRun {
  MissionReport report;
  std::vector<std::string> trace;  // one canonical record per simulated tick
  std::vector<std::string> trace_csv_rows;
  SemanticEpisodicMap map;
  std::unique_ptr<TierStore> store;
};

MissionRun run_mission(const Scenario& scenario, const MissionInputs& inputs);
MissionRun run_mission(const Scenario& scenario);

/// Canonical `key: value` text with fixed decimals.
std::string serialize_report(const MissionReport& report);
/// `tick,x,y,theta,v,omega` header plus one row per tick.
std::string trace_csv(const MissionRun& run);

}  // namespace semnav
