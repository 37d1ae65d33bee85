#include "semnav/mission.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace semnav {

namespace {

std::optional<std::string> navigation_target(const GroundAction& a) {
  for (const auto& f : a.add_effects)
    if (f.predicate == "at" && f.args.size() == 2 && f.args[0] == "robot") return f.args[1];
  return std::nullopt;
}

std::optional<std::string> navigation_source(const GroundAction& a) {
  for (const auto& f : a.del_effects)
    if (f.predicate == "at" && f.args.size() == 2 && f.args[0] == "robot") return f.args[1];
  return std::nullopt;
}

class MissionRunner {
 public:
  MissionRunner(const Scenario& sc, const MissionInputs& in) : sc_(sc), in_(in) {}

  MissionRun run();

 private:
  enum class NavOutcome { Reached, Blocked, Timeout };

  bool prepare();
  bool execute_plan();
  NavOutcome navigate(const std::string& target);
  bool hold(std::uint64_t ticks);
  void sense_frame();
  void tick(double v, double omega);
  void learn();
  std::optional<GridCell> goal_cell(const std::string& space) const;
  std::optional<BehaviorPlan> replan_behavior();
  void episode(EpisodeKind kind, std::optional<std::string> subject = std::nullopt);
  bool fail(std::string_view code) {
    run_.report.failure = std::string(code);
    return false;
  }
  void finish();

  const Scenario& sc_;
  const MissionInputs& in_;
  MissionRun run_;
  TierStore* store_ = nullptr;
  std::string goal_symbol_;
  std::string start_space_;
  std::vector<GroundAction> actions_;
  std::set<Fact> state_;
  std::set<std::pair<std::string, std::string>> blocked_edges_;
  BehaviorPlan plan_;
  DrivingMap dm_;
  WorldState ws_;
  std::vector<SemanticFrame> frames_;
  SymbolCounter symbols_;
};

void MissionRunner::episode(EpisodeKind kind, std::optional<std::string> subject) {
  append_episode(run_.map, EpisodeEvent{ws_.tick, ws_.robot.pose, kind, std::move(subject)});
}

bool MissionRunner::prepare() {
  run_.store = std::make_unique<TierStore>(sc_.tiers);
  store_ = run_.store.get();
  seed_store(*store_, *in_.world, in_.behaviors);
  ws_ = make_world_state(in_.world, sc_.seed, sc_.noise_sigma);

  // the goal space is the last argument of the first goal fact
  const Fact& g = sc_.goal.front();
  if (g.args.empty()) return fail(kFailUnknownGoal);
  goal_symbol_ = g.args.back();
  for (const auto& f : sc_.goal)
    for (const auto& a : f.args)
      if (a != "robot" && !store_->contains_anywhere(env_key(a))) return fail(kFailUnknownGoal);
  if (!store_->prefetch_mission(goal_symbol_, sc_.prefetch_depth)) return fail(kFailUnknownGoal);

  start_space_ = sc_.start_space;
  if (start_space_.empty()) {
    for (const auto& s : in_.world->spaces)
      if (s.explicit_model.model2d && point_in_footprint(in_.world->robot_spawn.position(), *s.explicit_model.model2d)) {
        start_space_ = s.symbol();
        break;
      }
  }
  if (start_space_.empty() || !in_.world->is_space(start_space_)) return fail(kFailUnknownStart);
  if (!store_->local_entries("env").contains(env_key(start_space_)))
    store_->prefetch_mission(start_space_, sc_.prefetch_depth);

  try {
    run_.map = generate_map(*store_, sc_.sensors, goal_symbol_, sc_.resolution);
  } catch (const MapGenerationError&) {
    return fail(kFailUnknownGoal);
  }
  episode(EpisodeKind::MissionStart, goal_symbol_);

  std::vector<ActionTemplate> templates;
  for (const auto& key : store_->keys(TierId::Network)) {
    if (!key.starts_with("behavior:")) continue;
    if (auto hit = store_->get(key)) templates.push_back(std::get<ActionTemplate>(hit->entry.payload));
  }
  actions_ = ground_actions(templates, run_.map).actions;
  for (auto& f : map_facts(run_.map)) state_.insert(std::move(f));
  state_.insert(Fact{"at", {"robot", start_space_}});

  auto bp = plan({state_.begin(), state_.end()}, Mission{sc_.goal, start_space_}, actions_);
  if (!bp) return fail(kFailUnsolvable);
  plan_ = std::move(*bp);
  for (const auto& s : plan_.steps) run_.report.plan.push_back(s.label());

  dm_ = build_driving_map(run_.map.metric, in_.world->robot_radius);
  store_->put(StoredEntry{"map:driving", metric_to_tile(run_.map.metric, "driving")}, TierId::Stm);
  return true;
}

std::optional<GridCell> MissionRunner::goal_cell(const std::string& space) const {
  const auto env = store_->local_entries("env");
  auto it = env.find(env_key(space));
  if (it == env.end()) return std::nullopt;
  const auto& fp = std::get<ElementRecord>(it->second.payload).explicit_model.model2d;
  if (!fp) return std::nullopt;
  const Point2 target = centroid(*fp);

  // nearest cell to the centroid, preferring cells clear of inflation
  std::optional<GridCell> best;
  double best_d = 0.0;
  bool best_clear = false;
  for (int y = 0; y < dm_.height(); ++y) {
    for (int x = 0; x < dm_.width(); ++x) {
      const GridCell c{x, y};
      if (!dm_.passable(c) || !point_in_footprint(dm_.cell_center(c), *fp)) continue;
      const bool clear = std::max(dm_.static_cost(c), dm_.inflation_cost(c)) == kFreeCost;
      const double d = distance(dm_.cell_center(c), target);
      if (!best || (clear && !best_clear) || (clear == best_clear && d < best_d)) {
        best = c;
        best_d = d;
        best_clear = clear;
      }
    }
  }
  return best;
}

void MissionRunner::sense_frame() {
  if (sc_.sensors.semantic3d) frames_.push_back(semantic_detect(ws_, *sc_.sensors.semantic3d));
}

void MissionRunner::tick(double v, double omega) {
  ws_ = step(ws_, sc_.dt, v, omega);
  run_.report.distance += std::abs(v) * sc_.dt;
  run_.trace.push_back(trace_record(ws_));
  const auto& p = ws_.robot.pose;
  run_.trace_csv_rows.push_back(
      fmt::format("{},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f}", ws_.tick, p.x, p.y, p.heading, v, omega));
}

bool MissionRunner::hold(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) {
    if (ws_.tick >= sc_.max_ticks) return false;
    if (sc_.sensors.lidar2d) update_dynamic_layer(dm_, lidar_scan(ws_, *sc_.sensors.lidar2d), ws_.tick, sc_.dynamic_ttl);
    sense_frame();
    tick(0.0, 0.0);
  }
  return true;
}

MissionRunner::NavOutcome MissionRunner::navigate(const std::string& target) {
  const auto goal = goal_cell(target);
  if (!goal) return NavOutcome::Blocked;
  const GridCell start = dm_.cell_of(ws_.robot.pose.position());
  if (!dm_.in_bounds(start)) return NavOutcome::Blocked;

  ReplanState rs(dm_, start, *goal);
  std::optional<Path> path = rs.replan();
  std::uint64_t stalled = 0;
  const FollowerConfig follower;

  while (true) {
    if (ws_.tick >= sc_.max_ticks) return NavOutcome::Timeout;

    std::vector<GridCell> changed;
    if (sc_.sensors.lidar2d)
      changed = update_dynamic_layer(dm_, lidar_scan(ws_, *sc_.sensors.lidar2d), ws_.tick, sc_.dynamic_ttl);
    sense_frame();

    const GridCell here = dm_.cell_of(ws_.robot.pose.position());
    if (dm_.in_bounds(here)) rs.set_start(here);
    if (!changed.empty()) rs.notify(changed);

    std::optional<GridCell> blocking;
    if (path && !changed.empty()) {
      // only the stretch ahead of the robot matters
      std::size_t from = 0;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < path->cells.size(); ++i) {
        const double d = distance(dm_.cell_center(path->cells[i]), ws_.robot.pose.position());
        if (d < nearest) {
          nearest = d;
          from = i;
        }
      }
      for (std::size_t i = from + 1; i < path->cells.size() && !blocking; ++i)
        if (std::binary_search(changed.begin(), changed.end(), path->cells[i],
                               [&](GridCell a, GridCell b) { return dm_.index(a) < dm_.index(b); }) &&
            dm_.cost(path->cells[i]) >= kUnknownCost)
          blocking = path->cells[i];
    }
    if (blocking) {
      path = rs.replan();
      ++run_.report.replans;
      episode(EpisodeKind::ObstacleDetected, fmt::format("cell({},{})", blocking->ix, blocking->iy));
      episode(EpisodeKind::Replan, target);
    } else if (!path) {
      path = rs.replan();
    }

    double v = 0.0, omega = 0.0;
    if (!path) {
      if (++stalled >= sc_.patience) return NavOutcome::Blocked;
    } else {
      stalled = 0;
      const auto points = path->points(dm_);
      const auto cmd = follow_step(ws_.robot, points, sc_.dt, follower);
      if (cmd.reached) return NavOutcome::Reached;
      v = cmd.v;
      omega = cmd.omega;
    }
    tick(v, omega);
  }
}

void MissionRunner::learn() {
  const EpisodeContext ctx{&run_.map, ws_.robot.pose, ws_.tick};
  for (const auto& frame : frames_) {
    const auto events = detect_novelty(frame.detections, *store_, frame.tick, symbols_);
    run_.report.learned_writes += commit_learned(events, {}, *store_, &ctx);
  }
  frames_.clear();
  if (in_.rules.empty()) return;

  std::set<Fact> base(state_.begin(), state_.end());
  for (const auto& [key, e] : store_->local_entries("env")) {
    const auto& rec = std::get<ElementRecord>(e.payload);
    base.insert(Fact{"is_a", {rec.symbol(), rec.symbolic.class_label}});
    for (const auto& r : rec.implicit) base.insert(Fact{std::string(to_string(r.predicate)), {r.subject, r.object}});
  }
  std::set<Fact> derived;
  for (const auto& f : infer_facts(base, in_.rules))
    if (!base.contains(f)) derived.insert(f);
  run_.report.learned_writes += commit_learned({}, derived, *store_);
}

std::optional<BehaviorPlan> MissionRunner::replan_behavior() {
  std::vector<GroundAction> usable;
  for (const auto& a : actions_) {
    const auto from = navigation_source(a), to = navigation_target(a);
    if (from && to && blocked_edges_.contains({*from, *to})) continue;
    usable.push_back(a);
  }
  std::string here;
  for (const auto& f : state_)
    if (f.predicate == "at" && f.args.size() == 2 && f.args[0] == "robot") here = f.args[1];
  return plan({state_.begin(), state_.end()}, Mission{sc_.goal, here}, usable);
}

bool MissionRunner::execute_plan() {
  std::size_t i = 0;
  while (i < plan_.steps.size()) {
    const GroundAction step_action = plan_.steps[i];
    if (const auto target = navigation_target(step_action)) {
      const auto outcome = navigate(*target);
      if (outcome == NavOutcome::Timeout) {
        learn();
        return fail(kFailTimeout);
      }
      if (outcome == NavOutcome::Blocked) {
        learn();
        if (const auto from = navigation_source(step_action)) blocked_edges_.insert({*from, *target});
        ++run_.report.replans;
        ++run_.report.behavior_replans;
        episode(EpisodeKind::Replan, step_action.label());
        auto bp = replan_behavior();
        if (!bp) return fail(kFailUnreachable);
        plan_ = std::move(*bp);
        for (const auto& s : plan_.steps) run_.report.plan.push_back(s.label());
        i = 0;
        continue;
      }
      episode(EpisodeKind::WaypointReached, *target);
    } else {
      const auto ticks = static_cast<std::uint64_t>(std::max(1.0, std::ceil(step_action.cost)));
      if (!hold(ticks)) {
        learn();
        return fail(kFailTimeout);
      }
    }
    for (const auto& d : step_action.del_effects) state_.erase(d);
    for (const auto& a : step_action.add_effects) state_.insert(a);
    learn();
    ++i;
  }
  for (const auto& g : sc_.goal)
    if (!state_.contains(g)) return fail(kFailUnsolvable);
  return true;
}

void MissionRunner::finish() {
  auto& r = run_.report;
  if (store_) {
    store_->flush_writeback();
    std::set<std::string> learned;
    for (auto t : kTierOrder)
      for (const auto& key : store_->keys(t))
        if (store_->peek(key, t)->provenance == Provenance::Learned) {
          learned.insert(key);
          if (t == TierId::Cloud) ++r.learned_in_cloud;
        }
    r.learned_entries = learned.size();
    r.tier_stats = store_->stats();
  }
  r.ticks = ws_.tick;
  r.static_collisions = ws_.static_collisions;
  r.actor_contacts = ws_.actor_contacts;
  r.episodes = run_.map.episodic.events();
  r.trace_digest = trace_hash(run_.trace);
}

MissionRun MissionRunner::run() {
  if (prepare() && execute_plan()) {
    run_.report.success = true;
    episode(EpisodeKind::MissionComplete, goal_symbol_);
  }
  finish();
  return std::move(run_);
}

}  // namespace

MissionRun run_mission(const Scenario& scenario, const MissionInputs& inputs) {
  return MissionRunner(scenario, inputs).run();
}

MissionRun run_mission(const Scenario& scenario) { return run_mission(scenario, load_mission_inputs(scenario)); }

std::string serialize_report(const MissionReport& r) {
  std::string out;
  auto line = [&](std::string_view key, const auto& value) { out += fmt::format("{}: {}\n", key, value); };
  line("success", r.success ? "true" : "false");
  line("failure", r.failure.empty() ? "none" : r.failure);
  line("plan", r.plan.empty() ? std::string("-") : fmt::format("{}", fmt::join(r.plan, " ")));
  line("ticks", r.ticks);
  line("distance", fmt::format("{:.6f}", r.distance));
  line("static_collisions", r.static_collisions);
  line("actor_contacts", r.actor_contacts);
  line("replans", r.replans);
  line("behavior_replans", r.behavior_replans);
  line("learned_writes", r.learned_writes);
  line("learned_entries", r.learned_entries);
  line("learned_in_cloud", r.learned_in_cloud);
  for (auto t : kTierOrder) {
    const auto& c = r.tier_stats[t];
    out += fmt::format("tier {}: hits={} misses={} evictions={} latency={}\n", to_string(t), c.hits, c.misses,
                       c.evictions, c.latency);
  }
  line("trace_digest", fmt::format("{:016x}", r.trace_digest));
  line("episodes", r.episodes.size());
  for (const auto& e : r.episodes)
    out += fmt::format("episode {} {} {:.3f} {:.3f} {:.3f}{}\n", e.tick, to_string(e.kind), e.pose.x, e.pose.y,
                       e.pose.heading, e.subject ? " " + *e.subject : std::string());
  return out;
}

std::string trace_csv(const MissionRun& run) {
  std::string out = "tick,x,y,theta,v,omega\n";
  for (const auto& row : run.trace_csv_rows) out += row + "\n";
  return out;
}

}  // namespace semnav
