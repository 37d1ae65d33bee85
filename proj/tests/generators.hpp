#pragma once

// Seeded random instances shared by the unit and acceptance tests.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "semnav/behavior_planner.hpp"
#include "semnav/learning.hpp"
#include "semnav/navigation.hpp"
#include "semnav/simulator.hpp"

namespace gen {

using namespace semnav;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
inline int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Square grid, each cell lethal with probability `obstacle_ratio`, otherwise a
/// random traversal cost below the inscribed value.
inline DrivingMap random_grid(std::mt19937_64& rng, int n, double obstacle_ratio) {
  std::vector<std::uint8_t> costs(static_cast<std::size_t>(n) * n);
  std::bernoulli_distribution blocked(obstacle_ratio);
  for (auto& c : costs) c = blocked(rng) ? kLethalCost : static_cast<std::uint8_t>(pick(rng, 0, 3) * 50);
  return DrivingMap(n, n, 0.1, {0.0, 0.0}, std::move(costs));
}

inline GridCell random_cell(std::mt19937_64& rng, const DrivingMap& dm) {
  return {pick(rng, 0, dm.width() - 1), pick(rng, 0, dm.height() - 1)};
}

inline ElementRecord obstacle(const std::string& symbol, const std::string& cls, Footprint fp) {
  ElementRecord e;
  e.symbolic.symbol = symbol;
  e.symbolic.class_label = cls;
  e.explicit_model.model2d = std::move(fp);
  return e;
}

inline Footprint triangle(std::mt19937_64& rng, Point2 c, double size) {
  Footprint f;
  const double start = uniform(rng, 0, 2 * kPi);
  for (int k = 0; k < 3; ++k) {
    const double a = start + k * 2 * kPi / 3 + uniform(rng, -0.4, 0.4);
    const double r = size * uniform(rng, 0.5, 1.0);
    f.vertices.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return f;
}

/// A 20 m square arena with random boxes, triangles and actors, the robot
/// somewhere in free space.
inline WorldState random_world(std::mt19937_64& rng) {
  auto world = std::make_shared<WorldDescription>();
  world->name = "random";
  ElementRecord arena;
  arena.symbolic = {"arena", ElementCategory::Space, "room", "", {}};
  arena.explicit_model.model2d = axis_box(0, 0, 20, 20);
  world->spaces.push_back(arena);

  const int boxes = pick(rng, 1, 6);
  for (int i = 0; i < boxes; ++i) {
    const double x = uniform(rng, 1, 17), y = uniform(rng, 1, 17);
    world->elements.push_back(
        obstacle("box_" + std::to_string(i), "box", axis_box(x, y, x + uniform(rng, 0.2, 3), y + uniform(rng, 0.2, 3))));
  }
  const int tris = pick(rng, 0, 4);
  for (int i = 0; i < tris; ++i)
    world->elements.push_back(
        obstacle("tri_" + std::to_string(i), "tri", triangle(rng, {uniform(rng, 2, 18), uniform(rng, 2, 18)}, 1.5)));
  const int actors = pick(rng, 0, 3);
  for (int i = 0; i < actors; ++i) {
    ActorScript a{"actor_" + std::to_string(i), "person", uniform(rng, 0.2, 0.5), 0.5, {}};
    a.waypoints = {{uniform(rng, 1, 19), uniform(rng, 1, 19)}, {uniform(rng, 1, 19), uniform(rng, 1, 19)}};
    world->actors.push_back(a);
  }
  world->robot_radius = 0.25;
  // rejection-sample a spawn outside every footprint and actor
  for (;;) {
    const Point2 p{uniform(rng, 0.5, 19.5), uniform(rng, 0.5, 19.5)};
    bool clear = true;
    for (const auto& e : world->elements) clear = clear && !point_in_footprint(p, *e.explicit_model.model2d);
    for (const auto& a : world->actors) clear = clear && distance(p, a.waypoints.front()) > a.footprint_radius;
    if (clear) {
      world->robot_spawn = {p.x, p.y, uniform(rng, -kPi, kPi)};
      break;
    }
  }
  return make_world_state(std::move(world));
}

/// Up to `fact_count` propositions, up to `action_count` actions with integer costs.
struct StripsInstance {
  std::vector<Fact> initial;
  std::vector<Fact> goal;
  std::vector<GroundAction> actions;
};

inline StripsInstance random_strips(std::mt19937_64& rng, int fact_count, int action_count) {
  std::vector<Fact> facts;
  for (int i = 0; i < fact_count; ++i) facts.push_back({"p", {std::to_string(i)}});
  auto subset = [&](int lo, int hi) {
    std::vector<Fact> out = facts;
    std::shuffle(out.begin(), out.end(), rng);
    out.resize(static_cast<std::size_t>(pick(rng, lo, std::min(hi, fact_count))));
    std::sort(out.begin(), out.end());
    return out;
  };
  StripsInstance s;
  s.initial = subset(1, 3);
  s.goal = subset(1, 3);
  for (int i = 0; i < action_count; ++i) {
    GroundAction a;
    a.name = "a";
    a.bindings = {std::to_string(i)};
    a.preconditions = subset(0, 2);
    a.add_effects = subset(1, 2);
    for (const auto& f : subset(0, 2))
      if (std::find(a.add_effects.begin(), a.add_effects.end(), f) == a.add_effects.end()) a.del_effects.push_back(f);
    a.cost = pick(rng, 1, 5);
    s.actions.push_back(std::move(a));
  }
  return s;
}

/// Random Datalog program over a small constant domain.
struct RuleInstance {
  std::set<Fact> facts;
  std::vector<Rule> rules;
};

inline RuleInstance random_rules(std::mt19937_64& rng, int max_facts, int max_rules) {
  const std::vector<std::string> consts = {"a", "b", "c", "d"};
  const std::vector<std::pair<std::string, int>> preds = {{"p", 1}, {"q", 2}, {"r", 2}, {"s", 1}};
  const std::vector<std::string> vars = {"?x", "?y", "?z"};
  RuleInstance inst;
  const int nf = pick(rng, 1, max_facts);
  for (int i = 0; i < nf; ++i) {
    const auto& [p, n] = preds[pick(rng, 0, 3)];
    Fact f{p, {}};
    for (int k = 0; k < n; ++k) f.args.push_back(consts[pick(rng, 0, 3)]);
    inst.facts.insert(f);
  }
  const int nr = pick(rng, 1, max_rules);
  while (static_cast<int>(inst.rules.size()) < nr) {
    std::vector<Fact> body;
    std::set<std::string> bound;
    const int nb = pick(rng, 1, 3);
    for (int i = 0; i < nb; ++i) {
      const auto& [p, n] = preds[pick(rng, 0, 3)];
      Fact f{p, {}};
      for (int k = 0; k < n; ++k) {
        if (pick(rng, 0, 4) == 0) {
          f.args.push_back(consts[pick(rng, 0, 3)]);
        } else {
          f.args.push_back(vars[pick(rng, 0, 2)]);
          bound.insert(f.args.back());
        }
      }
      body.push_back(f);
    }
    const auto& [hp, hn] = preds[pick(rng, 0, 3)];
    Fact head{hp, {}};
    std::vector<std::string> pool(bound.begin(), bound.end());
    for (int k = 0; k < hn; ++k)
      head.args.push_back(pool.empty() || pick(rng, 0, 5) == 0 ? consts[pick(rng, 0, 3)]
                                                               : pool[pick(rng, 0, static_cast<int>(pool.size()) - 1)]);
    inst.rules.push_back(make_rule(head, body));
  }
  return inst;
}

}  // namespace gen
