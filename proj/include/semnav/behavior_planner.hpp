#pragma once

// Behavior planning: ground the behavior database against the symbols of a
// generated map, then run a cost-optimal forward search over STRIPS states.

#include <optional>
#include <string>
#include <vector>

#include "semnav/map_generator.hpp"
#include "semnav/strips.hpp"

namespace semnav {

struct GroundingResult {
  std::vector<GroundAction> actions;
  std::vector<std::string> diagnostics;
};

/// Emits every injective, type-consistent binding of each template's
/// parameters. The type `space` ranges over topology nodes; any other type
/// ranges over annotated elements with that class label. topo_distance costs
/// are shortest paths on the topology layer; bindings with no path are dropped.
GroundingResult ground_actions(const std::vector<ActionTemplate>& templates, const SemanticEpisodicMap& map);

/// Facts implied by a map: connected(a,b) both ways per topology edge and
/// inside(x,s) per annotated containing space.
std::vector<Fact> map_facts(const SemanticEpisodicMap& map);

struct Mission {
  std::vector<Fact> goal;
  std::string start_space;
};

struct BehaviorPlan {
  std::vector<GroundAction> steps;
  double total_cost = 0.0;
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
};

/// A* over fact sets. Heuristic: ceil(unsatisfied goals / most goals any one
/// action adds) * cheapest action cost. Ties on f are broken by the
/// lexicographic order of the action-label sequence. nullopt = unsolvable.
std::optional<BehaviorPlan> plan(const std::vector<Fact>& initial_facts, const Mission& mission,
                                 const std::vector<GroundAction>& actions, SearchStats* stats = nullptr);

/// The heuristic value plan() uses for a state; exposed for admissibility checks.
double plan_heuristic(const std::vector<Fact>& state, const std::vector<Fact>& goal,
                      const std::vector<GroundAction>& actions);

struct PlanCheck {
  bool valid = false;
  std::optional<std::size_t> failed_step;  // 0-based; nullopt when the goal check failed
  std::string message;
};

PlanCheck validate_plan(const std::vector<Fact>& initial_facts, const std::vector<GroundAction>& steps,
                        const std::vector<Fact>& goal);

}  // namespace semnav
