#include "semnav/behavior_planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include <fmt/format.h>

namespace semnav {

namespace {

Fact substitute(const Fact& pattern, const std::map<std::string, std::string>& binding) {
  Fact f{pattern.predicate, {}};
  f.args.reserve(pattern.args.size());
  for (const auto& a : pattern.args) f.args.push_back(is_variable(a) ? binding.at(a) : a);
  return f;
}

std::vector<Fact> substitute_all(const std::vector<Fact>& patterns, const std::map<std::string, std::string>& b) {
  std::vector<Fact> out;
  for (const auto& p : patterns) {
    Fact f = substitute(p, b);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

GroundingResult ground_actions(const std::vector<ActionTemplate>& templates, const SemanticEpisodicMap& map) {
  GroundingResult result;
  for (const auto& t : templates) {
    std::vector<std::vector<std::string>> candidates;
    bool unknown_type = false;
    for (const auto& p : t.params) {
      std::vector<std::string> syms;
      if (p.type == "space") {
        for (const auto& [sym, c] : map.topology.nodes) syms.push_back(sym);
      } else {
        for (const auto& [sym, a] : map.semantic.annotations)
          if (a.class_label == p.type) syms.push_back(sym);
      }
      if (syms.empty()) {
        result.diagnostics.push_back(
            fmt::format("action {}: no map symbol has class '{}'; template skipped", t.name, p.type));
        unknown_type = true;
        break;
      }
      candidates.push_back(std::move(syms));
    }
    if (unknown_type) continue;

    std::vector<std::string> chosen(t.params.size());
    std::function<void(std::size_t)> bind = [&](std::size_t i) {
      if (i == t.params.size()) {
        std::map<std::string, std::string> binding;
        for (std::size_t k = 0; k < chosen.size(); ++k) binding[t.params[k].variable] = chosen[k];
        GroundAction g;
        g.name = t.name;
        g.bindings = chosen;
        g.preconditions = substitute_all(t.preconditions, binding);
        g.add_effects = substitute_all(t.add_effects, binding);
        g.del_effects = substitute_all(t.del_effects, binding);
        for (const auto& f : g.add_effects) {
          if (std::find(g.del_effects.begin(), g.del_effects.end(), f) != g.del_effects.end()) {
            result.diagnostics.push_back(fmt::format("{}: {} is both added and deleted; skipped", g.label(), to_string(f)));
            return;
          }
        }
        if (t.cost.kind == CostSpec::Kind::TopoDistance) {
          const auto d = map.topology.shortest_distance(binding.at(t.cost.from_var), binding.at(t.cost.to_var));
          if (!d || !(*d > 0.0)) return;
          g.cost = *d;
        } else {
          g.cost = t.cost.constant;
        }
        result.actions.push_back(std::move(g));
        return;
      }
      for (const auto& sym : candidates[i]) {
        if (std::find(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(i), sym) !=
            chosen.begin() + static_cast<std::ptrdiff_t>(i))
          continue;
        chosen[i] = sym;
        bind(i + 1);
      }
    };
    bind(0);
  }
  return result;
}

std::vector<Fact> map_facts(const SemanticEpisodicMap& map) {
  std::set<Fact> facts;
  for (const auto& e : map.topology.edges) {
    facts.insert(Fact{"connected", {e.a, e.b}});
    facts.insert(Fact{"connected", {e.b, e.a}});
  }
  for (const auto& [sym, a] : map.semantic.annotations)
    if (a.containing_space) facts.insert(Fact{"inside", {sym, *a.containing_space}});
  return {facts.begin(), facts.end()};
}

namespace {

// Search problem with facts interned to integers; states are sorted id vectors.
class Interned {
 public:
  int id(const Fact& f) {
    auto [it, inserted] = ids_.emplace(f, static_cast<int>(ids_.size()));
    return it->second;
  }
  std::vector<int> ids(const std::vector<Fact>& facts) {
    std::vector<int> out;
    for (const auto& f : facts) out.push_back(id(f));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::map<Fact, int> ids_;
};

bool includes(const std::vector<int>& state, const std::vector<int>& facts) {
  return std::includes(state.begin(), state.end(), facts.begin(), facts.end());
}

struct Heuristic {
  double min_cost = 0.0;
  std::size_t max_goal_adds = 0;

  double operator()(std::size_t unsatisfied) const {
    if (unsatisfied == 0 || max_goal_adds == 0) return 0.0;
    const auto steps = (unsatisfied + max_goal_adds - 1) / max_goal_adds;
    return static_cast<double>(steps) * min_cost;
  }
};

Heuristic make_heuristic(const std::vector<std::vector<int>>& adds, const std::vector<double>& costs,
                         const std::vector<int>& goal) {
  Heuristic h;
  if (costs.empty()) return h;
  h.min_cost = *std::min_element(costs.begin(), costs.end());
  for (const auto& a : adds) {
    std::size_t n = 0;
    for (int f : a) n += std::binary_search(goal.begin(), goal.end(), f);
    h.max_goal_adds = std::max(h.max_goal_adds, n);
  }
  return h;
}

std::size_t unsatisfied(const std::vector<int>& state, const std::vector<int>& goal) {
  std::size_t n = 0;
  for (int g : goal) n += !std::binary_search(state.begin(), state.end(), g);
  return n;
}

}  // namespace

double plan_heuristic(const std::vector<Fact>& state, const std::vector<Fact>& goal,
                      const std::vector<GroundAction>& actions) {
  Interned facts;
  std::vector<std::vector<int>> adds;
  std::vector<double> costs;
  for (const auto& a : actions) {
    adds.push_back(facts.ids(a.add_effects));
    costs.push_back(a.cost);
  }
  const auto g = facts.ids(goal);
  return make_heuristic(adds, costs, g)(unsatisfied(facts.ids(state), g));
}

std::optional<BehaviorPlan> plan(const std::vector<Fact>& initial_facts, const Mission& mission,
                                 const std::vector<GroundAction>& actions, SearchStats* stats) {
  for (const auto& a : actions)
    if (!(a.cost > 0.0)) throw std::invalid_argument(fmt::format("action {} has non-positive cost", a.label()));

  // successors are generated in label order so equal-priority nodes stay deterministic
  std::vector<std::size_t> order(actions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> labels;
  for (const auto& a : actions) labels.push_back(a.label());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return labels[x] < labels[y]; });

  Interned facts;
  std::vector<std::vector<int>> pre, add, del;
  std::vector<double> cost;
  for (const auto& a : actions) {
    pre.push_back(facts.ids(a.preconditions));
    add.push_back(facts.ids(a.add_effects));
    del.push_back(facts.ids(a.del_effects));
    cost.push_back(a.cost);
  }
  const auto goal = facts.ids(mission.goal);
  const auto start = facts.ids(initial_facts);
  const Heuristic h = make_heuristic(add, cost, goal);

  struct Node {
    std::vector<int> state;
    double g;
    double h;
    std::vector<std::size_t> path;  // indices into actions
  };
  std::vector<Node> nodes;
  auto lex_path_less = [&](const Node& a, const Node& b) {
    return std::lexicographical_compare(a.path.begin(), a.path.end(), b.path.begin(), b.path.end(),
                                        [&](std::size_t x, std::size_t y) { return labels[x] < labels[y]; });
  };
  auto worse = [&](std::size_t x, std::size_t y) {
    const Node& a = nodes[x];
    const Node& b = nodes[y];
    const double fa = a.g + a.h, fb = b.g + b.h;
    if (fa != fb) return fa > fb;
    if (a.h != b.h) return a.h > b.h;
    return lex_path_less(b, a);
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> open(worse);
  std::map<std::vector<int>, double> best_g;

  nodes.push_back({start, 0.0, h(unsatisfied(start, goal)), {}});
  open.push(0);
  best_g[start] = 0.0;

  while (!open.empty()) {
    const std::size_t cur = open.top();
    open.pop();
    if (nodes[cur].g > best_g[nodes[cur].state]) continue;
    if (includes(nodes[cur].state, goal)) {
      BehaviorPlan result;
      for (auto i : nodes[cur].path) result.steps.push_back(actions[i]);
      double total = 0.0;
      for (const auto& s : result.steps) total += s.cost;
      result.total_cost = total;
      return result;
    }
    if (stats) ++stats->expanded;
    for (auto ai : order) {
      if (!includes(nodes[cur].state, pre[ai])) continue;
      std::vector<int> next;
      std::set_difference(nodes[cur].state.begin(), nodes[cur].state.end(), del[ai].begin(), del[ai].end(),
                          std::back_inserter(next));
      std::vector<int> merged;
      std::set_union(next.begin(), next.end(), add[ai].begin(), add[ai].end(), std::back_inserter(merged));
      const double g = nodes[cur].g + cost[ai];
      auto it = best_g.find(merged);
      if (it != best_g.end() && it->second <= g) continue;
      best_g[merged] = g;
      auto path = nodes[cur].path;
      path.push_back(ai);
      const double hv = h(unsatisfied(merged, goal));
      nodes.push_back({std::move(merged), g, hv, std::move(path)});
      open.push(nodes.size() - 1);
      if (stats) ++stats->generated;
    }
  }
  return std::nullopt;
}

PlanCheck validate_plan(const std::vector<Fact>& initial_facts, const std::vector<GroundAction>& steps,
                        const std::vector<Fact>& goal) {
  std::set<Fact> state(initial_facts.begin(), initial_facts.end());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& p : steps[i].preconditions) {
      if (!state.contains(p))
        return {false, i,
                fmt::format("step {} ({}): precondition {} does not hold", i + 1, steps[i].label(), to_string(p))};
    }
    for (const auto& d : steps[i].del_effects) state.erase(d);
    for (const auto& a : steps[i].add_effects) state.insert(a);
  }
  for (const auto& g : goal)
    if (!state.contains(g)) return {false, std::nullopt, fmt::format("goal fact {} does not hold", to_string(g))};
  return {true, std::nullopt, {}};
}

}  // namespace semnav
