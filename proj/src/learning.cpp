#include "semnav/learning.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace semnav {

std::string_view to_string(NoveltyKind k) {
  return k == NoveltyKind::NewObject ? "NEW_OBJECT" : "DISPLACED_OBJECT";
}

std::optional<Point2> stored_position(const ElementRecord& record) {
  const auto& fp = record.explicit_model.model2d;
  if (!fp || fp->vertices.empty()) return std::nullopt;
  return centroid(*fp);
}

const std::string& record_class(const ElementRecord& record) {
  const auto& m3 = record.explicit_model.model3d;
  return m3 && !m3->semantic_class.empty() ? m3->semantic_class : record.symbolic.class_label;
}

namespace {

const StoredEntry* find_any_tier(const TierStore& store, const std::string& key) {
  for (auto t : kTierOrder)
    if (const auto* e = store.peek(key, t)) return e;
  return nullptr;
}

std::optional<std::string> space_at(const std::map<std::string, StoredEntry>& env, Point2 p) {
  for (const auto& [key, e] : env) {
    const auto& rec = std::get<ElementRecord>(e.payload);
    if (rec.is_space() && rec.explicit_model.model2d && point_in_footprint(p, *rec.explicit_model.model2d))
      return rec.symbol();
  }
  return std::nullopt;
}

struct Candidate {
  std::string symbol;
  std::string semantic_class;
  Point2 position;
};

}  // namespace

std::vector<NoveltyEvent> detect_novelty(const std::vector<Detection>& detections, const TierStore& store,
                                         std::uint64_t tick, SymbolCounter& symbols, const LearningConfig& config) {
  const auto env = store.local_entries("env");
  std::vector<Candidate> pool;
  for (const auto& [key, e] : env) {
    const auto* rec = std::get_if<ElementRecord>(&e.payload);
    if (!rec || rec->is_space()) continue;
    if (auto pos = stored_position(*rec)) pool.push_back({rec->symbol(), record_class(*rec), *pos});
  }

  std::vector<NoveltyEvent> events;
  std::set<std::string> consumed;
  for (const auto& d : detections) {
    if (d.symbol) {
      if (const auto* e = find_any_tier(store, env_key(*d.symbol))) {
        consumed.insert(*d.symbol);
        const auto& rec = std::get<ElementRecord>(e->payload);
        const auto prior = stored_position(rec);
        if (prior && distance(*prior, d.position) > config.displacement_threshold)
          events.push_back({NoveltyKind::DisplacedObject, *d.symbol, d.semantic_class, d.position, prior,
                            space_at(env, d.position), tick});
        continue;
      }
    }
    const Candidate* best = nullptr;
    double best_d = config.match_radius;
    for (const auto& c : pool) {
      if (c.semantic_class != d.semantic_class || consumed.contains(c.symbol)) continue;
      const double dist = distance(c.position, d.position);
      if (dist <= best_d && (!best || dist < best_d)) {
        best = &c;
        best_d = dist;
      }
    }
    if (best) {
      consumed.insert(best->symbol);
      if (best_d > config.displacement_threshold)
        events.push_back({NoveltyKind::DisplacedObject, best->symbol, d.semantic_class, d.position, best->position,
                          space_at(env, d.position), tick});
      continue;
    }
    NoveltyEvent ev{NoveltyKind::NewObject, symbols.next(), d.semantic_class, d.position, std::nullopt,
                    space_at(env, d.position), tick};
    consumed.insert(ev.symbol);
    pool.push_back({ev.symbol, ev.semantic_class, ev.observed});
    events.push_back(std::move(ev));
  }
  return events;
}

// ---- rules ------------------------------------------------------------------

RuleParseError::RuleParseError(int l, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", l, what)), line(l) {}

Rule make_rule(Fact head, std::vector<Fact> body) {
  if (body.empty()) throw RuleParseError(0, fmt::format("rule for {} has an empty body", to_string(head)));
  std::set<std::string> bound;
  for (const auto& f : body)
    for (const auto& a : f.args)
      if (is_variable(a)) bound.insert(a);
  for (const auto& a : head.args)
    if (is_variable(a) && !bound.contains(a))
      throw RuleParseError(0, fmt::format("unsafe rule: head variable {} does not occur in the body", a));
  return Rule{std::move(head), std::move(body)};
}

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto sep = line.find(":-");
    if (sep == std::string::npos) throw RuleParseError(line_no, "expected 'head :- body'");
    try {
      rules.push_back(make_rule(parse_fact(line.substr(0, sep)), parse_fact_list(line.substr(sep + 2))));
    } catch (const RuleParseError& e) {
      throw RuleParseError(line_no, std::string(e.what()).substr(std::string_view("line 0: ").size()));
    } catch (const std::invalid_argument& e) {
      throw RuleParseError(line_no, e.what());
    }
  }
  return rules;
}

std::string to_string(const Rule& r) {
  std::string out = to_string(r.head) + " :- ";
  for (std::size_t i = 0; i < r.body.size(); ++i) out += (i ? ", " : "") + to_string(r.body[i]);
  return out;
}

namespace {

using Binding = std::map<std::string, std::string>;

bool unify(const Fact& pattern, const Fact& fact, Binding& b) {
  if (pattern.predicate != fact.predicate || pattern.args.size() != fact.args.size()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    const auto& p = pattern.args[i];
    if (!is_variable(p)) {
      if (p != fact.args[i]) return false;
      continue;
    }
    auto [it, inserted] = b.emplace(p, fact.args[i]);
    if (!inserted && it->second != fact.args[i]) return false;
  }
  return true;
}

Fact instantiate(const Fact& pattern, const Binding& b) {
  Fact f{pattern.predicate, {}};
  for (const auto& a : pattern.args) f.args.push_back(is_variable(a) ? b.at(a) : a);
  return f;
}

using Index = std::map<std::string, std::vector<Fact>>;  // predicate -> facts

// Joins body atoms in order; atom `pivot` draws from `delta`, the rest from `all`.
void join(const Rule& r, std::size_t i, std::size_t pivot, const Index& all, const Index& delta, Binding& b,
          std::vector<Fact>& out) {
  if (i == r.body.size()) {
    out.push_back(instantiate(r.head, b));
    return;
  }
  const Index& source = i == pivot ? delta : all;
  auto it = source.find(r.body[i].predicate);
  if (it == source.end()) return;
  for (const auto& f : it->second) {
    Binding next = b;
    if (unify(r.body[i], f, next)) join(r, i + 1, pivot, all, delta, next, out);
  }
}

}  // namespace

std::set<Fact> infer_facts(const std::set<Fact>& facts, const std::vector<Rule>& rules) {
  std::set<Fact> closure = facts;
  Index all, delta;
  for (const auto& f : facts) {
    all[f.predicate].push_back(f);
    delta[f.predicate].push_back(f);
  }
  while (!delta.empty()) {
    std::vector<Fact> derived;
    for (const auto& r : rules) {
      for (std::size_t pivot = 0; pivot < r.body.size(); ++pivot) {
        if (!delta.contains(r.body[pivot].predicate)) continue;
        Binding b;
        join(r, 0, pivot, all, delta, b, derived);
      }
    }
    Index next;
    for (auto& f : derived) {
      if (!closure.insert(f).second) continue;
      all[f.predicate].push_back(f);
      next[f.predicate].push_back(std::move(f));
    }
    delta = std::move(next);
  }
  return closure;
}

// ---- commit -----------------------------------------------------------------

std::size_t commit_learned(const std::vector<NoveltyEvent>& events, const std::set<Fact>& inferred, TierStore& store,
                           const EpisodeContext* episodes, const LearningConfig& config) {
  std::size_t written = 0;
  for (const auto& ev : events) {
    const std::string key = env_key(ev.symbol);
    ElementRecord rec;
    std::uint64_t version = 1;
    const auto* existing = find_any_tier(store, key);
    if (ev.kind == NoveltyKind::DisplacedObject && existing) {
      rec = std::get<ElementRecord>(existing->payload);
      version = existing->version + 1;
      if (auto& fp = rec.explicit_model.model2d) {
        const Point2 shift = ev.observed - centroid(*fp);
        for (auto& v : fp->vertices) v = v + shift;
      }
    } else {
      const double h = config.learned_extent / 2.0;
      rec.symbolic.symbol = ev.symbol;
      rec.symbolic.class_label = ev.semantic_class;
      rec.explicit_model.model2d = axis_box(ev.observed.x - h, ev.observed.y - h, ev.observed.x + h, ev.observed.y + h);
      rec.explicit_model.model3d = Model3d{config.learned_height, ev.semantic_class};
      rec.explicit_model.physical = PhysicalModel{false, "learned"};
    }
    std::erase_if(rec.implicit, [](const Relation& r) { return r.predicate == Predicate::Inside; });
    if (ev.space) rec.implicit.push_back(Relation{Predicate::Inside, ev.symbol, *ev.space});

    store.put(StoredEntry{key, std::move(rec), version, 1, Provenance::Learned}, TierId::OnDemand);
    ++written;
    if (episodes && episodes->map)
      append_episode(*episodes->map, EpisodeEvent{episodes->tick, episodes->pose, EpisodeKind::NovelObject, ev.symbol});
  }
  for (const auto& f : inferred) {
    const std::string key = knowledge_key(f);
    if (store.contains_anywhere(key)) continue;
    store.put(StoredEntry{key, f, 1, 1, Provenance::Learned}, TierId::OnDemand);
    ++written;
  }
  return written;
}

}  // namespace semnav
