#include "semnav/memory.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include <fmt/format.h>

#include "json.hpp"

namespace semnav {

using nlohmann::json;

std::string_view to_string(TierId t) {
  switch (t) {
    case TierId::Stm: return "STM";
    case TierId::OnDemand: return "ONDEMAND";
    case TierId::Network: return "NETWORK";
    case TierId::Cloud: return "CLOUD";
  }
  return "?";
}

std::optional<TierId> parse_tier(std::string_view text) {
  for (auto t : kTierOrder)
    if (to_string(t) == text) return t;
  return std::nullopt;
}

std::string_view to_string(Provenance p) { return p == Provenance::Learned ? "learned" : "authored"; }

bool valid_key(std::string_view key) {
  const auto colon = key.find(':');
  if (colon == std::string_view::npos || colon + 1 >= key.size()) return false;
  const auto ns = key.substr(0, colon);
  if (ns != "env" && ns != "behavior" && ns != "knowledge" && ns != "map") return false;
  for (char c : key)
    if (c == '\t' || c == '\n' || c == '\r') return false;
  return true;
}

std::string env_key(std::string_view symbol) { return "env:" + std::string(symbol); }
std::string behavior_key(std::string_view name) { return "behavior:" + std::string(name); }
std::string knowledge_key(const Fact& f) { return "knowledge:" + to_string(f); }

TierConfigs default_tier_configs() {
  return {TierConfig{64, 0}, TierConfig{256, 1}, TierConfig{1024, 5}, TierConfig{std::nullopt, 50}};
}

// ---- payload codec ----------------------------------------------------------

namespace {

json points_to_json(const std::vector<Point2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(json::array({p.x, p.y}));
  return arr;
}

std::vector<Point2> points_from_json(const json& j) {
  std::vector<Point2> pts;
  for (const auto& p : j.get_ref<const json::array_t&>()) {
    if (p.size() != 2) throw std::invalid_argument("point must have two coordinates");
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return pts;
}

json facts_to_json(const std::vector<Fact>& facts) {
  json arr = json::array();
  for (const auto& f : facts) arr.push_back(to_string(f));
  return arr;
}

std::vector<Fact> facts_from_json(const json& j) {
  std::vector<Fact> out;
  for (const auto& f : j.get_ref<const json::array_t&>()) out.push_back(parse_fact(f.get<std::string>()));
  return out;
}

json element_to_json(const ElementRecord& e) {
  json j;
  j["symbol"] = e.symbolic.symbol;
  j["class"] = e.symbolic.class_label;
  j["space"] = e.is_space();
  j["display"] = e.symbolic.display_name;
  j["aliases"] = e.symbolic.aliases;
  const auto& ex = e.explicit_model;
  j["model2d"] = ex.model2d ? points_to_json(ex.model2d->vertices) : json(nullptr);
  j["model3d"] = ex.model3d ? json{{"height", ex.model3d->height}, {"semantic", ex.model3d->semantic_class}}
                            : json(nullptr);
  j["static"] = ex.physical.is_static;
  j["material"] = ex.physical.material_tag;
  json rels = json::array();
  for (const auto& r : e.implicit) rels.push_back(json::array({std::string(to_string(r.predicate)), r.subject, r.object}));
  j["relations"] = rels;
  return j;
}

ElementRecord element_from_json(const json& j) {
  ElementRecord e;
  e.symbolic.symbol = j.at("symbol").get<std::string>();
  e.symbolic.class_label = j.at("class").get<std::string>();
  e.symbolic.category = j.at("space").get<bool>() ? ElementCategory::Space : ElementCategory::Object;
  e.symbolic.display_name = j.at("display").get<std::string>();
  e.symbolic.aliases = j.at("aliases").get<std::set<std::string>>();
  if (!j.at("model2d").is_null()) e.explicit_model.model2d = Footprint{points_from_json(j.at("model2d"))};
  if (const auto& m = j.at("model3d"); !m.is_null())
    e.explicit_model.model3d = Model3d{m.at("height").get<double>(), m.at("semantic").get<std::string>()};
  e.explicit_model.physical.is_static = j.at("static").get<bool>();
  e.explicit_model.physical.material_tag = j.at("material").get<std::string>();
  for (const auto& r : j.at("relations").get_ref<const json::array_t&>()) {
    const auto pred = parse_predicate(r.at(0).get<std::string>());
    if (!pred) throw std::invalid_argument("unknown predicate");
    e.implicit.push_back({*pred, r.at(1).get<std::string>(), r.at(2).get<std::string>()});
  }
  return e;
}

json template_to_json(const ActionTemplate& t) {
  json j;
  j["name"] = t.name;
  json params = json::array();
  for (const auto& p : t.params) params.push_back(json::array({p.variable, p.type}));
  j["params"] = params;
  j["pre"] = facts_to_json(t.preconditions);
  j["add"] = facts_to_json(t.add_effects);
  j["del"] = facts_to_json(t.del_effects);
  if (t.cost.kind == CostSpec::Kind::TopoDistance)
    j["cost"] = json{{"topo_distance", json::array({t.cost.from_var, t.cost.to_var})}};
  else
    j["cost"] = json{{"constant", t.cost.constant}};
  return j;
}

ActionTemplate template_from_json(const json& j) {
  ActionTemplate t;
  t.name = j.at("name").get<std::string>();
  for (const auto& p : j.at("params").get_ref<const json::array_t&>())
    t.params.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
  t.preconditions = facts_from_json(j.at("pre"));
  t.add_effects = facts_from_json(j.at("add"));
  t.del_effects = facts_from_json(j.at("del"));
  const auto& c = j.at("cost");
  if (c.contains("topo_distance")) {
    const auto& v = c.at("topo_distance");
    t.cost = CostSpec{CostSpec::Kind::TopoDistance, 0.0, v.at(0).get<std::string>(), v.at(1).get<std::string>()};
  } else {
    t.cost = CostSpec{CostSpec::Kind::Constant, c.at("constant").get<double>(), {}, {}};
  }
  return t;
}

json tile_to_json(const MapTile& m) {
  return json{{"id", m.id},         {"resolution", m.resolution}, {"origin", json::array({m.origin.x, m.origin.y})},
              {"width", m.width},   {"height", m.height},         {"cells", m.cells}};
}

MapTile tile_from_json(const json& j) {
  MapTile m;
  m.id = j.at("id").get<std::string>();
  m.resolution = j.at("resolution").get<double>();
  m.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  m.width = j.at("width").get<int>();
  m.height = j.at("height").get<int>();
  m.cells = j.at("cells").get<std::string>();
  if (m.width < 0 || m.height < 0 || m.cells.size() != static_cast<std::size_t>(m.width) * m.height)
    throw std::invalid_argument("map tile cell count mismatch");
  return m;
}

}  // namespace

std::string payload_to_text(const Payload& p) {
  json j = std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ElementRecord>) return {{"element", element_to_json(v)}};
        else if constexpr (std::is_same_v<T, ActionTemplate>) return {{"action", template_to_json(v)}};
        else if constexpr (std::is_same_v<T, Fact>) return {{"fact", to_string(v)}};
        else return {{"tile", tile_to_json(v)}};
      },
      p);
  return j.dump();
}

Payload payload_from_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
    if (!j.is_object() || j.size() != 1) throw std::invalid_argument("payload must hold exactly one kind");
    if (j.contains("element")) return element_from_json(j.at("element"));
    if (j.contains("action")) return template_from_json(j.at("action"));
    if (j.contains("fact")) return parse_fact(j.at("fact").get<std::string>());
    if (j.contains("tile")) return tile_from_json(j.at("tile"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed payload: ") + e.what());
  }
  throw std::invalid_argument("unknown payload kind");
}

// ---- store ------------------------------------------------------------------

TierStore::TierStore(const TierConfigs& configs) : configs_(configs) {
  for (std::size_t i = 0; i < kTierCount; ++i) {
    if (configs_[i].capacity && *configs_[i].capacity == 0)
      throw std::invalid_argument(fmt::format("tier {} capacity must be positive", to_string(kTierOrder[i])));
    if (i > 0 && configs_[i].latency < configs_[i - 1].latency)
      throw std::invalid_argument("tier latencies must be non-decreasing in probe order");
  }
}

bool TierStore::fits(TierId tier, std::uint64_t units) const {
  const auto& cap = configs_[index_of(tier)].capacity;
  return !cap || units <= *cap;
}

void TierStore::erase(TierId tier, std::string_view key) {
  auto& t = tiers_[index_of(tier)];
  auto it = t.index.find(std::string(key));
  if (it == t.index.end()) return;
  t.used -= it->second->size_units;
  t.lru.erase(it->second);
  t.index.erase(it);
}

void TierStore::evict_to_fit(TierId tier, std::string_view keep) {
  auto& t = tiers_[index_of(tier)];
  const auto& cap = configs_[index_of(tier)].capacity;
  if (!cap) return;
  auto it = t.lru.begin();
  while (t.used > *cap && it != t.lru.end()) {
    if (it->key == keep) {
      ++it;
      continue;
    }
    StoredEntry victim = std::move(*it);
    t.used -= victim.size_units;
    t.index.erase(victim.key);
    it = t.lru.erase(it);
    ++stats_.tiers[index_of(tier)].evictions;
    eviction_log_.push_back({tier, victim.key});
    // learned knowledge must not be lost on its way to the cloud
    if (tier == TierId::OnDemand && victim.provenance == Provenance::Learned) {
      auto q = std::find(writeback_queue_.begin(), writeback_queue_.end(), victim.key);
      if (q != writeback_queue_.end()) {
        writeback_queue_.erase(q);
        erase(TierId::Cloud, victim.key);
        insert_mru(TierId::Cloud, std::move(victim));
      }
    }
  }
}

void TierStore::insert_mru(TierId tier, StoredEntry entry) {
  erase(tier, entry.key);
  auto& t = tiers_[index_of(tier)];
  const std::string key = entry.key;
  t.used += entry.size_units;
  t.lru.push_back(std::move(entry));
  t.index[key] = std::prev(t.lru.end());
  evict_to_fit(tier, key);
}

std::optional<FetchResult> TierStore::get(std::string_view key) {
  std::uint64_t latency = 0;
  const std::string k(key);
  for (auto tier : kTierOrder) {
    const auto ti = index_of(tier);
    latency += configs_[ti].latency;
    stats_.tiers[ti].latency += configs_[ti].latency;
    auto& t = tiers_[ti];
    auto it = t.index.find(k);
    if (it == t.index.end()) {
      ++stats_.tiers[ti].misses;
      continue;
    }
    ++stats_.tiers[ti].hits;
    t.lru.splice(t.lru.end(), t.lru, it->second);
    FetchResult result{*it->second, tier, latency};
    for (std::size_t faster = ti; faster-- > 0;) {
      const auto ft = kTierOrder[faster];
      if (fits(ft, result.entry.size_units)) insert_mru(ft, result.entry);
    }
    return result;
  }
  return std::nullopt;
}

void TierStore::put(StoredEntry entry, TierId tier) {
  if (!valid_key(entry.key)) throw StoreError(fmt::format("invalid key '{}'", entry.key));
  if (entry.size_units == 0) throw StoreError("size_units must be positive");
  if (!fits(tier, entry.size_units))
    throw StoreError(fmt::format("entry '{}' ({} units) exceeds {} capacity", entry.key, entry.size_units,
                                 to_string(tier)));
  for (std::size_t faster = 0; faster < index_of(tier); ++faster) erase(kTierOrder[faster], entry.key);
  if (const auto* old = peek(entry.key, tier)) entry.version = std::max(entry.version, old->version + 1);
  entry.version = std::max<std::uint64_t>(entry.version, 1);
  const bool queue = tier == TierId::OnDemand && entry.provenance == Provenance::Learned;
  const std::string key = entry.key;
  insert_mru(tier, std::move(entry));
  if (queue && peek(key, tier) != nullptr &&
      std::find(writeback_queue_.begin(), writeback_queue_.end(), key) == writeback_queue_.end())
    writeback_queue_.push_back(key);
}

std::size_t TierStore::flush_writeback() {
  std::size_t written = 0;
  auto queue = std::move(writeback_queue_);
  writeback_queue_.clear();
  for (const auto& key : queue) {
    const auto* e = peek(key, TierId::OnDemand);
    if (e == nullptr) continue;
    insert_mru(TierId::Cloud, *e);
    ++written;
  }
  return written;
}

std::optional<std::set<std::string>> TierStore::prefetch_mission(std::string_view goal_symbol, unsigned depth) {
  // relation catalog over every tier, read without charging latency
  std::map<std::string, std::set<std::string>> adjacency;
  std::set<std::string> known;
  for (auto tier : kTierOrder) {
    for (const auto& entry : tiers_[index_of(tier)].lru) {
      const auto* rec = std::get_if<ElementRecord>(&entry.payload);
      if (rec == nullptr) continue;
      known.insert(rec->symbol());
      for (const auto& r : rec->implicit) {
        if (r.predicate == Predicate::At) continue;
        adjacency[r.subject].insert(r.object);
        adjacency[r.object].insert(r.subject);
      }
    }
  }
  const std::string goal(goal_symbol);
  if (!known.contains(goal)) return std::nullopt;

  std::set<std::string> closure{goal};
  std::deque<std::pair<std::string, unsigned>> frontier{{goal, 0}};
  while (!frontier.empty()) {
    auto [sym, d] = frontier.front();
    frontier.pop_front();
    if (d == depth) continue;
    for (const auto& next : adjacency[sym]) {
      if (!known.contains(next) || closure.contains(next)) continue;
      closure.insert(next);
      frontier.push_back({next, d + 1});
    }
  }

  std::set<std::string> fetched;
  for (const auto& sym : closure) {
    const auto key = env_key(sym);
    if (get(key)) fetched.insert(key);
  }
  return fetched;
}

const StoredEntry* TierStore::peek(std::string_view key, TierId tier) const {
  const auto& t = tiers_[index_of(tier)];
  auto it = t.index.find(std::string(key));
  return it == t.index.end() ? nullptr : &*it->second;
}

bool TierStore::contains_anywhere(std::string_view key) const {
  for (auto tier : kTierOrder)
    if (peek(key, tier) != nullptr) return true;
  return false;
}

std::vector<std::string> TierStore::keys(TierId tier) const {
  std::vector<std::string> out;
  for (const auto& e : tiers_[index_of(tier)].lru) out.push_back(e.key);
  return out;
}

std::map<std::string, StoredEntry> TierStore::local_entries(std::string_view key_namespace) const {
  std::map<std::string, StoredEntry> out;
  const std::string prefix = std::string(key_namespace) + ":";
  for (auto tier : {TierId::Stm, TierId::OnDemand})
    for (const auto& e : tiers_[index_of(tier)].lru)
      if (e.key.starts_with(prefix)) out.emplace(e.key, e);
  return out;
}

// ---- snapshots --------------------------------------------------------------

std::string TierStore::snapshot(TierId tier) const {
  const auto& t = tiers_[index_of(tier)];
  std::string out = fmt::format("SEMNAV-TIER v1 {} {}\n", to_string(tier), t.lru.size());
  for (const auto& e : t.lru)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", e.key, e.version, e.size_units, to_string(e.provenance),
                       payload_to_text(e.payload));
  return out;
}

namespace {

template <typename Int>
Int parse_uint(std::string_view s, const char* what) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw SnapshotError(fmt::format("invalid {} '{}'", what, s));
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

}  // namespace

void TierStore::load_snapshot(std::string_view document, TierId tier) {
  std::vector<std::string_view> lines;
  while (!document.empty()) {
    const auto nl = document.find('\n');
    if (nl == std::string_view::npos) throw SnapshotError("record not terminated by newline (truncated?)");
    lines.push_back(document.substr(0, nl));
    document.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw SnapshotError("missing header");
  const auto header = split(lines.front(), ' ');
  if (header.size() != 4 || header[0] != "SEMNAV-TIER" || header[1] != "v1")
    throw SnapshotError("bad header line");
  if (header[2] != to_string(tier))
    throw SnapshotError(fmt::format("snapshot is for tier {}, not {}", header[2], to_string(tier)));
  const auto count = parse_uint<std::size_t>(header[3], "entry count");
  if (count != lines.size() - 1)
    throw SnapshotError(fmt::format("header declares {} entries, found {}", count, lines.size() - 1));

  std::vector<StoredEntry> entries;
  std::set<std::string> seen;
  std::uint64_t total = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 5) throw SnapshotError(fmt::format("record {} has {} fields, expected 5", i, fields.size()));
    StoredEntry e;
    e.key = std::string(fields[0]);
    if (!valid_key(e.key)) throw SnapshotError(fmt::format("invalid key '{}'", e.key));
    if (!seen.insert(e.key).second) throw SnapshotError(fmt::format("duplicate key '{}'", e.key));
    e.version = parse_uint<std::uint64_t>(fields[1], "version");
    e.size_units = parse_uint<std::uint32_t>(fields[2], "size");
    if (e.version == 0 || e.size_units == 0) throw SnapshotError("version and size must be positive");
    if (fields[3] == "learned")
      e.provenance = Provenance::Learned;
    else if (fields[3] == "authored")
      e.provenance = Provenance::Authored;
    else
      throw SnapshotError(fmt::format("invalid provenance '{}'", fields[3]));
    try {
      e.payload = payload_from_text(fields[4]);
    } catch (const std::invalid_argument& ex) {
      throw SnapshotError(fmt::format("record {}: {}", i, ex.what()));
    }
    total += e.size_units;
    entries.push_back(std::move(e));
  }
  if (!fits(tier, total)) throw SnapshotError("snapshot exceeds tier capacity");

  auto& t = tiers_[index_of(tier)];
  t = Tier{};
  for (auto& e : entries) {
    const std::string key = e.key;
    t.used += e.size_units;
    t.lru.push_back(std::move(e));
    t.index[key] = std::prev(t.lru.end());
  }
}

}  // namespace semnav
