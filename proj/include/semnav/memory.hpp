#pragma once

// Four-tier knowledge store. STM is the working memory; ONDEMAND is the
// robot-mounted long-term store; NETWORK and CLOUD back it with larger, slower
// capacity. Every tier is an LRU list; lookups probe tiers fastest-first and
// copy hits into each faster tier.

#include <array>
#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "semnav/strips.hpp"
#include "semnav/world.hpp"

namespace semnav {

enum class TierId : std::uint8_t { Stm = 0, OnDemand = 1, Network = 2, Cloud = 3 };
inline constexpr std::size_t kTierCount = 4;
inline constexpr std::array<TierId, kTierCount> kTierOrder = {TierId::Stm, TierId::OnDemand, TierId::Network,
                                                             TierId::Cloud};

std::string_view to_string(TierId t);
std::optional<TierId> parse_tier(std::string_view text);
inline std::size_t index_of(TierId t) { return static_cast<std::size_t>(t); }

/// Rasterized map patch; cells hold 'F' (free), 'O' (occupied) or 'U' (unknown), row-major.
struct MapTile {
  std::string id;
  double resolution = 0.1;
  Point2 origin;
  int width = 0;
  int height = 0;
  std::string cells;

  friend bool operator==(const MapTile&, const MapTile&) = default;
};

using Payload = std::variant<ElementRecord, ActionTemplate, Fact, MapTile>;

enum class Provenance : std::uint8_t { Authored, Learned };
std::string_view to_string(Provenance p);

/// Key namespaces: env, behavior, knowledge, map.
bool valid_key(std::string_view key);
std::string env_key(std::string_view symbol);
std::string behavior_key(std::string_view name);
std::string knowledge_key(const Fact& f);

struct StoredEntry {
  std::string key;
  Payload payload;
  std::uint64_t version = 1;
  std::uint32_t size_units = 1;
  Provenance provenance = Provenance::Authored;

  friend bool operator==(const StoredEntry&, const StoredEntry&) = default;
};

/// Single-line canonical text for a payload (compact JSON, sorted keys).
std::string payload_to_text(const Payload& p);
Payload payload_from_text(std::string_view text);

struct TierConfig {
  std::optional<std::uint64_t> capacity;  // nullopt = unbounded
  std::uint64_t latency = 0;              // ticks charged per probe
};

using TierConfigs = std::array<TierConfig, kTierCount>;

/// STM 64 / ONDEMAND 256 / NETWORK 1024 / CLOUD unbounded; latencies 0/1/5/50.
TierConfigs default_tier_configs();

struct FetchResult {
  StoredEntry entry;
  TierId served_from = TierId::Stm;
  std::uint64_t accumulated_latency = 0;
};

struct TierCounters {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t latency = 0;

  friend bool operator==(const TierCounters&, const TierCounters&) = default;
};

struct TierStats {
  std::array<TierCounters, kTierCount> tiers{};

  const TierCounters& operator[](TierId t) const { return tiers[index_of(t)]; }
  friend bool operator==(const TierStats&, const TierStats&) = default;
};

struct EvictionEvent {
  TierId tier;
  std::string key;

  friend bool operator==(const EvictionEvent&, const EvictionEvent&) = default;
};

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not internally synchronized: the mission loop is the single owner, and every
/// call (lookups included, since they reorder recency) is a mutation.
class TierStore {
 public:
  explicit TierStore(const TierConfigs& configs = default_tier_configs());

  std::optional<FetchResult> get(std::string_view key);

  /// Inserts or overwrites. An overwrite gets version max(entry.version, old + 1).
  /// Copies of the key in faster tiers are dropped so they cannot go stale.
  /// Throws StoreError if the entry is larger than the tier.
  void put(StoredEntry entry, TierId tier);

  /// Relation-graph closure of `goal_symbol` (inside/adjacent/connected,
  /// undirected, up to `depth` hops), fetched through get(). Returns nullopt
  /// and fetches nothing when the symbol is unknown to every tier.
  std::optional<std::set<std::string>> prefetch_mission(std::string_view goal_symbol, unsigned depth);

  std::string snapshot(TierId tier) const;
  /// Replaces the tier contents; on error the tier is left untouched.
  void load_snapshot(std::string_view document, TierId tier);

  /// Copies every queued learned entry still held in ONDEMAND into CLOUD,
  /// version preserved. Returns the number of entries written.
  std::size_t flush_writeback();
  std::size_t pending_writeback() const { return writeback_queue_.size(); }

  // Inspection without touching recency or statistics.
  const StoredEntry* peek(std::string_view key, TierId tier) const;
  bool contains_anywhere(std::string_view key) const;
  /// Keys in recency order, least recent first.
  std::vector<std::string> keys(TierId tier) const;
  std::uint64_t used_units(TierId tier) const { return tiers_[index_of(tier)].used; }
  const TierConfig& config(TierId tier) const { return configs_[index_of(tier)]; }
  /// Entries of one namespace resident in STM or ONDEMAND (the robot-local
  /// tiers), keyed by key; the faster tier's copy wins.
  std::map<std::string, StoredEntry> local_entries(std::string_view key_namespace) const;

  const TierStats& stats() const { return stats_; }
  const std::vector<EvictionEvent>& eviction_log() const { return eviction_log_; }
  void clear_eviction_log() { eviction_log_.clear(); }

 private:
  struct Tier {
    std::list<StoredEntry> lru;  // front = least recently used
    std::unordered_map<std::string, std::list<StoredEntry>::iterator> index;
    std::uint64_t used = 0;
  };

  void insert_mru(TierId tier, StoredEntry entry);
  void erase(TierId tier, std::string_view key);
  void evict_to_fit(TierId tier, std::string_view keep);
  bool fits(TierId tier, std::uint64_t units) const;

  TierConfigs configs_;
  std::array<Tier, kTierCount> tiers_;
  TierStats stats_;
  std::vector<EvictionEvent> eviction_log_;
  std::vector<std::string> writeback_queue_;
};

}  // namespace semnav
