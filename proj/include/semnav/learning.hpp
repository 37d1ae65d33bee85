#pragma once

// Learning: spotting new or displaced objects in semantic detections, Horn-clause
// forward chaining over facts, and committing what was learned to the store.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "semnav/map_generator.hpp"
#include "semnav/memory.hpp"
#include "semnav/sensors.hpp"
#include "semnav/strips.hpp"

namespace semnav {

struct LearningConfig {
  double match_radius = 1.0;
  double displacement_threshold = 0.5;
  double learned_extent = 0.2;  // side of the square footprint given to new objects
  double learned_height = 1.7;
};

enum class NoveltyKind : std::uint8_t { NewObject, DisplacedObject };
std::string_view to_string(NoveltyKind k);

struct NoveltyEvent {
  NoveltyKind kind = NoveltyKind::NewObject;
  std::string symbol;
  std::string semantic_class;
  Point2 observed;
  std::optional<Point2> prior;
  std::optional<std::string> space;  // space containing the observation, if any
  std::uint64_t tick = 0;

  friend bool operator==(const NoveltyEvent&, const NoveltyEvent&) = default;
};

/// Hands out `learned_<n>` symbols, n counting from 1.
class SymbolCounter {
 public:
  std::string next() { return "learned_" + std::to_string(++n_); }
  std::uint64_t issued() const { return n_; }

 private:
  std::uint64_t n_ = 0;
};

/// Position the store holds for an element: its footprint centroid.
std::optional<Point2> stored_position(const ElementRecord& record);
/// semantic_class of the 3D model if any, else the class label.
const std::string& record_class(const ElementRecord& record);

/// Compares one frame against the locally held env entries (named detections
/// are also looked up in the slower tiers, without charging statistics).
std::vector<NoveltyEvent> detect_novelty(const std::vector<Detection>& detections, const TierStore& store,
                                         std::uint64_t tick, SymbolCounter& symbols,
                                         const LearningConfig& config = {});

struct Rule {
  Fact head;
  std::vector<Fact> body;

  friend bool operator==(const Rule&, const Rule&) = default;
};

class RuleParseError : public std::runtime_error {
 public:
  RuleParseError(int line, const std::string& what);
  int line;
};

/// Throws RuleParseError when a head variable is not bound by the body.
Rule make_rule(Fact head, std::vector<Fact> body);
/// One rule per line: `head :- f1, f2, ...`; `#` starts a comment.
std::vector<Rule> parse_rules(std::string_view text);
std::string to_string(const Rule& r);

/// Least fixpoint of the rules over the facts (semi-naive evaluation).
std::set<Fact> infer_facts(const std::set<Fact>& facts, const std::vector<Rule>& rules);

/// Where commit_learned logs NOVEL_OBJECT episodes: the robot pose and tick at
/// commit time, which may be later than the events themselves.
struct EpisodeContext {
  SemanticEpisodicMap* map = nullptr;
  Pose2 pose;
  std::uint64_t tick = 0;
};

/// Writes events (ONDEMAND, provenance learned) and the inferred facts not
/// already stored (knowledge namespace), and appends one NOVEL_OBJECT episode
/// per event when `episodes` is given. Returns the number of entries written.
std::size_t commit_learned(const std::vector<NoveltyEvent>& events, const std::set<Fact>& inferred, TierStore& store,
                           const EpisodeContext* episodes = nullptr, const LearningConfig& config = {});

}  // namespace semnav
