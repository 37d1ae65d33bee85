#pragma once

// Environment element ontology: every element carries a symbolic model (naming),
// an explicit model (sensor-retrievable geometry and physics) and an implicit
// model (relations to other elements).

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semnav/geometry.hpp"

namespace semnav {

enum class ElementCategory : std::uint8_t { Object, Space };

struct SymbolicModel {
  std::string symbol;
  ElementCategory category = ElementCategory::Object;
  std::string class_label;
  std::string display_name;
  std::set<std::string> aliases;

  friend bool operator==(const SymbolicModel&, const SymbolicModel&) = default;
};

struct Model3d {
  double height = 0.0;
  std::string semantic_class;

  friend bool operator==(const Model3d&, const Model3d&) = default;
};

struct PhysicalModel {
  bool is_static = true;
  std::string material_tag;

  friend bool operator==(const PhysicalModel&, const PhysicalModel&) = default;
};

struct ExplicitModel {
  std::optional<Footprint> model2d;
  std::optional<Model3d> model3d;
  PhysicalModel physical;

  friend bool operator==(const ExplicitModel&, const ExplicitModel&) = default;
};

enum class Predicate { Inside, Adjacent, Connected, At };

std::string_view to_string(Predicate p);
std::optional<Predicate> parse_predicate(std::string_view text);

struct Relation {
  Predicate predicate = Predicate::Inside;
  std::string subject;
  std::string object;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct ElementRecord {
  SymbolicModel symbolic;
  ExplicitModel explicit_model;
  std::vector<Relation> implicit;

  const std::string& symbol() const { return symbolic.symbol; }
  bool is_space() const { return symbolic.category == ElementCategory::Space; }
  friend bool operator==(const ElementRecord&, const ElementRecord&) = default;
};

struct ActorScript {
  std::string symbol;
  std::string class_label;
  double footprint_radius = 0.0;
  double speed = 0.0;
  std::vector<Point2> waypoints;

  friend bool operator==(const ActorScript&, const ActorScript&) = default;
};

struct WorldDescription {
  std::string name;
  /// Declared class vocabulary; empty means unrestricted.
  std::set<std::string> classes;
  std::vector<ElementRecord> spaces;
  std::vector<ElementRecord> elements;
  std::vector<ActorScript> actors;
  Pose2 robot_spawn;
  double robot_radius = 0.0;

  const ElementRecord* find(std::string_view symbol) const;
  bool is_space(std::string_view symbol) const;
  friend bool operator==(const WorldDescription&, const WorldDescription&) = default;
};

class WorldParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Schema, Semantic };
  WorldParseError(Kind kind, int line, int column, const std::string& message);

  Kind kind;
  int line;
  int column;
};

WorldDescription parse_world(std::string_view text);
WorldDescription load_world_file(const std::string& path);

/// Canonical text form; parse_world(serialize_world(w)) == w.
std::string serialize_world(const WorldDescription& world);

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string symbol;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::vector<Diagnostic> validate_world(const WorldDescription& world);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace semnav
