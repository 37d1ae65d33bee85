#pragma once

// Fact and action-template vocabulary shared by the behavior database, the
// planner and the inference engine. Arguments beginning with '?' are variables.

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semnav {

struct Fact {
  std::string predicate;
  std::vector<std::string> args;

  friend auto operator<=>(const Fact&, const Fact&) = default;
  friend bool operator==(const Fact&, const Fact&) = default;
};

/// Renders as `pred(a,b)`.
std::string to_string(const Fact& f);

/// Parses `pred(a, b)` or a bare `pred`. Throws std::invalid_argument.
Fact parse_fact(std::string_view text);

/// Splits a comma-separated fact list, respecting parentheses.
std::vector<Fact> parse_fact_list(std::string_view text);

inline bool is_variable(std::string_view arg) { return !arg.empty() && arg.front() == '?'; }

struct TypedParam {
  std::string variable;  // including the leading '?'
  std::string type;      // class label, or "space" for any space

  friend bool operator==(const TypedParam&, const TypedParam&) = default;
};

struct CostSpec {
  enum class Kind { Constant, TopoDistance };
  Kind kind = Kind::Constant;
  double constant = 1.0;
  std::string from_var;
  std::string to_var;

  friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

struct ActionTemplate {
  std::string name;
  std::vector<TypedParam> params;
  std::vector<Fact> preconditions;
  std::vector<Fact> add_effects;
  std::vector<Fact> del_effects;
  CostSpec cost;

  friend bool operator==(const ActionTemplate&, const ActionTemplate&) = default;
};

class BehaviorParseError : public std::runtime_error {
 public:
  BehaviorParseError(int line, const std::string& what);
  int line;
};

/// Reads the behavior database text format:
///   action name(?a:class, ?b:class)
///   pre: fact, ...
///   add: fact, ...
///   del: fact, ...
///   cost: 3 | topo_distance(?a,?b)
/// Blank lines and lines starting with '#' are ignored.
std::vector<ActionTemplate> parse_behavior_database(std::string_view text);
std::string serialize_action_template(const ActionTemplate& t);

struct GroundAction {
  std::string name;  // template name
  std::vector<std::string> bindings;
  std::vector<Fact> preconditions;
  std::vector<Fact> add_effects;
  std::vector<Fact> del_effects;
  double cost = 0.0;

  /// `name(arg,arg)`, also used as the tie-break key.
  std::string label() const;
  friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

}  // namespace semnav
