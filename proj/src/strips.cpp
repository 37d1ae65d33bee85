#include "semnav/strips.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace semnav {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_token(std::string_view s) {
  if (s.empty()) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                    (c == '?' && i == 0);
    if (!ok) return false;
  }
  return s != "?";
}

std::vector<std::string_view> split_top_level(std::string_view text) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') ++depth;
    if (text[i] == ')') --depth;
    if (text[i] == ',' && depth == 0) {
      parts.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(text.substr(start)));
  return parts;
}

}  // namespace

std::string to_string(const Fact& f) {
  std::string out = f.predicate;
  out += '(';
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    if (i) out += ',';
    out += f.args[i];
  }
  out += ')';
  return out;
}

Fact parse_fact(std::string_view text) {
  text = trim(text);
  Fact f;
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    if (!valid_token(text) || is_variable(text)) throw std::invalid_argument(fmt::format("malformed fact '{}'", text));
    f.predicate = std::string(text);
    return f;
  }
  if (text.back() != ')') throw std::invalid_argument(fmt::format("malformed fact '{}'", text));
  const auto name = trim(text.substr(0, open));
  if (!valid_token(name) || is_variable(name)) throw std::invalid_argument(fmt::format("malformed fact '{}'", text));
  f.predicate = std::string(name);
  const auto inner = trim(text.substr(open + 1, text.size() - open - 2));
  if (inner.empty()) return f;
  for (auto arg : split_top_level(inner)) {
    if (!valid_token(arg)) throw std::invalid_argument(fmt::format("malformed argument '{}' in '{}'", arg, text));
    f.args.emplace_back(arg);
  }
  return f;
}

std::vector<Fact> parse_fact_list(std::string_view text) {
  std::vector<Fact> out;
  text = trim(text);
  if (text.empty()) return out;
  for (auto part : split_top_level(text)) out.push_back(parse_fact(part));
  return out;
}

BehaviorParseError::BehaviorParseError(int l, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", l, what)), line(l) {}

namespace {

bool declared(const ActionTemplate& t, const std::string& v) {
  return std::any_of(t.params.begin(), t.params.end(), [&](const TypedParam& p) { return p.variable == v; });
}

void check_variables(const ActionTemplate& t, const std::vector<Fact>& facts, int line) {
  for (const auto& f : facts)
    for (const auto& a : f.args)
      if (is_variable(a) && !declared(t, a))
        throw BehaviorParseError(line, fmt::format("action {}: variable {} is not a parameter", t.name, a));
}

void check_params(const ActionTemplate& t, int line) {
  for (std::size_t i = 0; i < t.params.size(); ++i)
    for (std::size_t j = i + 1; j < t.params.size(); ++j)
      if (t.params[i].variable == t.params[j].variable)
        throw BehaviorParseError(line, fmt::format("action {}: duplicate parameter {}", t.name, t.params[i].variable));
}

}  // namespace

std::vector<ActionTemplate> parse_behavior_database(std::string_view text) {
  std::vector<ActionTemplate> out;
  std::optional<ActionTemplate> current;
  int line_no = 0;

  auto finish = [&] {
    if (current) {
      out.push_back(std::move(*current));
      current.reset();
    }
  };

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    try {
      if (line.starts_with("action ")) {
        finish();
        current.emplace();
        const auto raw = trim(line.substr(7));
        const auto open = raw.find('(');
        const auto name = trim(raw.substr(0, open));
        if (!valid_token(name) || is_variable(name) || (open != std::string_view::npos && raw.back() != ')'))
          throw BehaviorParseError(line_no, fmt::format("malformed action header '{}'", raw));
        current->name = std::string(name);
        if (open != std::string_view::npos) {
          const auto inner = trim(raw.substr(open + 1, raw.size() - open - 2));
          if (!inner.empty()) {
            for (auto p : split_top_level(inner)) {
              const auto colon = p.find(':');
              if (colon == std::string_view::npos)
                throw BehaviorParseError(line_no, fmt::format("parameter '{}' needs a type (?v:class)", p));
              const auto var = trim(p.substr(0, colon));
              const auto type = trim(p.substr(colon + 1));
              if (!is_variable(var) || !valid_token(var) || !valid_token(type) || is_variable(type))
                throw BehaviorParseError(line_no, fmt::format("malformed parameter '{}'", p));
              current->params.push_back({std::string(var), std::string(type)});
            }
          }
        }
        check_params(*current, line_no);
        continue;
      }
      if (!current) throw BehaviorParseError(line_no, "clause outside of an action block");
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) throw BehaviorParseError(line_no, "expected 'key: value'");
      const auto key = trim(line.substr(0, colon));
      const auto value = trim(line.substr(colon + 1));
      if (key == "pre" || key == "add" || key == "del") {
        auto facts = parse_fact_list(value);
        check_variables(*current, facts, line_no);
        auto& dst = key == "pre" ? current->preconditions : key == "add" ? current->add_effects : current->del_effects;
        dst.insert(dst.end(), facts.begin(), facts.end());
      } else if (key == "cost") {
        if (value.starts_with("topo_distance")) {
          const auto f = parse_fact(value);
          if (f.predicate != "topo_distance" || f.args.size() != 2 || !is_variable(f.args[0]) ||
              !is_variable(f.args[1]))
            throw BehaviorParseError(line_no, "topo_distance takes two variables");
          if (!declared(*current, f.args[0]) || !declared(*current, f.args[1]))
            throw BehaviorParseError(line_no, fmt::format("action {}: topo_distance uses undeclared variables",
                                                          current->name));
          current->cost = CostSpec{CostSpec::Kind::TopoDistance, 0.0, f.args[0], f.args[1]};
        } else {
          double c = 0.0;
          auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), c);
          if (ec != std::errc{} || ptr != value.data() + value.size() || !(c > 0.0))
            throw BehaviorParseError(line_no, fmt::format("cost '{}' must be a positive number", value));
          current->cost = CostSpec{CostSpec::Kind::Constant, c, {}, {}};
        }
      } else {
        throw BehaviorParseError(line_no, fmt::format("unknown clause '{}'", key));
      }
    } catch (const std::invalid_argument& e) {
      throw BehaviorParseError(line_no, e.what());
    }
  }
  finish();
  return out;
}

std::string serialize_action_template(const ActionTemplate& t) {
  std::string out = "action " + t.name + "(";
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    if (i) out += ", ";
    out += t.params[i].variable + ":" + t.params[i].type;
  }
  out += ")\n";
  auto list = [](const std::vector<Fact>& facts) {
    std::string s;
    for (std::size_t i = 0; i < facts.size(); ++i) {
      if (i) s += ", ";
      s += to_string(facts[i]);
    }
    return s;
  };
  if (!t.preconditions.empty()) out += "pre: " + list(t.preconditions) + "\n";
  if (!t.add_effects.empty()) out += "add: " + list(t.add_effects) + "\n";
  if (!t.del_effects.empty()) out += "del: " + list(t.del_effects) + "\n";
  if (t.cost.kind == CostSpec::Kind::TopoDistance)
    out += fmt::format("cost: topo_distance({},{})\n", t.cost.from_var, t.cost.to_var);
  else
    out += fmt::format("cost: {}\n", t.cost.constant);
  return out;
}

std::string GroundAction::label() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    if (i) out += ',';
    out += bindings[i];
  }
  return out + ")";
}

}  // namespace semnav
