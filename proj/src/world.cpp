#include "semnav/world.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "xml_reader.hpp"

namespace semnav {

std::string_view to_string(Predicate p) {
  switch (p) {
    case Predicate::Inside: return "inside";
    case Predicate::Adjacent: return "adjacent";
    case Predicate::Connected: return "connected";
    case Predicate::At: return "at";
  }
  return "?";
}

std::optional<Predicate> parse_predicate(std::string_view text) {
  if (text == "inside") return Predicate::Inside;
  if (text == "adjacent") return Predicate::Adjacent;
  if (text == "connected") return Predicate::Connected;
  if (text == "at") return Predicate::At;
  return std::nullopt;
}

const ElementRecord* WorldDescription::find(std::string_view symbol) const {
  for (const auto& s : spaces)
    if (s.symbol() == symbol) return &s;
  for (const auto& e : elements)
    if (e.symbol() == symbol) return &e;
  return nullptr;
}

bool WorldDescription::is_space(std::string_view symbol) const {
  for (const auto& s : spaces)
    if (s.symbol() == symbol) return true;
  return false;
}

WorldParseError::WorldParseError(Kind k, int l, int c, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", l, c, message)), kind(k), line(l), column(c) {}

namespace {

using Kind = WorldParseError::Kind;

[[noreturn]] void schema_error(const xml::Node& node, const std::string& msg) {
  throw WorldParseError(Kind::Schema, node.line, node.column, msg);
}

void check_attributes(const xml::Node& node, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : node.attributes) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) schema_error(node, fmt::format("unknown attribute '{}' on <{}>", key, node.name));
  }
}

const std::string& required(const xml::Node& node, std::string_view key) {
  const std::string* v = node.attribute(key);
  if (v == nullptr) schema_error(node, fmt::format("<{}> is missing required attribute '{}'", node.name, key));
  return *v;
}

void forbid_text(const xml::Node& node) {
  for (char c : node.text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      schema_error(node, fmt::format("unexpected character data in <{}>", node.name));
}

double parse_number(const xml::Node& node, std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  double value = 0.0;
  const char* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value))
    schema_error(node, fmt::format("'{}' is not a finite decimal number", text));
  return value;
}

bool parse_bool(const xml::Node& node, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  schema_error(node, fmt::format("'{}' is not a boolean", text));
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<Point2> parse_point_list(const xml::Node& node) {
  std::vector<Point2> points;
  for (const auto& tok : split_ws(node.text)) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos || tok.find(',', comma + 1) != std::string::npos)
      schema_error(node, fmt::format("point '{}' must be written as x,y", tok));
    const std::string_view sv(tok);
    points.push_back({parse_number(node, sv.substr(0, comma)), parse_number(node, sv.substr(comma + 1))});
  }
  return points;
}

ElementRecord parse_element(const xml::Node& node) {
  check_attributes(node, {"class"});
  forbid_text(node);
  ElementRecord rec;
  rec.symbolic.class_label = required(node, "class");
  bool have_symbol = false, have_2d = false, have_3d = false, have_phys = false;
  std::vector<std::pair<const xml::Node*, std::pair<Predicate, std::string>>> pending_relations;

  for (const auto& child : node.children) {
    if (child.name == "symbol") {
      if (have_symbol) schema_error(child, "duplicate <symbol>");
      have_symbol = true;
      check_attributes(child, {"name", "aliases", "display"});
      forbid_text(child);
      rec.symbolic.symbol = required(child, "name");
      if (const auto* a = child.attribute("aliases"))
        for (auto& alias : split_ws(*a)) rec.symbolic.aliases.insert(alias);
      if (const auto* d = child.attribute("display")) rec.symbolic.display_name = *d;
    } else if (child.name == "explicit2d") {
      if (have_2d) schema_error(child, "duplicate <explicit2d>");
      have_2d = true;
      check_attributes(child, {});
      forbid_text(child);
      if (child.children.size() != 1 || child.children.front().name != "footprint")
        schema_error(child, "<explicit2d> must contain exactly one <footprint>");
      const auto& fp = child.children.front();
      check_attributes(fp, {});
      if (!fp.children.empty()) schema_error(fp.children.front(), "unexpected element inside <footprint>");
      rec.explicit_model.model2d = Footprint{parse_point_list(fp)};
    } else if (child.name == "explicit3d") {
      if (have_3d) schema_error(child, "duplicate <explicit3d>");
      have_3d = true;
      check_attributes(child, {"height", "semantic"});
      forbid_text(child);
      rec.explicit_model.model3d = Model3d{parse_number(child, required(child, "height")), required(child, "semantic")};
    } else if (child.name == "physical") {
      if (have_phys) schema_error(child, "duplicate <physical>");
      have_phys = true;
      check_attributes(child, {"static", "material"});
      forbid_text(child);
      if (const auto* s = child.attribute("static")) rec.explicit_model.physical.is_static = parse_bool(child, *s);
      if (const auto* m = child.attribute("material")) rec.explicit_model.physical.material_tag = *m;
    } else if (child.name == "relation") {
      check_attributes(child, {"pred", "object"});
      forbid_text(child);
      const auto pred = parse_predicate(required(child, "pred"));
      if (!pred) schema_error(child, fmt::format("unknown relation predicate '{}'", *child.attribute("pred")));
      pending_relations.push_back({&child, {*pred, required(child, "object")}});
    } else {
      schema_error(child, fmt::format("unknown tag <{}> inside <{}>", child.name, node.name));
    }
    if (!child.children.empty() && child.name != "explicit2d")
      schema_error(child.children.front(), fmt::format("unexpected element inside <{}>", child.name));
  }
  if (!have_symbol) schema_error(node, fmt::format("<{}> is missing <symbol>", node.name));
  for (auto& [n, rel] : pending_relations)
    rec.implicit.push_back(Relation{rel.first, rec.symbolic.symbol, rel.second});
  return rec;
}

ActorScript parse_actor(const xml::Node& node) {
  check_attributes(node, {"id", "class", "speed", "radius"});
  forbid_text(node);
  ActorScript actor;
  actor.symbol = required(node, "id");
  actor.class_label = required(node, "class");
  actor.speed = parse_number(node, required(node, "speed"));
  actor.footprint_radius = parse_number(node, required(node, "radius"));
  if (node.children.size() != 1 || node.children.front().name != "waypoints")
    schema_error(node, "<actor> must contain exactly one <waypoints>");
  const auto& wp = node.children.front();
  check_attributes(wp, {});
  if (!wp.children.empty()) schema_error(wp.children.front(), "unexpected element inside <waypoints>");
  actor.waypoints = parse_point_list(wp);
  return actor;
}

std::string fmt_num(double v) {
  std::string s = fmt::format("{}", v);
  return s;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string point_list(const std::vector<Point2>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += fmt_num(pts[i].x) + "," + fmt_num(pts[i].y);
  }
  return out;
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

void write_element(std::string& out, const char* tag, const ElementRecord& rec) {
  out += fmt::format("  <{} class=\"{}\">\n", tag, escape_attr(rec.symbolic.class_label));
  out += fmt::format("    <symbol name=\"{}\"", escape_attr(rec.symbol()));
  if (!rec.symbolic.aliases.empty()) out += fmt::format(" aliases=\"{}\"", escape_attr(join(rec.symbolic.aliases)));
  if (!rec.symbolic.display_name.empty())
    out += fmt::format(" display=\"{}\"", escape_attr(rec.symbolic.display_name));
  out += "/>\n";
  const auto& ex = rec.explicit_model;
  if (ex.model2d)
    out += fmt::format("    <explicit2d><footprint>{}</footprint></explicit2d>\n", point_list(ex.model2d->vertices));
  if (ex.model3d)
    out += fmt::format("    <explicit3d height=\"{}\" semantic=\"{}\"/>\n", fmt_num(ex.model3d->height),
                       escape_attr(ex.model3d->semantic_class));
  out += fmt::format("    <physical static=\"{}\" material=\"{}\"/>\n", ex.physical.is_static ? "true" : "false",
                     escape_attr(ex.physical.material_tag));
  for (const auto& r : rec.implicit)
    out += fmt::format("    <relation pred=\"{}\" object=\"{}\"/>\n", to_string(r.predicate), escape_attr(r.object));
  out += fmt::format("  </{}>\n", tag);
}

}  // namespace

WorldDescription parse_world(std::string_view text) {
  xml::Node root;
  try {
    root = xml::parse_document(text);
  } catch (const xml::SyntaxError& e) {
    throw WorldParseError(Kind::Syntax, e.line, e.column, e.what());
  }
  if (root.name != "world") schema_error(root, fmt::format("root element must be <world>, found <{}>", root.name));
  check_attributes(root, {"name", "classes"});
  forbid_text(root);

  WorldDescription world;
  world.name = required(root, "name");
  if (const auto* c = root.attribute("classes"))
    for (auto& cls : split_ws(*c)) world.classes.insert(cls);

  bool have_robot = false;
  std::map<std::string, const xml::Node*> seen;
  auto claim = [&](const std::string& symbol, const xml::Node& node) {
    if (auto it = seen.find(symbol); it != seen.end())
      throw WorldParseError(Kind::Semantic, node.line, node.column,
                            fmt::format("duplicate symbol '{}' (first defined at line {})", symbol, it->second->line));
    seen.emplace(symbol, &node);
  };

  for (const auto& child : root.children) {
    if (child.name == "space") {
      world.spaces.push_back(parse_element(child));
      world.spaces.back().symbolic.category = ElementCategory::Space;
      claim(world.spaces.back().symbol(), child);
    } else if (child.name == "element") {
      world.elements.push_back(parse_element(child));
      claim(world.elements.back().symbol(), child);
    } else if (child.name == "actor") {
      world.actors.push_back(parse_actor(child));
      claim(world.actors.back().symbol, child);
    } else if (child.name == "robot") {
      if (have_robot) schema_error(child, "duplicate <robot>");
      have_robot = true;
      check_attributes(child, {"spawn", "radius"});
      forbid_text(child);
      if (!child.children.empty()) schema_error(child.children.front(), "unexpected element inside <robot>");
      const auto parts = split_ws(required(child, "spawn"));
      if (parts.size() != 3) schema_error(child, "spawn must be \"x y theta\"");
      world.robot_spawn =
          make_pose(parse_number(child, parts[0]), parse_number(child, parts[1]), parse_number(child, parts[2]));
      world.robot_radius = parse_number(child, required(child, "radius"));
    } else {
      schema_error(child, fmt::format("unknown tag <{}> inside <world>", child.name));
    }
  }
  if (!have_robot) schema_error(root, "<world> is missing <robot>");
  return world;
}

WorldDescription load_world_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open world file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_world(buf.str());
}

std::string serialize_world(const WorldDescription& world) {
  std::string out = fmt::format("<world name=\"{}\"", escape_attr(world.name));
  if (!world.classes.empty()) out += fmt::format(" classes=\"{}\"", escape_attr(join(world.classes)));
  out += ">\n";
  for (const auto& s : world.spaces) write_element(out, "space", s);
  for (const auto& e : world.elements) write_element(out, "element", e);
  for (const auto& a : world.actors) {
    out += fmt::format("  <actor id=\"{}\" class=\"{}\" speed=\"{}\" radius=\"{}\"><waypoints>{}</waypoints></actor>\n",
                       escape_attr(a.symbol), escape_attr(a.class_label), fmt_num(a.speed),
                       fmt_num(a.footprint_radius), point_list(a.waypoints));
  }
  out += fmt::format("  <robot spawn=\"{} {} {}\" radius=\"{}\"/>\n", fmt_num(world.robot_spawn.x),
                     fmt_num(world.robot_spawn.y), fmt_num(world.robot_spawn.heading), fmt_num(world.robot_radius));
  out += "</world>\n";
  return out;
}

namespace {

void check_footprint(const Footprint& f, const std::string& symbol, std::vector<Diagnostic>& out) {
  using S = Diagnostic::Severity;
  if (f.vertices.size() < 3) {
    out.push_back({S::Error, symbol, "footprint has fewer than 3 vertices"});
    return;
  }
  if (!is_simple(f)) {
    out.push_back({S::Error, symbol, "footprint is self-intersecting"});
    return;
  }
  const double area = signed_area(f);
  if (area == 0.0)
    out.push_back({S::Error, symbol, "footprint has zero area"});
  else if (area < 0.0)
    out.push_back({S::Error, symbol, "footprint not counter-clockwise"});
}

void check_element(const WorldDescription& world, const ElementRecord& rec, bool is_space,
                   std::vector<Diagnostic>& out) {
  using S = Diagnostic::Severity;
  const auto& sym = rec.symbol();
  if (sym.empty()) out.push_back({S::Error, sym, "empty symbol"});
  if (!world.classes.empty() && !world.classes.contains(rec.symbolic.class_label))
    out.push_back({S::Error, sym, fmt::format("class '{}' is not declared", rec.symbolic.class_label)});
  const auto& ex = rec.explicit_model;
  if (!ex.model2d && !ex.model3d) out.push_back({S::Error, sym, "element has no explicit model"});
  if (is_space && !ex.model2d) out.push_back({S::Error, sym, "space has no footprint"});
  if (ex.model3d && !(ex.model3d->height > 0.0)) out.push_back({S::Error, sym, "model3d height must be positive"});
  if (ex.model2d) check_footprint(*ex.model2d, sym, out);
  for (const auto& r : rec.implicit) {
    if (r.subject == r.object)
      out.push_back({S::Error, sym, "relation subject equals object"});
    else if (world.find(r.object) == nullptr)
      out.push_back({S::Warning, sym, fmt::format("dangling relation object '{}'", r.object)});
  }
}

}  // namespace

std::vector<Diagnostic> validate_world(const WorldDescription& world) {
  using S = Diagnostic::Severity;
  std::vector<Diagnostic> out;

  std::map<std::string, int> counts;
  for (const auto& s : world.spaces) ++counts[s.symbol()];
  for (const auto& e : world.elements) ++counts[e.symbol()];
  for (const auto& a : world.actors) ++counts[a.symbol];
  for (const auto& [sym, n] : counts)
    if (n > 1) out.push_back({S::Error, sym, "duplicate symbol"});

  for (const auto& s : world.spaces) check_element(world, s, true, out);
  for (const auto& e : world.elements) check_element(world, e, false, out);

  for (const auto& a : world.actors) {
    if (!world.classes.empty() && !world.classes.contains(a.class_label))
      out.push_back({S::Error, a.symbol, fmt::format("class '{}' is not declared", a.class_label)});
    if (!(a.speed >= 0.0)) out.push_back({S::Error, a.symbol, "actor speed must be non-negative"});
    if (!(a.footprint_radius > 0.0)) out.push_back({S::Error, a.symbol, "actor radius must be positive"});
    if (a.waypoints.empty()) out.push_back({S::Error, a.symbol, "actor has no waypoints"});
  }

  if (!(world.robot_radius > 0.0)) out.push_back({S::Error, "robot", "robot radius must be positive"});
  const Point2 spawn = world.robot_spawn.position();
  bool in_space = false;
  for (const auto& s : world.spaces)
    if (s.explicit_model.model2d && point_in_footprint(spawn, *s.explicit_model.model2d)) in_space = true;
  bool blocked = false;
  for (const auto& e : world.elements) {
    const auto& ex = e.explicit_model;
    if (ex.model2d && ex.physical.is_static && ex.model2d->vertices.size() >= 3 &&
        point_in_footprint(spawn, *ex.model2d))
      blocked = true;
  }
  if (!in_space || blocked) out.push_back({S::Error, "robot", "robot spawn not in free space"});
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics)
    if (d.severity == Diagnostic::Severity::Error) return true;
  return false;
}

}  // namespace semnav
