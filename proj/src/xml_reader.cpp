#include "xml_reader.hpp"

#include <cctype>

namespace semnav::xml {

const std::string* Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

SyntaxError::SyntaxError(int l, int c, const std::string& what)
    : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + what),
      line(l),
      column(c) {}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }

  char get() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip(std::size_t n) {
    for (std::size_t i = 0; i < n && !eof(); ++i) get();
  }

  void skip_space() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(line_, column_, msg); }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':'; }
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.';
}

std::string read_name(Cursor& cur) {
  if (!is_name_start(cur.peek())) cur.fail("expected a name");
  std::string name;
  while (!cur.eof() && is_name_char(cur.peek())) name.push_back(cur.get());
  return name;
}

void append_entity(Cursor& cur, std::string& out) {
  static constexpr std::pair<std::string_view, char> kEntities[] = {
      {"&lt;", '<'}, {"&gt;", '>'}, {"&amp;", '&'}, {"&quot;", '"'}, {"&apos;", '\''}};
  for (const auto& [ent, ch] : kEntities) {
    if (cur.starts_with(ent)) {
      cur.skip(ent.size());
      out.push_back(ch);
      return;
    }
  }
  cur.fail("unknown entity reference");
}

std::string read_attribute_value(Cursor& cur) {
  const char quote = cur.peek();
  if (quote != '"' && quote != '\'') cur.fail("attribute value must be quoted");
  cur.get();
  std::string value;
  while (true) {
    if (cur.eof()) cur.fail("unterminated attribute value");
    const char c = cur.peek();
    if (c == quote) {
      cur.get();
      break;
    }
    if (c == '<') cur.fail("'<' not allowed in attribute value");
    if (c == '&') {
      append_entity(cur, value);
      continue;
    }
    value.push_back(cur.get());
  }
  return value;
}

void skip_comment(Cursor& cur) {
  cur.skip(4);
  while (!cur.starts_with("-->")) {
    if (cur.eof()) cur.fail("unterminated comment");
    cur.get();
  }
  cur.skip(3);
}

Node read_element(Cursor& cur) {
  Node node;
  node.line = cur.line();
  node.column = cur.column();
  cur.expect('<');
  node.name = read_name(cur);
  while (true) {
    cur.skip_space();
    if (cur.eof()) cur.fail("unterminated start tag <" + node.name + ">");
    if (cur.starts_with("/>")) {
      cur.skip(2);
      return node;
    }
    if (cur.peek() == '>') {
      cur.get();
      break;
    }
    std::string key = read_name(cur);
    if (node.attribute(key) != nullptr) cur.fail("duplicate attribute '" + key + "'");
    cur.skip_space();
    cur.expect('=');
    cur.skip_space();
    node.attributes.emplace_back(std::move(key), read_attribute_value(cur));
  }

  while (true) {
    if (cur.eof()) cur.fail("missing end tag for <" + node.name + ">");
    if (cur.starts_with("<!--")) {
      skip_comment(cur);
    } else if (cur.starts_with("</")) {
      cur.skip(2);
      const std::string closing = read_name(cur);
      if (closing != node.name) cur.fail("end tag </" + closing + "> does not match <" + node.name + ">");
      cur.skip_space();
      cur.expect('>');
      return node;
    } else if (cur.peek() == '<') {
      node.children.push_back(read_element(cur));
    } else if (cur.peek() == '&') {
      append_entity(cur, node.text);
    } else {
      node.text.push_back(cur.get());
    }
  }
}

void skip_misc(Cursor& cur) {
  while (true) {
    cur.skip_space();
    if (cur.starts_with("<!--")) {
      skip_comment(cur);
    } else if (cur.starts_with("<?")) {
      while (!cur.starts_with("?>")) {
        if (cur.eof()) cur.fail("unterminated processing instruction");
        cur.get();
      }
      cur.skip(2);
    } else {
      return;
    }
  }
}

}  // namespace

Node parse_document(std::string_view text) {
  Cursor cur(text);
  if (cur.starts_with("\xEF\xBB\xBF")) cur.skip(3);
  skip_misc(cur);
  if (cur.eof() || cur.peek() != '<') cur.fail("expected root element");
  Node root = read_element(cur);
  skip_misc(cur);
  if (!cur.eof()) cur.fail("content after root element");
  return root;
}

}  // namespace semnav::xml
