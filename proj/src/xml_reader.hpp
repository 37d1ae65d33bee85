#pragma once

// Minimal reader for the XML subset used by world files: elements, attributes,
// character data, comments and an optional <?xml?> declaration. No DTDs, no
// CDATA, no namespaces.

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semnav::xml {

struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Node> children;
  std::string text;
  int line = 0;
  int column = 0;

  const std::string* attribute(std::string_view key) const;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int column, const std::string& what);
  int line;
  int column;
};

/// Parses a complete document and returns its root element.
Node parse_document(std::string_view text);

}  // namespace semnav::xml
