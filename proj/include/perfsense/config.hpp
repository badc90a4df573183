#pragma once

// Line-oriented configuration documents: `name [arg] {` opens a section,
// `}` closes it, `key = value` lines fill it, anything else is kept as a
// bare directive line. Shared by the feature schema, label rule, and
// trigger configuration formats.

#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace perfsense::cfg {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& msg, int line)
      : std::runtime_error("config line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;  // empty for the document root
  std::string arg;   // optional header argument, e.g. the "1" of `tag 1 {`
  int line = 0;
  std::vector<Entry> entries;
  std::vector<std::string> bare;  // non key=value lines (rule predicates)
  std::vector<int> bare_lines;
  std::vector<Section> children;

  const Section* find(std::string_view child_name) const {
    for (const auto& c : children)
      if (c.name == child_name) return &c;
    return nullptr;
  }

  std::vector<const Section*> all(std::string_view child_name) const {
    std::vector<const Section*> out;
    for (const auto& c : children)
      if (c.name == child_name) out.push_back(&c);
    return out;
  }

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return e.value;
    return std::nullopt;
  }

  const std::string& require(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return e.value;
    throw ConfigError("section '" + name + "' is missing key '" +
                          std::string(key) + "'",
                      line);
  }
};

/// Parses a document into a section tree rooted at an unnamed section.
/// Full-line `#` comments and blank lines are ignored.
inline Section parse_document(std::string_view text) {
  Section root;
  std::vector<Section*> stack{&root};

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view raw = (nl == std::string_view::npos)
                               ? text.substr(pos)
                               : text.substr(pos, nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line == "}") {
      if (stack.size() == 1)
        throw ConfigError("unmatched '}'", line_no);
      stack.pop_back();
      continue;
    }

    if (line.back() == '{') {
      std::string_view header = trim(line.substr(0, line.size() - 1));
      if (header.empty())
        throw ConfigError("section header missing a name", line_no);
      Section sec;
      sec.line = line_no;
      auto sp = header.find_first_of(" \t");
      if (sp == std::string_view::npos) {
        sec.name = std::string(header);
      } else {
        sec.name = std::string(header.substr(0, sp));
        sec.arg = std::string(trim(header.substr(sp + 1)));
      }
      stack.back()->children.push_back(std::move(sec));
      stack.push_back(&stack.back()->children.back());
      continue;
    }

    // a '=' that is part of a comparator (<=, >=) does not open an entry
    auto eq = line.find('=');
    if (eq != std::string_view::npos && eq > 0 &&
        (line[eq - 1] == '<' || line[eq - 1] == '>' || line[eq - 1] == '!'))
      eq = std::string_view::npos;
    if (eq != std::string_view::npos) {
      Entry e;
      e.key = std::string(trim(line.substr(0, eq)));
      e.value = std::string(trim(line.substr(eq + 1)));
      e.line = line_no;
      if (e.key.empty())
        throw ConfigError("empty key before '='", line_no);
      stack.back()->entries.push_back(std::move(e));
      continue;
    }

    stack.back()->bare.push_back(std::string(line));
    stack.back()->bare_lines.push_back(line_no);
  }

  if (stack.size() != 1)
    throw ConfigError("unclosed section '" + stack.back()->name + "'",
                      stack.back()->line);
  return root;
}

// Value helpers ------------------------------------------------------------

inline double to_real(const std::string& value, int line = 0) {
  const char* begin = value.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || !trim(std::string_view(end)).empty())
    throw ConfigError("expected a number, got '" + value + "'", line);
  return v;
}

/// Parses "[lo, hi]".
inline std::pair<double, double> to_interval(const std::string& value,
                                             int line = 0) {
  std::string_view s = trim(value);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ConfigError("expected an interval '[lo, hi]', got '" + value + "'",
                      line);
  s = s.substr(1, s.size() - 2);
  auto comma = s.find(',');
  if (comma == std::string_view::npos)
    throw ConfigError("interval needs two comma-separated bounds", line);
  double lo = to_real(std::string(trim(s.substr(0, comma))), line);
  double hi = to_real(std::string(trim(s.substr(comma + 1))), line);
  return {lo, hi};
}

/// Splits a comma-separated list, trimming each element.
inline std::vector<std::string> to_list(const std::string& value) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= value.size()) {
    auto comma = value.find(',', pos);
    std::string_view piece = (comma == std::string::npos)
                                 ? std::string_view(value).substr(pos)
                                 : std::string_view(value).substr(pos, comma - pos);
    auto t = trim(piece);
    if (!t.empty()) out.emplace_back(t);
    pos = (comma == std::string::npos) ? value.size() + 1 : comma + 1;
  }
  return out;
}

}  // namespace perfsense::cfg
