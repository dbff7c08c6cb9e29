#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pat {

/// One `key = value` block. Keys are case-sensitive; the last assignment wins.
struct KeyValueSection {
  std::string name;  // empty for the top-level block
  std::map<std::string, std::string> entries;
  int line = 0;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
};

/// Text dialect: `#` comments, `key = value` lines, `[section]` headers that
/// open a new block (repeatable, e.g. several `[primitive]` blocks).
struct KeyValueDocument {
  KeyValueSection top;
  std::vector<KeyValueSection> sections;

  static KeyValueDocument parse(const std::string& text);
  static KeyValueDocument load(const std::string& path);
};

double parse_double(const std::string& text, const std::string& context);
std::string trim(const std::string& s);
std::vector<std::string> split_list(const std::string& s);

}  // namespace pat
