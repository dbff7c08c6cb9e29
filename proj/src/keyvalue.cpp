#include "pat/keyvalue.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pat {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf" || t == "infinity") return INFINITY;
  if (t == "-inf") return -INFINITY;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument(context + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::optional<std::string> KeyValueSection::get(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueSection::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueSection::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

double KeyValueSection::require_double(const std::string& key) const {
  auto v = get(key);
  if (!v) throw std::invalid_argument("missing key '" + key + "' in block starting at line " + std::to_string(line));
  return parse_double(*v, key);
}

long KeyValueSection::get_int(const std::string& key, long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  const double d = parse_double(*v, key);
  if (d != std::floor(d)) throw std::invalid_argument(key + ": expected an integer, got '" + *v + "'");
  return static_cast<long>(d);
}

std::vector<double> KeyValueSection::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(parse_double(item, key));
  return out;
}

std::vector<std::string> KeyValueSection::get_list(const std::string& key) const {
  auto v = get(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

KeyValueDocument KeyValueDocument::parse(const std::string& text) {
  KeyValueDocument doc;
  KeyValueSection* current = &doc.top;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("line " + std::to_string(line_no) + ": unterminated section header");
      doc.sections.push_back(KeyValueSection{trim(line.substr(1, line.size() - 2)), {}, line_no});
      current = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    current->entries[key] = trim(line.substr(eq + 1));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace pat
