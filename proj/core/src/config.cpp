#include "mpoforge/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mpoforge::config {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strip a comment starting at '#' when it opens the line or follows
// whitespace; a '#' glued to a value is kept.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i)
    if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1]))))
      return line.substr(0, i);
  return line;
}

}  // namespace

void Settings::set(const std::string& key, const std::string& value) {
  if (values.find(key) == values.end()) order.push_back(key);
  values[key] = value;
}

bool Settings::has(const std::string& key) const { return values.count(key) != 0; }

std::string Settings::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double Settings::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    throw Error("config: key '" + key + "': not a number: '" + it->second + "'");
  }
  if (pos != it->second.size())
    throw Error("config: key '" + key + "': trailing characters in '" + it->second + "'");
  return v;
}

int Settings::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(it->second, &pos);
  } catch (const std::exception&) {
    throw Error("config: key '" + key + "': not an integer: '" + it->second + "'");
  }
  if (pos != it->second.size())
    throw Error("config: key '" + key + "': trailing characters in '" + it->second + "'");
  return static_cast<int>(v);
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config: key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> Settings::get_list(const std::string& key,
                                       const std::vector<double>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw Error("config: key '" + key + "': empty list element");
    std::size_t pos = 0;
    try {
      out.push_back(std::stod(item, &pos));
    } catch (const std::exception&) {
      throw Error("config: key '" + key + "': not a number: '" + item + "'");
    }
    if (pos != item.size())
      throw Error("config: key '" + key + "': trailing characters in '" + item + "'");
  }
  if (out.empty()) throw Error("config: key '" + key + "': empty list");
  return out;
}

Settings parse_text(const std::string& text) {
  Settings s;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw Error("config: line " + std::to_string(lineno) + ": expected key=value, got '" +
                  body + "'");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty())
      throw Error("config: line " + std::to_string(lineno) + ": empty key");
    s.set(key, value);
  }
  return s;
}

Settings parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

void apply_override(Settings& s, const std::string& assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error("config: override must be key=value, got '" + assignment + "'");
  s.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace mpoforge::config
