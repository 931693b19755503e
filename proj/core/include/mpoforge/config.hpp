#pragma once

#include <map>
#include <string>
#include <vector>

#include "mpoforge/types.hpp"

namespace mpoforge::config {

/// Flat key=value settings. '#' starts a comment (full line, or after
/// whitespace inline); blank lines are ignored; later assignments win.
/// Values stay strings until a typed getter parses them.
struct Settings {
  std::map<std::string, std::string> values;
  std::vector<std::string> order;  ///< keys in first-assignment order

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated doubles, e.g. "1e-2,1e-3,1e-4".
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;
};

Settings parse_text(const std::string& text);
Settings parse_file(const std::string& path);

/// "key=value" command-line override; throws on malformed input.
void apply_override(Settings& s, const std::string& assignment);

}  // namespace mpoforge::config
