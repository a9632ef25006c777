#pragma once

#include "hydroplace/common.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace hydroplace {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

// Flat key = value configuration. '#' and ';' start comments, keys are
// case-insensitive, values keep their case. Unknown keys are tolerated so a
// single file can configure every subcommand.
class Config {
 public:
  Config() = default;

  static Config from_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line " + std::to_string(lineno) +
                         ": expected key = value, got '" + line + "'");
      std::string key = detail::lower(detail::trim(line.substr(0, eq)));
      std::string val = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ParseError("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = val;
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
  }

  bool has(const std::string& key) const {
    return values_.count(detail::lower(key)) > 0;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(detail::lower(key));
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(detail::lower(key));
    if (it == values_.end()) return dflt;
    const std::string v = detail::lower(it->second);
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
      std::size_t pos = 0;
      double d = std::stod(it->second, &pos);
      if (pos != detail::trim(it->second).size())
        throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw ParseError("config key '" + key + "': cannot parse '" + it->second +
                       "' as a number");
    }
  }

  long get_int(const std::string& key, long dflt) const {
    auto it = values_.find(detail::lower(key));
    if (it == values_.end()) return dflt;
    try {
      std::size_t pos = 0;
      long v = std::stol(it->second, &pos, 10);
      if (pos != detail::trim(it->second).size())
        throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParseError("config key '" + key + "': cannot parse '" + it->second +
                       "' as an integer");
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(detail::lower(key));
    if (it == values_.end()) return dflt;
    const std::string v = detail::lower(it->second);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ParseError("config key '" + key + "': cannot parse '" + it->second +
                     "' as a boolean");
  }

  // Comma-separated list of numbers.
  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    auto it = values_.find(detail::lower(key));
    if (it == values_.end()) return out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ParseError("config key '" + key + "': cannot parse '" + item +
                         "' as a number");
      }
    }
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = values_.find(detail::lower(key));
    if (it == values_.end()) return out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace hydroplace
