#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace surfrd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Small TOML subset: [section] headers, `key = value` lines, # comments.
// Values: quoted strings, numbers, booleans, and flat arrays of numbers.
struct TomlValue {
  enum class Kind { string, number, boolean, array } kind = Kind::string;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<double> array;
};

class TomlConfig {
 public:
  static TomlConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_stream(in, path);
  }

  static TomlConfig parse_string(const std::string& text, const std::string& name = "<config>") {
    std::istringstream in(text);
    return parse_stream(in, name);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  const TomlValue& get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key)) {
      throw ConfigError("missing config key [" + section + "] " + key);
    }
    return s->second.at(key);
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const TomlValue& v = get(section, key);
    if (v.kind != TomlValue::Kind::number) {
      throw ConfigError("config key [" + section + "] " + key + " must be a number");
    }
    return v.num;
  }

  std::string string(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    const TomlValue& v = get(section, key);
    if (v.kind != TomlValue::Kind::string) {
      throw ConfigError("config key [" + section + "] " + key + " must be a string");
    }
    return v.str;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::vector<double> fallback) const {
    if (!has(section, key)) return fallback;
    const TomlValue& v = get(section, key);
    if (v.kind == TomlValue::Kind::number) return {v.num};
    if (v.kind != TomlValue::Kind::array) {
      throw ConfigError("config key [" + section + "] " + key + " must be an array of numbers");
    }
    return v.array;
  }

 private:
  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static TomlValue parse_value(std::string text, const std::string& where) {
    text = strip(text);
    if (text.empty()) throw ConfigError(where + ": empty value");
    TomlValue v;
    if (text.front() == '"') {
      if (text.size() < 2 || text.back() != '"') {
        throw ConfigError(where + ": unterminated string");
      }
      v.kind = TomlValue::Kind::string;
      v.str = text.substr(1, text.size() - 2);
      return v;
    }
    if (text == "true" || text == "false") {
      v.kind = TomlValue::Kind::boolean;
      v.boolean = text == "true";
      return v;
    }
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + ": unterminated array");
      v.kind = TomlValue::Kind::array;
      std::string body = text.substr(1, text.size() - 2);
      std::istringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(item, &used);
        } catch (const std::exception&) {
          throw ConfigError(where + ": bad array element '" + item + "'");
        }
        if (used != item.size()) throw ConfigError(where + ": bad array element '" + item + "'");
        v.array.push_back(value);
      }
      return v;
    }
    std::size_t used = 0;
    try {
      v.num = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ConfigError(where + ": cannot parse value '" + text + "'");
    }
    if (used != text.size()) throw ConfigError(where + ": cannot parse value '" + text + "'");
    v.kind = TomlValue::Kind::number;
    return v;
  }

  static TomlConfig parse_stream(std::istream& in, const std::string& name) {
    TomlConfig cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = strip(line);
      if (line.empty()) continue;
      const std::string where = name + ":" + std::to_string(line_no);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
        section = strip(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        cfg.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
      const std::string key = strip(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      cfg.sections_[section][key] = parse_value(line.substr(eq + 1), where);
    }
    return cfg;
  }

  std::map<std::string, std::map<std::string, TomlValue>> sections_;
};

}  // namespace surfrd
