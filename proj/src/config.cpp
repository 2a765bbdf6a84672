#include "rfqv/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rfqv {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("key '" + key + "': expected number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected boolean, got '" + v + "'");
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    cfg.append(key, value);
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = {value};
}

void Config::append(const std::string& key, const std::string& value) {
  kv_[key].push_back(value);
}

std::string Config::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second.back();
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second.back();
}

long Config::get_long(const std::string& key) const {
  return parse_long(key, get_string(key));
}

long Config::get_long(const std::string& key, long fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_long(key, it->second.back());
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_double(key, it->second.back());
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_bool(key, it->second.back());
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  auto it = kv_.find(key);
  std::vector<std::string> out;
  if (it == kv_.end()) return out;
  for (const auto& stored : it->second) {
    size_t pos = 0;
    while (pos <= stored.size()) {
      auto comma = stored.find(',', pos);
      if (comma == std::string::npos) comma = stored.size();
      std::string piece = trim(stored.substr(pos, comma - pos));
      if (!piece.empty()) out.push_back(piece);
      pos = comma + 1;
    }
  }
  return out;
}

std::vector<long> Config::get_long_list(const std::string& key) const {
  std::vector<long> out;
  for (const auto& s : get_string_list(key)) out.push_back(parse_long(key, s));
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_string_list(key)) out.push_back(parse_double(key, s));
  return out;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(kv_.size());
  for (const auto& [k, v] : kv_) out.push_back(k);
  return out;
}

std::string Config::serialize() const {
  std::ostringstream out;
  for (const auto& [k, vs] : kv_) {
    for (const auto& v : vs) out << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace rfqv
