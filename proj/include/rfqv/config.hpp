#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfqv {

// Raised for malformed configuration text or missing/ill-typed keys. The CLI
// maps it to its configuration-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration. '#' starts a comment, blank lines are
// ignored, whitespace around keys and values is trimmed. Repeating a key
// accumulates a list; set() (used for command-line overrides) replaces the
// whole list. List getters additionally split each stored value on commas so
// a single override flag can supply a list.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  void append(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<long> get_long_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  std::vector<std::string> keys() const;

  // Round-trips through parse_text (keys sorted, one line per list element).
  std::string serialize() const;

 private:
  std::map<std::string, std::vector<std::string>> kv_;
};

}  // namespace rfqv
