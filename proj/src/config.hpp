#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace isodiff {

// Flat key=value configuration. Every key is declared in the schema with a
// type, a default, and a one-line description; unknown keys are rejected.
// Values come from (in increasing precedence) defaults, a plain-text config
// file, and command-line overrides.
class RunConfig {
 public:
  enum class Type { integer, real, string };

  struct KeySpec {
    std::string name;
    Type type = Type::string;
    std::string default_value;
    std::string doc;
  };

  RunConfig();  // schema defaults

  // Parses `key = value` lines; '#' starts a comment. Throws ConfigError on
  // unknown keys or unreadable files.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  bool is_known(const std::string& key) const;
  static const std::vector<KeySpec>& schema();

 private:
  const KeySpec& spec_for(const std::string& key) const;
  void check_value(const KeySpec& spec, const std::string& value) const;
  std::map<std::string, std::string> values_;
};

// Comma-separated helpers for grid/list-valued keys.
std::vector<double> parse_real_list(const std::string& s, const std::string& key);
std::vector<int> parse_int_list(const std::string& s, const std::string& key);
std::vector<std::string> parse_string_list(const std::string& s);

}  // namespace isodiff
