#pragma once

#include <map>
#include <string>
#include <vector>

namespace kdvlab::toml {

// Minimal TOML subset: [tables], key = value with string / integer / float /
// bool / single-line arrays of those, and # comments. Keys are flattened to
// "table.key". Enough for the experiment configs; anything outside the
// subset is a ConfigError with a line number.
struct Value {
  enum class Kind { str, integer, real, boolean, array };
  Kind kind = Kind::str;
  std::string s;
  long long i = 0;
  double d = 0;
  bool b = false;
  std::vector<Value> arr;

  double as_real() const;  // integer widens to real
};

class Table {
 public:
  static Table parse(const std::string& text);
  static Table parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  std::vector<std::string> keys() const;

  // Typed getters; missing key without a default or a type mismatch throws
  // ConfigError naming the key.
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& dflt) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long dflt) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double dflt) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_real_array(const std::string& key) const;
  std::vector<double> get_real_array(const std::string& key,
                                     const std::vector<double>& dflt) const;

 private:
  const Value& require(const std::string& key, Value::Kind kind) const;
  std::map<std::string, Value> kv_;
};

}  // namespace kdvlab::toml
