#include "kdvlab/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kdvlab/errors.hpp"

namespace kdvlab::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("toml: line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strip a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

Value parse_scalar(const std::string& tok, int line) {
  Value v;
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    v.kind = Value::Kind::str;
    std::string out;
    for (size_t i = 1; i + 1 < tok.size(); ++i) {
      char c = tok[i];
      if (c == '\\' && i + 2 < tok.size()) {
        char n = tok[++i];
        if (n == 'n') c = '\n';
        else if (n == 't') c = '\t';
        else if (n == '"') c = '"';
        else if (n == '\\') c = '\\';
        else fail(line, std::string("unsupported escape \\") + n);
      }
      out += c;
    }
    v.s = out;
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::boolean;
    v.b = tok == "true";
    return v;
  }
  // number
  const bool looks_real = tok.find_first_of(".eE") != std::string::npos &&
                          tok.find("0x") == std::string::npos;
  errno = 0;
  char* end = nullptr;
  if (looks_real) {
    v.kind = Value::Kind::real;
    v.d = std::strtod(tok.c_str(), &end);
  } else {
    v.kind = Value::Kind::integer;
    v.i = std::strtoll(tok.c_str(), &end, 10);
    v.d = static_cast<double>(v.i);
  }
  if (end == nullptr || *end != '\0' || tok.empty() || errno == ERANGE)
    fail(line, "cannot parse value '" + tok + "'");
  return v;
}

Value parse_value(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.empty()) fail(line, "missing value");
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "array must open and close on one line");
    Value v;
    v.kind = Value::Kind::array;
    std::string body = s.substr(1, s.size() - 2);
    std::string tok;
    bool in_str = false;
    for (size_t i = 0; i <= body.size(); ++i) {
      const char c = i < body.size() ? body[i] : ',';
      if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
      if (c == ',' && !in_str) {
        const std::string t = trim(tok);
        if (!t.empty()) v.arr.push_back(parse_scalar(t, line));
        tok.clear();
      } else {
        tok += c;
      }
    }
    if (in_str) fail(line, "unterminated string in array");
    return v;
  }
  return parse_scalar(s, line);
}

}  // namespace

double Value::as_real() const {
  if (kind == Kind::real) return d;
  if (kind == Kind::integer) return static_cast<double>(i);
  throw ConfigError("toml: value is not a number");
}

Table Table::parse(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed table header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail(line, "invalid table name '" + section + "'");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(line, "invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (t.kv_.count(full)) fail(line, "duplicate key '" + full + "'");
    t.kv_[full] = parse_value(s.substr(eq + 1), line);
  }
  return t;
}

Table Table::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("toml: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> Table::keys() const {
  std::vector<std::string> out;
  out.reserve(kv_.size());
  for (const auto& [k, v] : kv_) out.push_back(k);
  return out;
}

const Value& Table::require(const std::string& key, Value::Kind kind) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing key '" + key + "'");
  const Value& v = it->second;
  const bool num_ok = kind == Value::Kind::real &&
                      (v.kind == Value::Kind::real || v.kind == Value::Kind::integer);
  if (v.kind != kind && !num_ok)
    throw ConfigError("config: key '" + key + "' has the wrong type");
  return v;
}

std::string Table::get_str(const std::string& key) const {
  return require(key, Value::Kind::str).s;
}
std::string Table::get_str(const std::string& key, const std::string& dflt) const {
  return has(key) ? get_str(key) : dflt;
}
long long Table::get_int(const std::string& key) const {
  return require(key, Value::Kind::integer).i;
}
long long Table::get_int(const std::string& key, long long dflt) const {
  return has(key) ? get_int(key) : dflt;
}
double Table::get_real(const std::string& key) const {
  return require(key, Value::Kind::real).as_real();
}
double Table::get_real(const std::string& key, double dflt) const {
  return has(key) ? get_real(key) : dflt;
}
bool Table::get_bool(const std::string& key) const {
  return require(key, Value::Kind::boolean).b;
}
bool Table::get_bool(const std::string& key, bool dflt) const {
  return has(key) ? get_bool(key) : dflt;
}
std::vector<double> Table::get_real_array(const std::string& key) const {
  const Value& v = require(key, Value::Kind::array);
  std::vector<double> out;
  out.reserve(v.arr.size());
  for (const Value& e : v.arr) out.push_back(e.as_real());
  return out;
}
std::vector<double> Table::get_real_array(const std::string& key,
                                          const std::vector<double>& dflt) const {
  return has(key) ? get_real_array(key) : dflt;
}

}  // namespace kdvlab::toml
