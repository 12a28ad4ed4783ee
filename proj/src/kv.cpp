#include "nfpos/kv.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nfpos/common.hpp"

namespace nfpos {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

KvFile KvFile::parse(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed key-value line " + std::to_string(lineno) + ": " + t);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key on line " + std::to_string(lineno));
    kv.set(key, value);
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void KvFile::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << to_string();
  if (!out) throw IoError("error while writing " + path);
}

std::string KvFile::to_string() const {
  std::string s;
  for (const auto& k : order_) {
    s += k;
    s += " = ";
    s += values_.at(k);
    s += "\n";
  }
  return s;
}

bool KvFile::has(const std::string& key) const { return values_.count(key) != 0; }

void KvFile::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

void KvFile::set_i64(const std::string& key, int64_t value) { set(key, std::to_string(value)); }
void KvFile::set_u64(const std::string& key, uint64_t value) { set(key, std::to_string(value)); }

void KvFile::set_f64(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  set(key, buf);
}

const std::string& KvFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key: " + key);
  return it->second;
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int64_t KvFile::get_i64(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  int64_t r = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key " + key + " is not an integer: " + v);
  return r;
}

uint64_t KvFile::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  uint64_t r = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key " + key + " is not an unsigned integer: " + v);
  return r;
}

double KvFile::get_f64(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  double r = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key " + key + " is not a number: " + v);
  return r;
}

}  // namespace nfpos
