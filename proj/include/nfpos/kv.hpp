#ifndef NFPOS_KV_HPP
#define NFPOS_KV_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nfpos {

// Structured key-value text files used for dataset manifests, checkpoint
// manifests, training records and run configs. One `key = value` pair per
// line, '#' starts a comment, keys are unique, order preserved on write.
class KvFile {
 public:
  KvFile() = default;

  static KvFile parse(const std::string& text);
  static KvFile load(const std::string& path);

  void save(const std::string& path) const;
  std::string to_string() const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void set_i64(const std::string& key, int64_t value);
  void set_u64(const std::string& key, uint64_t value);
  void set_f64(const std::string& key, double value);

  // Getters throw ConfigError when missing or unparsable.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  int64_t get_i64(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  double get_f64(const std::string& key) const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace nfpos

#endif
