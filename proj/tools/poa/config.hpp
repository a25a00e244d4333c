#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poa::cli {

/// Flat key/value configuration: `key = value` lines, '#' comments,
/// optional double quotes, `[section]` headers prefixing keys as
/// "section.key". Every key can be overridden by POA_<KEY> in the
/// environment, with '.' and '-' mapped to '_' and letters uppercased.
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws kConfig when missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;

  // "id=url,id=url" lists, e.g. the witness set.
  std::vector<std::pair<std::string, std::string>> get_pairs(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string env_name(const std::string& key);

struct HostPort {
  std::string host;
  int port = 0;
};

// "host:port" or "http://host:port".
HostPort parse_host_port(const std::string& text);

}  // namespace poa::cli
