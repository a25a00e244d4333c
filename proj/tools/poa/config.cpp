#include "config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "poa/common/error.hpp"

namespace poa::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string env_name(const std::string& key) {
  std::string out = "POA_";
  for (char c : key) {
    out += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": bad section");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (const auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    if (key.empty()) fail(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": empty key");
    c.values_[section.empty() ? key : section + "." + key] = value;
  }
  return c;
}

std::optional<std::string> Config::find(const std::string& key) const {
  if (const char* env = std::getenv(env_name(key).c_str())) return std::string(env);
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get(const std::string& key) const {
  auto v = find(key);
  if (!v) fail(ErrorCode::kConfig, "missing config key '" + key + "' (or " + env_name(key) + ")");
  return *v;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const long long out = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, "config key '" + key + "' is not an integer: " + *v);
  }
}

std::vector<std::pair<std::string, std::string>> Config::get_pairs(const std::string& key) const {
  std::vector<std::pair<std::string, std::string>> out;
  const auto v = find(key);
  if (!v) return out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kConfig, "config key '" + key + "': expected id=url");
    out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return out;
}

HostPort parse_host_port(const std::string& text) {
  std::string t = text;
  if (const auto p = t.find("://"); p != std::string::npos) t = t.substr(p + 3);
  if (const auto slash = t.find('/'); slash != std::string::npos) t = t.substr(0, slash);
  const auto colon = t.rfind(':');
  if (colon == std::string::npos) fail(ErrorCode::kConfig, "expected host:port, got " + text);
  HostPort hp;
  hp.host = t.substr(0, colon);
  try {
    hp.port = std::stoi(t.substr(colon + 1));
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, "bad port in " + text);
  }
  if (hp.port < 0 || hp.port > 65535) fail(ErrorCode::kConfig, "port out of range in " + text);
  return hp;
}

}  // namespace poa::cli
