#include "rgqr/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rgqr/errors.hpp"

namespace rgqr {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

IniFile IniFile::parse_string(const std::string& text,
                              const std::string& origin) {
  IniFile ini;
  ini.raw_ = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    ini.data_[section][key] = value;
  }
  return ini;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto sit = data_.find(section);
  if (sit == data_.end()) return false;
  return sit->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section,
                         const std::string& key) const {
  const auto sit = data_.find(section);
  if (sit != data_.end()) {
    const auto kit = sit->second.find(key);
    if (kit != sit->second.end()) return kit->second;
  }
  throw ConfigError("missing config field [" + section + "] " + key);
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double IniFile::get_double(const std::string& section,
                           const std::string& key) const {
  const std::string v = get(section, key);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config field [" + section + "] " + key +
                      ": not a number: '" + v + "'");
  }
  return out;
}

double IniFile::get_double_or(const std::string& section,
                              const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long IniFile::get_long(const std::string& section,
                       const std::string& key) const {
  const std::string v = get(section, key);
  long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config field [" + section + "] " + key +
                      ": not an integer: '" + v + "'");
  }
  return out;
}

long IniFile::get_long_or(const std::string& section, const std::string& key,
                          long fallback) const {
  return has(section, key) ? get_long(section, key) : fallback;
}

std::uint64_t IniFile::get_u64_or(const std::string& section,
                                  const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config field [" + section + "] " + key +
                      ": not an unsigned integer: '" + v + "'");
  }
  return out;
}

std::vector<std::string> IniFile::get_list(const std::string& section,
                                           const std::string& key) const {
  const std::string v = get(section, key);
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty()) {
    throw ConfigError("config field [" + section + "] " + key + ": empty list");
  }
  return out;
}

std::vector<double> IniFile::get_double_list(const std::string& section,
                                             const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(section, key)) {
    double v = 0.0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("config field [" + section + "] " + key +
                        ": not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rgqr
