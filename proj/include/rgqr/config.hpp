#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rgqr {

// Flat INI-style configuration: [section] headers over key = value lines,
// '#' or ';' comments, no nesting, no locale dependence.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text,
                              const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;

  // Missing keys raise ConfigError naming the field.
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long get_long(const std::string& section, const std::string& key) const;
  long get_long_or(const std::string& section, const std::string& key,
                   long fallback) const;
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;

  std::vector<std::string> get_list(const std::string& section,
                                    const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;

  const std::string& text() const { return raw_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::string raw_;
};

// FNV-1a 64-bit over the raw config bytes, for run manifests.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace rgqr
