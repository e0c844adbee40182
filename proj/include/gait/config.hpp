#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace gait {

// Flat `key = value` document. Blank lines and lines whose first
// non-blank character is '#' are ignored; keys and values are trimmed.
// Duplicate keys are an error so a typo cannot silently shadow a setting.
class ConfigMap {
 public:
  static ConfigMap parse(std::string_view text);
  static ConfigMap load(const std::filesystem::path& path);

  // Later values win; used to layer CLI flags over a file.
  void set(const std::string& key, std::string value);
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::uint64_t> get_u64(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gait
