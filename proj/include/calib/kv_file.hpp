#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace calib {

// Thrown for malformed configuration input. Carries the offending key and the
// 1-based line number when known (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string message, std::string key = {}, std::size_t line = 0);

  const std::string& message() const noexcept { return message_; }
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string message_;
  std::string key_;
  std::size_t line_;
};

struct KvEntry {
  std::string value;
  std::size_t line = 0;
};

// Flat `key = value` document. `#` starts a comment; blank lines are ignored.
// Later duplicates of a key are rejected.
class KvFile {
 public:
  static KvFile parse(std::string_view text);
  static KvFile load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  const KvEntry* find(std::string_view key) const;
  void set(std::string key, std::string value);

  std::string get_string(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;

  const std::map<std::string, KvEntry, std::less<>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::string, KvEntry, std::less<>> entries_;
};

double parse_double(std::string_view text, std::string_view key, std::size_t line);
long long parse_int(std::string_view text, std::string_view key, std::size_t line);
std::vector<std::string> split_list(std::string_view text, char sep = ',');
// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

std::string trim(std::string_view s);

}  // namespace calib
