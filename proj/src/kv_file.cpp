#include "calib/kv_file.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace calib {

namespace {

std::string describe(const std::string& message, const std::string& key, std::size_t line) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  os << message;
  if (!key.empty()) os << " (key '" << key << "')";
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::string message, std::string key, std::size_t line)
    : std::runtime_error(describe(message, key, line)),
      message_(std::move(message)),
      key_(std::move(key)),
      line_(line) {}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) pos = text.size();
    auto item = trim(text.substr(start, pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::string_view key, std::size_t line) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty numeric value", std::string(key), line);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("not a finite number: '" + s + "'", std::string(key), line);
  }
  return v;
}

long long parse_int(std::string_view text, std::string_view key, std::size_t line) {
  const double v = parse_double(text, key, line);
  if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
    throw ConfigError("not an integer: '" + trim(text) + "'", std::string(key), line);
  }
  return static_cast<long long>(v);
}

KvFile KvFile::parse(std::string_view text) {
  KvFile kv;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value', got '" + line + "'", {}, line_no);
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", {}, line_no);
    if (kv.entries_.count(key) != 0) {
      throw ConfigError("duplicate key", key, line_no);
    }
    kv.entries_.emplace(std::move(key), KvEntry{std::move(value), line_no});
  }
  return kv;
}

KvFile KvFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KvFile::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

const KvEntry* KvFile::find(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void KvFile::set(std::string key, std::string value) {
  entries_[std::move(key)] = KvEntry{std::move(value), 0};
}

std::string KvFile::get_string(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) throw ConfigError("missing required key", std::string(key));
  return e->value;
}

double KvFile::get_double(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) throw ConfigError("missing required key", std::string(key));
  return parse_double(e->value, key, e->line);
}

long long KvFile::get_int(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) throw ConfigError("missing required key", std::string(key));
  return parse_int(e->value, key, e->line);
}

std::vector<std::string> KvFile::get_list(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) throw ConfigError("missing required key", std::string(key));
  return split_list(e->value);
}

}  // namespace calib
