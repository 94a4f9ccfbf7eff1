#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace regraft::cli {

// Bad key, bad value or missing setting. `line` is the 1-based config line,
// 0 for command-line overrides and derived checks.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, std::size_t line, const std::string& what);
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

enum class ValueType { Count, Real, Bool, String, Choice, CountList, Seed };

struct KeyInfo {
  std::string key;
  ValueType type;
  std::string default_value;
  std::vector<std::string> choices;  // Choice only
  std::string help;
};

const std::vector<KeyInfo>& schema();
const KeyInfo* find_key(std::string_view key);

// Flat `key = value` settings with every schema key resolved. Resolution
// order: defaults, then the `strategy` preset, then the file's own keys, then
// overrides, then REGRAFT_SEED (if given) for `seed`.
class RunConfig {
 public:
  RunConfig();

  const std::string& raw(std::string_view key) const;
  std::uint64_t count(std::string_view key) const;
  double real(std::string_view key) const;
  bool flag(std::string_view key) const;
  const std::string& str(std::string_view key) const { return raw(key); }
  std::vector<std::size_t> counts(std::string_view key) const;
  // Seed keys: "auto" derives from `seed` with the given stream.
  std::uint64_t seed(std::string_view key, std::uint64_t stream) const;

  // Source line of an explicitly given key, 0 otherwise.
  std::size_t line_of(std::string_view key) const;

  std::string resolved_text() const;
  const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }
  bool operator==(const RunConfig& other) const { return values_ == other.values_; }

  // Type-checks and stores one value.
  void set(const std::string& key, const std::string& value, std::size_t line);

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::map<std::string, std::size_t, std::less<>> lines_;
};

using Override = std::pair<std::string, std::string>;

RunConfig parse_config(std::string_view text, const std::vector<Override>& overrides = {},
                       std::optional<std::string> seed_env = std::nullopt);

// "key=value" -> pair; throws ConfigError.
Override parse_override(std::string_view text);

// Preset keys for a strategy name; empty for "custom".
std::vector<Override> strategy_preset(std::string_view name);

}  // namespace regraft::cli
