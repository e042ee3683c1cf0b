#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "steerkit/sources.hpp"

namespace steerkit::config {

using KeyValues = std::map<std::string, std::string>;

/// Flat key = value configuration: one assignment per line, '#'
/// comments, no sections. Source definitions use a
/// "source.<label>.<field>" prefix. Every key must be consumed by the
/// command reading the file; leftovers are reported as unknown keys so
/// typos never pass silently.
class Config {
 public:
  Config() = default;
  explicit Config(KeyValues values) : values_(std::move(values)) {}

  bool has(const std::string& key) const;

  /// Typed getters. Each returns the parsed value (or std::nullopt when
  /// the key is absent) and marks the key as consumed. Malformed values
  /// throw ValidationError naming the key.
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_i64(const std::string& key) const;
  std::optional<std::uint64_t> get_u64(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

  /// Parses every "source.<label>.*" group into a SourceConfig, sorted
  /// by label. Unknown source fields throw.
  std::vector<sources::SourceConfig> sources() const;

  /// Throws ValidationError listing any key never consumed.
  void ensure_fully_consumed() const;

 private:
  const std::string* find(const std::string& key) const;

  KeyValues values_;
  mutable std::set<std::string> used_;
};

/// Loads a key = value file. Throws IoError when unreadable and
/// ValidationError (with the line number) on malformed lines or
/// duplicate keys.
Config load_config(const std::filesystem::path& path);

}  // namespace steerkit::config
