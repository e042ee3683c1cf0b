#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace steerkit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Reads a whole file into a string. Throws IoError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Parses a JSONL file: one JSON object per non-empty line.
/// Throws ValidationError with the line number on malformed lines.
std::vector<json> read_jsonl(const std::filesystem::path& path);

/// Writes content to path atomically (temp file in the same directory,
/// then rename). A failed run never leaves a partial output behind.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Serializes records as JSONL and writes them atomically.
void write_jsonl_atomic(const std::filesystem::path& path,
                        const std::vector<ordered_json>& records);

/// Escapes one CSV field (quotes when needed).
std::string csv_field(const std::string& value);

/// Formats a double for CSV/report text with round-trip precision.
std::string format_double(double value);

/// Field extractors for JSONL record parsing. context names the record
/// ("file.jsonl record 3") so schema errors point at the offending line.
/// All throw ValidationError on a missing key or wrong type.
std::string require_string(const json& j, const char* key,
                           const std::string& context);
double require_double(const json& j, const char* key,
                      const std::string& context);
std::int64_t require_int(const json& j, const char* key,
                         const std::string& context);
bool require_bool(const json& j, const char* key, const std::string& context);
std::optional<std::string> optional_string(const json& j, const char* key,
                                           const std::string& context);
std::optional<double> optional_double(const json& j, const char* key,
                                      const std::string& context);
std::optional<std::int64_t> optional_int(const json& j, const char* key,
                                         const std::string& context);

}  // namespace steerkit
