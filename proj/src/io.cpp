#include "steerkit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "steerkit/errors.hpp"

namespace steerkit {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file for reading: " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open file for reading: " + path.string());
  }
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed JSON line");
    }
    records.push_back(std::move(parsed));
  }
  return records;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open file for writing: " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed for: " + path.string());
  }
}

void write_jsonl_atomic(const std::filesystem::path& path,
                        const std::vector<ordered_json>& records) {
  std::string body;
  for (const auto& record : records) {
    body += record.dump();
    body += '\n';
  }
  write_atomic(path, body);
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) {
    return value;
  }
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

namespace {

const json& require_key(const json& j, const char* key,
                        const std::string& context) {
  if (!j.is_object()) {
    throw ValidationError(context + ": expected a JSON object");
  }
  auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(context + ": missing field '" + key + "'");
  }
  return *it;
}

}  // namespace

std::string require_string(const json& j, const char* key,
                           const std::string& context) {
  const json& value = require_key(j, key, context);
  if (!value.is_string()) {
    throw ValidationError(context + ": field '" + key +
                          "' must be a string");
  }
  return value.get<std::string>();
}

double require_double(const json& j, const char* key,
                      const std::string& context) {
  const json& value = require_key(j, key, context);
  if (!value.is_number()) {
    throw ValidationError(context + ": field '" + key +
                          "' must be a number");
  }
  return value.get<double>();
}

std::int64_t require_int(const json& j, const char* key,
                         const std::string& context) {
  const json& value = require_key(j, key, context);
  if (!value.is_number_integer()) {
    throw ValidationError(context + ": field '" + key +
                          "' must be an integer");
  }
  return value.get<std::int64_t>();
}

bool require_bool(const json& j, const char* key, const std::string& context) {
  const json& value = require_key(j, key, context);
  if (!value.is_boolean()) {
    throw ValidationError(context + ": field '" + key +
                          "' must be a boolean");
  }
  return value.get<bool>();
}

std::optional<std::string> optional_string(const json& j, const char* key,
                                           const std::string& context) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return require_string(j, key, context);
}

std::optional<double> optional_double(const json& j, const char* key,
                                      const std::string& context) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return require_double(j, key, context);
}

std::optional<std::int64_t> optional_int(const json& j, const char* key,
                                         const std::string& context) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return require_int(j, key, context);
}

}  // namespace steerkit
