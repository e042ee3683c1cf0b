#include "steerkit/config.hpp"

#include <cctype>
#include <fstream>

#include "steerkit/errors.hpp"

namespace steerkit::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::int64_t to_i64(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const long long parsed = std::stoll(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + value +
                          "' is not an integer");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + value +
                          "' is not a number");
  }
}

}  // namespace

bool Config::has(const std::string& key) const {
  return values_.count(key) > 0;
}

const std::string* Config::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::optional<std::string> Config::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return std::nullopt;
  return *v;
}

std::optional<std::int64_t> Config::get_i64(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return std::nullopt;
  return to_i64(key, *v);
}

std::optional<std::uint64_t> Config::get_u64(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return std::nullopt;
  try {
    std::size_t consumed = 0;
    const unsigned long long parsed = std::stoull(*v, &consumed);
    if (consumed != v->size() || v->front() == '-') {
      throw std::invalid_argument(*v);
    }
    return parsed;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + *v +
                          "' is not an unsigned integer");
  }
}

std::optional<double> Config::get_double(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return std::nullopt;
  return to_double(key, *v);
}

std::optional<bool> Config::get_bool(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ValidationError("config key '" + key + "': '" + *v +
                        "' is not a boolean (use true/false)");
}

std::vector<sources::SourceConfig> Config::sources() const {
  std::map<std::string, sources::SourceConfig> by_label;
  for (const auto& [key, value] : values_) {
    if (key.rfind("source.", 0) != 0) continue;
    const std::size_t label_end = key.find('.', 7);
    if (label_end == std::string::npos || label_end == 7) {
      throw ValidationError("config key '" + key +
                            "': expected source.<label>.<field>");
    }
    const std::string label = key.substr(7, label_end - 7);
    const std::string field = key.substr(label_end + 1);
    used_.insert(key);

    auto& src = by_label[label];
    src.name = label;
    if (field == "kind") {
      if (value == "mock") {
        src.kind = sources::SourceKind::kMock;
      } else if (value == "http") {
        src.kind = sources::SourceKind::kHttp;
      } else {
        throw ValidationError("config key '" + key + "': unknown kind '" +
                              value + "' (use mock or http)");
      }
    } else if (field == "endpoint") {
      src.endpoint = value;
    } else if (field == "model") {
      src.model = value;
    } else if (field == "api_key_env") {
      src.api_key_env = value;
    } else if (field == "api") {
      if (value == "completions") {
        src.api = sources::HttpApi::kCompletions;
      } else if (value == "chat") {
        src.api = sources::HttpApi::kChat;
      } else {
        throw ValidationError("config key '" + key + "': unknown api '" +
                              value + "' (use completions or chat)");
      }
    } else if (field == "temperature") {
      src.temperature = to_double(key, value);
    } else if (field == "max_tokens") {
      src.max_tokens = static_cast<int>(to_i64(key, value));
    } else if (field == "timeout_ms") {
      src.timeout_ms = static_cast<int>(to_i64(key, value));
    } else if (field == "max_retries") {
      src.max_retries = static_cast<int>(to_i64(key, value));
    } else if (field == "parallelism") {
      src.parallelism = static_cast<int>(to_i64(key, value));
    } else if (field == "backoff_ms") {
      src.backoff_ms = static_cast<int>(to_i64(key, value));
    } else if (field == "seed") {
      src.seed = static_cast<std::uint64_t>(to_i64(key, value));
    } else if (field == "mean_length") {
      src.mean_length = static_cast<int>(to_i64(key, value));
    } else if (field == "vocab_size") {
      src.vocab_size = static_cast<int>(to_i64(key, value));
    } else if (field == "toxic_word_rate") {
      src.toxic_word_rate = to_double(key, value);
    } else {
      throw ValidationError("config key '" + key + "': unknown source field '" +
                            field + "'");
    }
  }
  std::vector<sources::SourceConfig> out;
  out.reserve(by_label.size());
  for (auto& [label, src] : by_label) out.push_back(std::move(src));
  return out;
}

void Config::ensure_fully_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (used_.count(key)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += key;
  }
  if (!unknown.empty()) {
    throw ValidationError("unknown config keys: " + unknown);
  }
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": empty key");
    }
    if (!values.emplace(key, value).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate key '" + key + "'");
    }
  }
  return Config(std::move(values));
}

}  // namespace steerkit::config
