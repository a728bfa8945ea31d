#include "tnce/util/kv.h"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tnce/error.h"

namespace tnce {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got: " + t);
    Entry e;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.index_.count(e.key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + e.key + "'");
    cfg.index_[e.key] = cfg.entries_.size();
    cfg.entries_.push_back(std::move(e));
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return index_.count(key) > 0;
}

const KeyValueConfig::Entry& KeyValueConfig::find(const std::string& key) {
  auto it = index_.find(key);
  if (it == index_.end())
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  entries_[it->second].consumed = true;
  return entries_[it->second];
}

std::string KeyValueConfig::get_string(const std::string& key) {
  return find(key).value;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& def) {
  return has(key) ? get_string(key) : def;
}

double KeyValueConfig::get_double(const std::string& key) {
  const Entry& e = find(key);
  try {
    std::size_t pos = 0;
    double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                      "' is not a real number: " + e.value);
  }
}

double KeyValueConfig::get_double(const std::string& key, double def) {
  return has(key) ? get_double(key) : def;
}

std::int64_t KeyValueConfig::get_int(const std::string& key) {
  const Entry& e = find(key);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || p != e.value.data() + e.value.size())
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                      "' is not an integer: " + e.value);
  return v;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t def) {
  return has(key) ? get_int(key) : def;
}

std::size_t KeyValueConfig::get_size(const std::string& key) {
  std::int64_t v = get_int(key);
  if (v < 0) {
    const Entry& e = find(key);
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                      "' must be non-negative");
  }
  return static_cast<std::size_t>(v);
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t def) {
  return has(key) ? get_size(key) : def;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) {
  const Entry& e = find(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || p != e.value.data() + e.value.size())
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                      "' is not an unsigned integer: " + e.value);
  return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t def) {
  return has(key) ? get_u64(key) : def;
}

bool KeyValueConfig::get_bool(const std::string& key) {
  const Entry& e = find(key);
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                    "' must be true/false/1/0, got: " + e.value);
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) {
  return has(key) ? get_bool(key) : def;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) {
  const Entry& e = find(key);
  std::vector<double> out;
  for (const auto& tok : split_commas(e.value)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                        "' has a non-numeric list item: '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::size_t> KeyValueConfig::get_size_list(const std::string& key) {
  const Entry& e = find(key);
  std::vector<std::size_t> out;
  for (const auto& tok : split_commas(e.value)) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                        "' has a non-integer list item: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64_list(const std::string& key) {
  const Entry& e = find(key);
  std::vector<std::uint64_t> out;
  for (const auto& tok : split_commas(e.value)) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                        "' has a non-integer list item: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.key.rfind(prefix, 0) == 0) out.push_back(e.key);
  return out;
}

std::size_t KeyValueConfig::count_indexed(const std::string& prefix) const {
  std::size_t count = 0;
  while (true) {
    std::string p = prefix + "." + std::to_string(count) + ".";
    bool found = false;
    for (const auto& e : entries_)
      if (e.key.rfind(p, 0) == 0) {
        found = true;
        break;
      }
    if (!found) break;
    ++count;
  }
  return count;
}

void KeyValueConfig::require_all_consumed() const {
  for (const auto& e : entries_)
    if (!e.consumed)
      throw ConfigError(origin_ + ":" + std::to_string(e.line) +
                        ": unknown key '" + e.key + "'");
}

std::string KeyValueConfig::echo() const {
  std::string out;
  for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
  return out;
}

void KeyValueWriter::set(const std::string& key, const std::string& value) {
  lines_.push_back(key + " = " + value);
}
void KeyValueWriter::set(const std::string& key, const char* value) {
  set(key, std::string(value));
}
void KeyValueWriter::set(const std::string& key, double value) {
  set(key, format_double(value));
}
void KeyValueWriter::set(const std::string& key, std::size_t value) {
  set(key, std::to_string(value));
}
void KeyValueWriter::set(const std::string& key, int value) {
  set(key, std::to_string(value));
}
void KeyValueWriter::set(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}
void KeyValueWriter::set_list(const std::string& key,
                              const std::vector<double>& values) {
  std::string v;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) v += ",";
    v += format_double(values[i]);
  }
  set(key, v);
}
void KeyValueWriter::set_list(const std::string& key,
                              const std::vector<std::size_t>& values) {
  std::string v;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) v += ",";
    v += std::to_string(values[i]);
  }
  set(key, v);
}
void KeyValueWriter::comment(const std::string& text) {
  lines_.push_back("# " + text);
}
void KeyValueWriter::raw_block(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines_.push_back(line);
}

std::string KeyValueWriter::str() const {
  std::string out;
  for (const auto& l : lines_) out += l + "\n";
  return out;
}

std::string format_double(double v) {
  // %.17g always round-trips; try shorter forms first for readability.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tnce
