#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tnce {

// Flat `key = value` text with dotted sections and '#' comments. Used for run
// configs, manifests and dataset sidecars. Unknown keys are rejected: every
// getter marks its key consumed and require_all_consumed() names the first
// leftover key with its line number.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text,
                                     const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& def);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double def);
  std::int64_t get_int(const std::string& key);
  std::int64_t get_int(const std::string& key, std::int64_t def);
  std::size_t get_size(const std::string& key);
  std::size_t get_size(const std::string& key, std::size_t def);
  std::uint64_t get_u64(const std::string& key);
  std::uint64_t get_u64(const std::string& key, std::uint64_t def);
  bool get_bool(const std::string& key);
  bool get_bool(const std::string& key, bool def);

  // Comma-separated lists.
  std::vector<double> get_double_list(const std::string& key);
  std::vector<std::size_t> get_size_list(const std::string& key);
  std::vector<std::uint64_t> get_u64_list(const std::string& key);

  // Keys beginning with `prefix`, in file order (not consumed).
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Number of distinct indices i for keys of form `prefix.i.suffix`.
  std::size_t count_indexed(const std::string& prefix) const;

  void require_all_consumed() const;

  // The parsed text, re-emitted verbatim key = value (file order). Comments
  // are dropped; values are untouched. Used to echo configs into manifests.
  std::string echo() const;

 private:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };
  const Entry& find(const std::string& key);
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  std::string origin_;
};

// Ordered key = value writer for manifests and sidecars.
class KeyValueWriter {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::size_t value);
  void set(const std::string& key, int value);
  void set(const std::string& key, bool value);
  void set_list(const std::string& key, const std::vector<double>& values);
  void set_list(const std::string& key, const std::vector<std::size_t>& values);
  void comment(const std::string& text);
  void raw_block(const std::string& text);  // appended verbatim

  std::string str() const;

 private:
  std::vector<std::string> lines_;
};

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

// Atomic text write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace tnce
