#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace clustermax::harness {

// Parsed config text. Grammar:
//
//   file    := { line }
//   line    := blank | comment | key '=' value | name '{' | '}'
//   comment := '#' ...
//
// Keys and block names are [A-Za-z0-9_-]+; values run to end of line (a
// trailing comment is stripped) and lists are comma-separated. Blocks nest.
struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct ConfigNode {
  int line = 0;
  std::map<std::string, ConfigEntry> entries;
  std::map<std::string, std::unique_ptr<ConfigNode>> blocks;
};

// Throws ConfigError("line N: ...") on syntax errors and duplicate keys.
ConfigNode parse_config(const std::string& text);
ConfigNode load_config_file(const std::string& path);

// "path.to.key=value" lines in sorted order.
std::string canonicalize(const ConfigNode& root);

// Typed view over one block that remembers which keys were read, so that
// leftovers can be reported as unknown.
class BlockReader {
 public:
  BlockReader(const ConfigNode& node, std::string path);

  bool has(const std::string& key) const { return node_->entries.count(key) > 0; }
  bool has_block(const std::string& name) const { return node_->blocks.count(name) > 0; }

  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  std::uint64_t get_u64(const std::string& key);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& key);
  std::vector<std::uint64_t> get_u64s(const std::string& key);

  BlockReader block(const std::string& name);
  std::optional<BlockReader> optional_block(const std::string& name);

  int line() const noexcept { return node_->line; }
  int line_of(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  [[noreturn]] void fail_block(const std::string& message) const;

  // Throws for every key or block in this node that was never read.
  void finish() const;

 private:
  const ConfigEntry& entry(const std::string& key);

  const ConfigNode* node_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace clustermax::harness
