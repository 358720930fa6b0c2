#include "clustermax/harness/config_file.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "clustermax/errors.hpp"

namespace clustermax::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

[[noreturn]] void syntax_error(int line, const std::string& message) {
  throw ConfigError("line " + std::to_string(line) + ": " + message);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

void canonicalize_into(const ConfigNode& node, const std::string& prefix, std::vector<std::string>& lines) {
  for (const auto& [key, entry] : node.entries) lines.push_back(prefix + key + "=" + entry.value);
  for (const auto& [name, child] : node.blocks) canonicalize_into(*child, prefix + name + ".", lines);
}

}  // namespace

ConfigNode parse_config(const std::string& text) {
  ConfigNode root;
  root.line = 1;
  std::vector<ConfigNode*> stack{&root};
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line == "}") {
      if (stack.size() == 1) syntax_error(line_no, "unmatched '}'");
      stack.pop_back();
      continue;
    }
    if (line.back() == '{') {
      const std::string name = trim(line.substr(0, line.size() - 1));
      if (!valid_name(name)) syntax_error(line_no, "invalid block name '" + name + "'");
      auto& blocks = stack.back()->blocks;
      if (blocks.count(name)) syntax_error(line_no, "duplicate block '" + name + "'");
      if (stack.back()->entries.count(name)) syntax_error(line_no, "'" + name + "' is already a key");
      auto child = std::make_unique<ConfigNode>();
      child->line = line_no;
      ConfigNode* ptr = child.get();
      blocks.emplace(name, std::move(child));
      stack.push_back(ptr);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) syntax_error(line_no, "expected 'key = value', 'name {' or '}'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key)) syntax_error(line_no, "invalid key '" + key + "'");
    if (value.empty()) syntax_error(line_no, "missing value for '" + key + "'");
    auto& entries = stack.back()->entries;
    if (entries.count(key)) syntax_error(line_no, "duplicate key '" + key + "'");
    if (stack.back()->blocks.count(key)) syntax_error(line_no, "'" + key + "' is already a block");
    entries.emplace(key, ConfigEntry{value, line_no});
  }
  if (stack.size() != 1) syntax_error(stack.back()->line, "block is never closed");
  return root;
}

ConfigNode load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string canonicalize(const ConfigNode& root) {
  std::vector<std::string> lines;
  canonicalize_into(root, "", lines);
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

BlockReader::BlockReader(const ConfigNode& node, std::string path) : node_(&node), path_(std::move(path)) {}

const ConfigEntry& BlockReader::entry(const std::string& key) {
  const auto it = node_->entries.find(key);
  if (it == node_->entries.end()) fail_block("missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

int BlockReader::line_of(const std::string& key) const {
  const auto it = node_->entries.find(key);
  return it == node_->entries.end() ? node_->line : it->second.line;
}

void BlockReader::fail(const std::string& key, const std::string& message) const {
  const std::string where = path_.empty() ? key : path_ + "." + key;
  syntax_error(line_of(key), where + ": " + message);
}

void BlockReader::fail_block(const std::string& message) const {
  syntax_error(node_->line, (path_.empty() ? std::string("top level") : "block '" + path_ + "'") + ": " + message);
}

std::string BlockReader::get_string(const std::string& key) { return entry(key).value; }

std::string BlockReader::get_string(const std::string& key, const std::string& fallback) {
  return has(key) ? get_string(key) : fallback;
}

double BlockReader::get_double(const std::string& key) {
  const std::string& v = entry(key).value;
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || std::isnan(d)) fail(key, "expected a number, got '" + v + "'");
  return d;
}

double BlockReader::get_double(const std::string& key, double fallback) {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t BlockReader::get_u64(const std::string& key) {
  const std::string& v = entry(key).value;
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    fail(key, "expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t BlockReader::get_u64(const std::string& key, std::uint64_t fallback) {
  return has(key) ? get_u64(key) : fallback;
}

bool BlockReader::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const std::string v = entry(key).value;
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> BlockReader::get_doubles(const std::string& key) {
  const std::string v = entry(key).value;
  std::vector<double> out;
  for (const auto& item : split_list(v)) {
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0' || std::isnan(d)) {
      fail(key, "expected a list of numbers, got '" + v + "'");
    }
    out.push_back(d);
  }
  return out;
}

std::vector<std::uint64_t> BlockReader::get_u64s(const std::string& key) {
  const std::string v = entry(key).value;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(v)) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      fail(key, "expected a list of nonnegative integers, got '" + v + "'");
    }
    out.push_back(x);
  }
  return out;
}

BlockReader BlockReader::block(const std::string& name) {
  const auto it = node_->blocks.find(name);
  if (it == node_->blocks.end()) fail_block("missing required block '" + name + "'");
  used_.insert(name);
  return BlockReader(*it->second, path_.empty() ? name : path_ + "." + name);
}

std::optional<BlockReader> BlockReader::optional_block(const std::string& name) {
  if (!has_block(name)) return std::nullopt;
  return block(name);
}

void BlockReader::finish() const {
  for (const auto& [key, e] : node_->entries) {
    if (!used_.count(key)) syntax_error(e.line, "unknown key '" + (path_.empty() ? key : path_ + "." + key) + "'");
  }
  for (const auto& [name, child] : node_->blocks) {
    if (!used_.count(name)) {
      syntax_error(child->line, "unknown block '" + (path_.empty() ? name : path_ + "." + name) + "'");
    }
  }
}

}  // namespace clustermax::harness
