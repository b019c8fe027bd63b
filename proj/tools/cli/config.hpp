#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace ceqcli {

using json = nlohmann::ordered_json;

/// Angular frequency from a config value: a number is Hz; strings accept
/// "2pi*<x>", "<x> <unit>" and "2pi*<x> <unit>" with unit Hz, kHz, MHz,
/// GHz, plus "<x> rad/s" for angular values.
double parse_frequency(const json& value, const std::string& where);

/// Canonical echo of an angular frequency, exact on re-parse.
std::string format_frequency(double rad_s);

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// One JSON object read under a strict schema. Every getter records the
/// resolved value (defaults included); finish() rejects keys never read.
class Section {
 public:
  Section(json source, std::string path);

  double number(const std::string& key, double fallback);
  double positive(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed);
  double frequency(const std::string& key, double fallback_rad_s);
  bool has(const std::string& key) const;

  /// List of numbers, or {"start", "stop", "count", "log"} for a linear or
  /// logarithmic range. Empty grids are rejected.
  std::vector<double> grid(const std::string& key, const std::vector<double>& fallback);
  std::vector<double> frequency_grid(const std::string& key, const std::vector<double>& fallback_rad_s);
  std::vector<int> int_grid(const std::string& key, const std::vector<int>& fallback);
  std::vector<bool> flag_grid(const std::string& key, const std::vector<bool>& fallback);
  /// Plain list, possibly empty.
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback);

  Section child(const std::string& key);
  void adopt(const std::string& key, Section& child);

  void finish() const;
  const json& resolved() const { return resolved_; }

 private:
  const json* lookup(const std::string& key);
  std::string where(const std::string& key) const;

  json source_;
  json resolved_ = json::object();
  std::string path_;
  std::set<std::string> used_;
};

struct RunSettings {
  std::string command;
  std::string output_dir;
  std::uint64_t master_seed = 0;
  int workers = 1;
};

}  // namespace ceqcli
