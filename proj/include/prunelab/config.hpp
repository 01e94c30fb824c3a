#pragma once

#include <map>
#include <string>

#include "prunelab/common.hpp"

namespace prunelab {

/// Plain-text key-value config: one `key = value` per line, '#' comments.
/// Parse errors carry the line number. Keys are unique; later duplicates are
/// rejected.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  Index get_int(const std::string& key, Index fallback) const;
  double get_real(const std::string& key, double fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set_int(const std::string& key, Index value);
  void set_real(const std::string& key, double value);

  /// Sorted `key = value` lines; the canonical form used for hashing and
  /// manifests.
  std::string canonical() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace prunelab
