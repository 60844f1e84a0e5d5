#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vtc {

/// Plain-text `key=value` block. Blank lines and `#` comments are ignored;
/// duplicate keys are rejected.
class KeyValueText {
 public:
  static KeyValueText parse(std::string_view text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::size_t get_size(const std::string& key) const;
  std::size_t get_size_or(const std::string& key, std::size_t fallback) const;
  double get_double_or(const std::string& key, double fallback) const;

  /// Throws ValidationError naming the first key not in `allowed`.
  void reject_unknown(const std::vector<std::string>& allowed) const;
  std::vector<std::string> keys() const;

  void set(const std::string& key, const std::string& value);
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

std::size_t parse_size(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);
std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view what);
std::string join_sizes(const std::vector<std::size_t>& values, char sep = ',');

}  // namespace vtc
