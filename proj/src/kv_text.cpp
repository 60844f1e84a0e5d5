#include "vtc/kv_text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "vtc/errors.hpp"

namespace vtc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueText KeyValueText::parse(std::string_view text) {
  KeyValueText kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                            std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty key");
    if (kv.has(key)) throw ValidationError("duplicate key '" + key + "'");
    kv.set(key, std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

const std::string& KeyValueText::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("missing key '" + key + "'");
  return it->second;
}

std::string KeyValueText::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::size_t KeyValueText::get_size(const std::string& key) const { return parse_size(get(key), key); }

std::size_t KeyValueText::get_size_or(const std::string& key, std::size_t fallback) const {
  return has(key) ? get_size(key) : fallback;
}

double KeyValueText::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? parse_double(get(key), key) : fallback;
}

void KeyValueText::reject_unknown(const std::vector<std::string>& allowed) const {
  for (const auto& key : order_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> KeyValueText::keys() const { return order_; }

void KeyValueText::set(const std::string& key, const std::string& value) {
  if (values_.count(key) == 0) order_.push_back(key);
  values_[key] = value;
}

std::string KeyValueText::to_text() const {
  std::ostringstream out;
  for (const auto& key : order_) out << key << '=' << values_.at(key) << '\n';
  return out.str();
}

std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ValidationError(std::string(what) + ": expected a non-negative integer, got '" +
                          std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ValidationError(std::string(what) + ": expected a number, got '" + s + "'");
  }
  return value;
}

std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view what) {
  std::vector<std::size_t> out;
  text = trim(text);
  if (text.empty()) return out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_size(trim(text.substr(0, comma)), what));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace vtc
