#include "tvreg/spec_string.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "tvreg/grid.hpp"

namespace tvreg {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

SpecString SpecString::parse(const std::string& text) {
  SpecString out;
  const auto colon = text.find(':');
  out.name = trim(text.substr(0, colon));
  if (out.name.empty()) throw Error("empty spec string");
  if (colon == std::string::npos) return out;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error("spec '" + text + "': expected key=value, got '" + item +
                  "'");
    }
    out.params[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  return out;
}

std::string SpecString::text(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) {
    throw Error("spec '" + name + "': missing parameter '" + key + "'");
  }
  return it->second;
}

std::string SpecString::text(const std::string& key,
                             const std::string& fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double SpecString::number(const std::string& key) const {
  return parse_double(text(key), name + "." + key);
}

double SpecString::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

void SpecString::only(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : params) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw Error("spec '" + name + "': unknown parameter '" + k + "'");
    }
  }
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(what + ": not a number: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(what + ": not an integer: '" + text + "'");
  }
  return v;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(item, what));
  }
  return out;
}

}  // namespace tvreg
