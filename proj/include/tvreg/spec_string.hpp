#ifndef TVREG_SPEC_STRING_HPP
#define TVREG_SPEC_STRING_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tvreg {

/// `name:key=value,key=value` as used for operator and phantom specs.
struct SpecString {
  std::string name;
  std::map<std::string, std::string> params;

  static SpecString parse(const std::string& text);

  bool has(const std::string& key) const { return params.count(key) != 0; }
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  /// Rejects parameters other than `allowed`.
  void only(const std::vector<std::string>& allowed) const;
};

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what);
std::string trim(const std::string& s);

}  // namespace tvreg

#endif  // TVREG_SPEC_STRING_HPP
