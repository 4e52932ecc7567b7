#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppres/units.hpp"

namespace ppres::config {

// INI-style key-value config with unit-suffixed scalars:
//
//   [design]
//   nanowire_width = 300nm
//   f_r = 7.5GHz
//   q_internal = 2e4
//
// '#' starts a comment. Keys are snake_case; values are parsed strictly
// against the dimension each consumer expects.
class Config {
 public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_text(std::string_view text, const std::string& origin);

  // "section.key=value" override; the section and key must already be known
  // to the given schema (see validate_against).
  void apply_override(std::string_view assignment);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& raw(const std::string& section, const std::string& key) const;

  double number(const std::string& section, const std::string& key, units::Dimension dim) const;
  double number_or(const std::string& section, const std::string& key, units::Dimension dim,
                   double fallback) const;
  std::string text_or(const std::string& section, const std::string& key,
                      std::string fallback) const;
  // comma-separated list of unit-suffixed scalars
  std::vector<double> number_list(const std::string& section, const std::string& key,
                                  units::Dimension dim) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

  // Throws Error("unknown-key") when the config (including applied
  // overrides) holds a key outside the schema. The schema maps
  // "section.key" to the expected dimension; nullopt marks free-text keys.
  void validate_against(
      const std::map<std::string, std::optional<units::Dimension>>& schema) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string origin_ = "<none>";
};

}  // namespace ppres::config
