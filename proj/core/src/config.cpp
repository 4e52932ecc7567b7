#include "ppres/config.hpp"

#include <fstream>
#include <sstream>

#include "ppres/error.hpp"

namespace ppres::config {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("file-io", "cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path.string());
}

Config Config::parse_text(std::string_view text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;

    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        fail("config-parse", origin + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      cfg.sections_[section];  // allow empty sections
      continue;
    }

    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail("config-parse",
           origin + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail("config-parse", origin + ":" + std::to_string(line_no) + ": empty key or value");
    }
    if (section.empty()) {
      fail("config-parse",
           origin + ":" + std::to_string(line_no) + ": key outside of any [section]");
    }
    auto [it, inserted] = cfg.sections_[section].emplace(key, value);
    if (!inserted) {
      fail("config-parse",
           origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

void Config::apply_override(std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    fail("config-parse", "override must look like section.key=value, got '" +
                             std::string(assignment) + "'");
  }
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const std::size_t dot = path.find('.');
  if (dot == std::string::npos || value.empty()) {
    fail("config-parse", "override must look like section.key=value, got '" +
                             std::string(assignment) + "'");
  }
  sections_[path.substr(0, dot)][path.substr(dot + 1)] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

const std::string& Config::raw(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || s->second.count(key) == 0) {
    fail("config-parse", origin_ + ": missing required key [" + section + "] " + key);
  }
  return s->second.at(key);
}

double Config::number(const std::string& section, const std::string& key,
                      units::Dimension dim) const {
  try {
    return units::parse_as(raw(section, key), dim);
  } catch (const Error& e) {
    if (e.code() == "config-parse") throw;
    fail("config-parse", origin_ + ": [" + section + "] " + key + ": " + e.what());
  }
}

double Config::number_or(const std::string& section, const std::string& key, units::Dimension dim,
                         double fallback) const {
  if (!has(section, key)) return fallback;
  return number(section, key, dim);
}

std::string Config::text_or(const std::string& section, const std::string& key,
                            std::string fallback) const {
  if (!has(section, key)) return fallback;
  return raw(section, key);
}

std::vector<double> Config::number_list(const std::string& section, const std::string& key,
                                        units::Dimension dim) const {
  const std::string& value = raw(section, key);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    std::string item = trim(std::string_view(value).substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!item.empty()) {
      try {
        out.push_back(units::parse_as(item, dim));
      } catch (const Error& e) {
        fail("config-parse", origin_ + ": [" + section + "] " + key + ": " + e.what());
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  require(!out.empty(), "config-parse",
          origin_ + ": [" + section + "] " + key + ": empty list");
  return out;
}

void Config::validate_against(
    const std::map<std::string, std::optional<units::Dimension>>& schema) const {
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, value] : entries) {
      const std::string path = section + "." + key;
      auto it = schema.find(path);
      if (it == schema.end()) {
        fail("unknown-key", origin_ + ": unknown key '" + path + "'");
      }
      if (it->second.has_value()) {
        try {
          (void)units::parse_as(value, *it->second);  // strict dimension check
        } catch (const Error& e) {
          fail("config-parse", origin_ + ": [" + section + "] " + key + ": " + e.what());
        }
      }
    }
  }
}

}  // namespace ppres::config
