#include "ppres/units.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "ppres/error.hpp"

namespace ppres::units {

namespace {

struct UnitEntry {
  std::string_view suffix;
  Dimension dim;
  double scale;
};

// Longest-match table. "um"/"us" are accepted alongside the UTF-8 µ forms.
constexpr std::array<UnitEntry, 60> kUnits{{
    {"pm", Dimension::length, 1e-12},
    {"nm", Dimension::length, 1e-9},
    {"um", Dimension::length, 1e-6},
    {"µm", Dimension::length, 1e-6},
    {"mm", Dimension::length, 1e-3},
    {"cm", Dimension::length, 1e-2},
    {"m", Dimension::length, 1.0},
    {"Hz", Dimension::frequency, 1.0},
    {"kHz", Dimension::frequency, 1e3},
    {"MHz", Dimension::frequency, 1e6},
    {"GHz", Dimension::frequency, 1e9},
    {"fH", Dimension::inductance, 1e-15},
    {"pH", Dimension::inductance, 1e-12},
    {"nH", Dimension::inductance, 1e-9},
    {"uH", Dimension::inductance, 1e-6},
    {"µH", Dimension::inductance, 1e-6},
    {"mH", Dimension::inductance, 1e-3},
    {"H", Dimension::inductance, 1.0},
    {"uohm", Dimension::impedance, 1e-6},
    {"mohm", Dimension::impedance, 1e-3},
    {"ohm", Dimension::impedance, 1.0},
    {"kohm", Dimension::impedance, 1e3},
    {"pA", Dimension::current, 1e-12},
    {"nA", Dimension::current, 1e-9},
    {"uA", Dimension::current, 1e-6},
    {"µA", Dimension::current, 1e-6},
    {"mA", Dimension::current, 1e-3},
    {"A", Dimension::current, 1.0},
    {"pT", Dimension::magnetic_field, 1e-12},
    {"nT", Dimension::magnetic_field, 1e-9},
    {"uT", Dimension::magnetic_field, 1e-6},
    {"µT", Dimension::magnetic_field, 1e-6},
    {"mT", Dimension::magnetic_field, 1e-3},
    {"T", Dimension::magnetic_field, 1.0},
    {"fs", Dimension::time, 1e-15},
    {"ps", Dimension::time, 1e-12},
    {"ns", Dimension::time, 1e-9},
    {"us", Dimension::time, 1e-6},
    {"µs", Dimension::time, 1e-6},
    {"ms", Dimension::time, 1e-3},
    {"s", Dimension::time, 1.0},
    {"/s", Dimension::rate, 1.0},
    {"/ms", Dimension::rate, 1e3},
    {"/us", Dimension::rate, 1e6},
    {"fW", Dimension::power, 1e-15},
    {"pW", Dimension::power, 1e-12},
    {"nW", Dimension::power, 1e-9},
    {"uW", Dimension::power, 1e-6},
    {"µW", Dimension::power, 1e-6},
    {"mW", Dimension::power, 1e-3},
    {"W", Dimension::power, 1.0},
    {"dBm", Dimension::power_dbm, 1.0},
    {"mK", Dimension::temperature, 1e-3},
    {"K", Dimension::temperature, 1.0},
    {"urad", Dimension::angle, 1e-6},
    {"mrad", Dimension::angle, 1e-3},
    {"rad", Dimension::angle, 1.0},
    {"deg", Dimension::angle, 3.14159265358979323846 / 180.0},
    {"%", Dimension::dimensionless, 1e-2},
    {"", Dimension::dimensionless, 1.0},
}};

}  // namespace

Quantity parse_quantity(std::string_view text) {
  // trim
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) fail("unit-parse", "empty value");

  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin) {
    fail("unit-parse", "not a number: '" + std::string(text) + "'");
  }
  std::string_view rest(ptr, static_cast<std::size_t>(end - ptr));
  if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);

  const UnitEntry* match = nullptr;
  for (const auto& u : kUnits) {
    if (rest == u.suffix) {
      match = &u;
      break;
    }
  }
  if (match == nullptr) {
    fail("unit-parse", "unknown unit suffix '" + std::string(rest) + "' in '" + std::string(text) + "'");
  }
  if (match->dim == Dimension::power_dbm) return {value, match->dim};
  return {value * match->scale, match->dim};
}

double parse_as(std::string_view text, Dimension expected) {
  Quantity q = parse_quantity(text);
  if (q.dim != expected) {
    fail("unit-mismatch", "expected a " + std::string(dimension_name(expected)) + " for '" +
                              std::string(text) + "', got " + std::string(dimension_name(q.dim)));
  }
  return q.value;
}

std::string_view unit_symbol(Dimension dim) {
  switch (dim) {
    case Dimension::dimensionless: return "1";
    case Dimension::length: return "m";
    case Dimension::frequency: return "Hz";
    case Dimension::inductance: return "H";
    case Dimension::impedance: return "ohm";
    case Dimension::current: return "A";
    case Dimension::magnetic_field: return "T";
    case Dimension::time: return "s";
    case Dimension::rate: return "1/s";
    case Dimension::power: return "W";
    case Dimension::power_dbm: return "dBm";
    case Dimension::temperature: return "K";
    case Dimension::angle: return "rad";
  }
  return "?";
}

std::string_view dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::dimensionless: return "dimensionless number";
    case Dimension::length: return "length";
    case Dimension::frequency: return "frequency";
    case Dimension::inductance: return "inductance";
    case Dimension::impedance: return "impedance";
    case Dimension::current: return "current";
    case Dimension::magnetic_field: return "magnetic field";
    case Dimension::time: return "time";
    case Dimension::rate: return "rate";
    case Dimension::power: return "power";
    case Dimension::power_dbm: return "power (dBm)";
    case Dimension::temperature: return "temperature";
    case Dimension::angle: return "angle";
  }
  return "?";
}

}  // namespace ppres::units
