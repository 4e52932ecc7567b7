#pragma once

#include <string>
#include <string_view>

namespace ppres::units {

// Dimensions used across configs and reports. Quantities are stored in SI
// base units of the dimension (m, Hz, H, ohm, A, T, s, 1/s, W, K, rad);
// dBm is kept as-is because it is logarithmic.
enum class Dimension {
  dimensionless,
  length,
  frequency,
  inductance,
  impedance,
  current,
  magnetic_field,
  time,
  rate,
  power,
  power_dbm,
  temperature,
  angle,
};

struct Quantity {
  double value = 0.0;
  Dimension dim = Dimension::dimensionless;
};

// Strict parse of a unit-suffixed scalar, e.g. "300nm", "7.5GHz", "0.2pH",
// "1/s", "-100dBm", "2e4". The suffix must follow the number with no space
// (a single space is tolerated), and the whole token must be consumed.
// Throws Error("unit-parse", ...) on malformed input.
Quantity parse_quantity(std::string_view text);

// Parse and check the dimension. A bare number is accepted only when the
// expected dimension is dimensionless. Throws Error("unit-mismatch", ...).
double parse_as(std::string_view text, Dimension expected);

// Canonical unit symbol for report files ("m", "Hz", ...).
std::string_view unit_symbol(Dimension dim);

std::string_view dimension_name(Dimension dim);

}  // namespace ppres::units
