#include "ppres/field.hpp"

#include <cmath>
#include <string>

#include "ppres/constants.hpp"
#include "ppres/error.hpp"

namespace ppres::field {

namespace {
constexpr double kPi = 3.14159265358979323846;

double norm3(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
}  // namespace

void CrossSection::validate() const {
  require(width > 0.0 && thickness > 0.0 && dielectric_thickness > 0.0 && current_zpf > 0.0,
          "invalid-geometry", "cross-section dimensions and current must be positive");
  require(guard > 0.0, "invalid-geometry", "guard distance must be positive");
}

double FieldSample::magnitude() const { return std::hypot(bx, by); }

Vec2 sheet_field(double current, double width, double sheet_y, Vec2 p) {
  require(width > 0.0, "invalid-geometry", "sheet width must be positive");
  const double k_lin = current / width;  // surface current density, A/m
  const double x1 = -0.5 * width;
  const double x2 = 0.5 * width;
  const double yy = p.y - sheet_y;

  // Integrated line-current kernel over the strip:
  //   Bx = -mu0 K / (2 pi) [atan((x2-x)/Y) - atan((x1-x)/Y)]
  //   By =  mu0 K / (4 pi) ln(((x-x1)^2 + Y^2) / ((x-x2)^2 + Y^2))
  double a2, a1;
  if (yy != 0.0) {
    a2 = std::atan((x2 - p.x) / yy);
    a1 = std::atan((x1 - p.x) / yy);
  } else {
    a2 = std::copysign(0.5 * kPi, x2 - p.x);
    a1 = std::copysign(0.5 * kPi, x1 - p.x);
  }
  const double pref = constants::mu0 * k_lin / (2.0 * kPi);
  Vec2 b;
  b.x = -pref * (a2 - a1);
  const double r1sq = (p.x - x1) * (p.x - x1) + yy * yy;
  const double r2sq = (p.x - x2) * (p.x - x2) + yy * yy;
  b.y = 0.5 * pref * std::log(r1sq / r2sq);
  return b;
}

double sheet_distance(const CrossSection& s, Vec2 p, double sheet_y) {
  const double dx = std::max(std::fabs(p.x) - 0.5 * s.width, 0.0);
  return std::hypot(dx, p.y - sheet_y);
}

Vec2 delta_b(const CrossSection& s, Vec2 p) {
  s.validate();
  const double d1 = sheet_distance(s, p, s.sheet_height());
  const double d2 = sheet_distance(s, p, s.image_height());
  if (d1 < s.guard || d2 < s.guard) {
    fail("guard-zone", "evaluation point within " + std::to_string(s.guard * 1e9) +
                           " nm of a current sheet");
  }
  const Vec2 b1 = sheet_field(s.current_zpf, s.width, s.sheet_height(), p);
  const Vec2 b2 = sheet_field(-s.current_zpf, s.width, s.image_height(), p);
  return {b1.x + b2.x, b1.y + b2.y};
}

Window default_window(const CrossSection& s) {
  Window w;
  w.x_min = -1e-6;
  w.x_max = 1e-6;
  w.y_min = -0.5e-6;
  w.y_max = s.thickness + s.dielectric_thickness;
  return w;
}

FieldMap field_map(const CrossSection& s, const Window& window, double spacing) {
  s.validate();
  require(spacing > 0.0, "domain-error", "grid spacing must be positive");
  require(window.x_max > window.x_min && window.y_max > window.y_min, "empty-window",
          "field map window is empty");

  FieldMap map;
  map.spacing = spacing;
  map.window = window;
  map.nx = static_cast<std::size_t>(std::floor((window.x_max - window.x_min) / spacing + 0.5)) + 1;
  map.ny = static_cast<std::size_t>(std::floor((window.y_max - window.y_min) / spacing + 0.5)) + 1;
  map.samples.reserve(map.nx * map.ny);

  const double mask = s.mask_radius();
  const double y_sheet = s.sheet_height();
  const double y_image = s.image_height();
  double best = 0.0;
  for (std::size_t j = 0; j < map.ny; ++j) {
    const double y = window.y_min + static_cast<double>(j) * spacing;
    if (y > window.y_max + 0.5 * spacing) break;
    for (std::size_t i = 0; i < map.nx; ++i) {
      const double x = window.x_min + static_cast<double>(i) * spacing;
      if (x > window.x_max + 0.5 * spacing) break;
      const Vec2 p{x, y};
      if (sheet_distance(s, p, y_sheet) < mask || sheet_distance(s, p, y_image) < mask) continue;
      const Vec2 b1 = sheet_field(s.current_zpf, s.width, y_sheet, p);
      const Vec2 b2 = sheet_field(-s.current_zpf, s.width, y_image, p);
      FieldSample sample{x, y, b1.x + b2.x, b1.y + b2.y};
      const double m = sample.magnitude();
      require(std::isfinite(m), "domain-error", "non-finite field value on grid");
      if (m > best) best = m;
      map.samples.push_back(sample);
    }
  }
  require(!map.samples.empty(), "empty-window", "all grid points fall in the exclusion zone");
  map.b_max = best;
  return map;
}

void SpinSpecies::validate() const {
  require(gyro_ratio > 0.0, "domain-error", "gyromagnetic ratio must be positive");
  const double n = norm3(quantization_axis);
  require(std::fabs(n - 1.0) < 1e-9, "domain-error", "quantization axis must be unit length");
  const double expected = g_factor * constants::bohr_magneton_over_h;
  require(std::fabs(gyro_ratio - expected) <= 1e-3 * expected, "domain-error",
          "gyro_ratio inconsistent with g factor");
}

SpinSpecies make_spin(std::string name, double g_factor, double nonradiative_rate) {
  require(g_factor > 0.0, "domain-error", "g factor must be positive");
  SpinSpecies spin;
  spin.name = std::move(name);
  spin.g_factor = g_factor;
  spin.gyro_ratio = g_factor * constants::bohr_magneton_over_h;
  spin.nonradiative_rate = nonradiative_rate;
  return spin;
}

SpinSpecies free_electron() { return make_spin("free_electron", 2.0023, 1e-3); }

SpinSpecies erbium_cawo4() { return make_spin("er_cawo4", 8.38, 1.0); }

double g0_at(const CrossSection& s, Vec2 p, const SpinSpecies& spin,
             Vec3 static_field_direction) {
  spin.validate();
  const double n = norm3(static_field_direction);
  require(std::fabs(n - 1.0) < 1e-9, "domain-error", "static field direction must be unit length");
  const Vec2 b = delta_b(s, p);
  // perpendicular component of (bx, by, 0) w.r.t. the static-field axis
  const double along = b.x * static_field_direction.x + b.y * static_field_direction.y;
  const Vec3 perp{b.x - along * static_field_direction.x, b.y - along * static_field_direction.y,
                  -along * static_field_direction.z};
  return 0.5 * norm3(perp) * spin.gyro_ratio;
}

ModeMetrics mode_volume_star(const FieldMap& map, double f_r, double q_total) {
  require(!map.samples.empty(), "degenerate-map", "field map has no stored samples");
  require(f_r > 0.0, "domain-error", "f_r must be positive");
  require(q_total > 0.0, "domain-error", "Q must be positive");
  require(map.b_max > 0.0, "degenerate-map", "field map is identically zero");

  ModeMetrics m;
  m.b_max = map.b_max;
  const double peak_energy_density = map.b_max * map.b_max / (2.0 * constants::mu0);
  m.v_star = 0.25 * constants::planck * f_r / peak_energy_density;
  m.lambda = constants::speed_of_light / f_r;
  m.v_star_over_lambda3 = m.v_star / (m.lambda * m.lambda * m.lambda);
  m.q_reference = q_total;
  m.f_p_max = purcell_factor(m, q_total, 1.0);
  return m;
}

double purcell_factor(const ModeMetrics& metrics, double q, double f_norm) {
  require(q > 0.0, "domain-error", "Q must be positive");
  require(f_norm >= 0.0 && f_norm <= 1.0, "domain-error", "f_norm must lie in [0, 1]");
  require(metrics.v_star_over_lambda3 > 0.0, "degenerate-map", "mode metrics not initialized");
  return 3.0 / (4.0 * kPi * kPi) * q / metrics.v_star_over_lambda3 * f_norm * f_norm;
}

double purcell_rate(double g0, double kappa) {
  require(g0 > 0.0 && kappa > 0.0, "domain-error", "g0 and kappa must be positive");
  const double g_ang = 2.0 * kPi * g0;
  return 4.0 * g_ang * g_ang / kappa;
}

}  // namespace ppres::field
