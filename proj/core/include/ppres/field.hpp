#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace ppres::field {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// 2D cross-section through the nanowire. Coordinates: the strip spans
// x in [-w/2, w/2]; the film occupies y in [0, t]; the substrate is y < 0;
// the counter-electrode surface sits at y = t + d. The strip current is
// collapsed to a uniform zero-thickness sheet at y = t/2 carrying +delta_I;
// its opposite-sign image (mirror in the counter-electrode surface) sits at
// y = 2(t+d) - t/2.
struct CrossSection {
  double width = 0.0;                 // m
  double thickness = 0.0;             // m
  double dielectric_thickness = 0.0;  // m
  double current_zpf = 0.0;           // A
  double guard = 5e-9;                // m, hard floor for point evaluation

  void validate() const;

  double sheet_height() const { return 0.5 * thickness; }
  double image_height() const { return 2.0 * (thickness + dielectric_thickness) - 0.5 * thickness; }

  // Grid exclusion radius around each sheet. The collapsed-sheet field is
  // not meaningful inside the physical film envelope, so the mask extends
  // half a film thickness beyond the sheet plus the guard.
  double mask_radius() const { return 0.5 * thickness + guard; }
};

// Field of a single uniform-surface-current sheet of the given width,
// centered on x = 0 at height sheet_y, carrying `current` (A) out of the
// plane. Closed form (arctangent / logarithm).
Vec2 sheet_field(double current, double width, double sheet_y, Vec2 p);

// Distance from p to the sheet segment at height sheet_y.
double sheet_distance(const CrossSection& s, Vec2 p, double sheet_y);

// Zero-point magnetic field at p: strip sheet plus opposite-sign image.
// Throws Error("guard-zone") when p is closer than `guard` to either sheet.
Vec2 delta_b(const CrossSection& s, Vec2 p);

struct Window {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
};

// +-1 um horizontally, substrate depth 0.5 um up to the counter-electrode.
Window default_window(const CrossSection& s);

struct FieldSample {
  double x = 0.0, y = 0.0;
  double bx = 0.0, by = 0.0;
  double magnitude() const;
};

// Sampled zero-point field map. Points inside the exclusion zone (closer
// than mask_radius() to either sheet) are not stored. b_max caches the
// maximum magnitude over stored samples.
struct FieldMap {
  std::vector<FieldSample> samples;  // row-major in (y, x), exclusions dropped
  double spacing = 0.0;
  Window window;
  std::size_t nx = 0, ny = 0;
  double b_max = 0.0;
};

FieldMap field_map(const CrossSection& s, const Window& window, double spacing);

struct SpinSpecies {
  std::string name;
  double g_factor = 2.0;
  double gyro_ratio = 0.0;        // Hz/T, = g * mu_B / h
  double nonradiative_rate = 0.0; // 1/s
  Vec3 quantization_axis{0.0, 0.0, 1.0};

  void validate() const;
};

SpinSpecies make_spin(std::string name, double g_factor, double nonradiative_rate);
SpinSpecies free_electron();  // g = 2.0023
SpinSpecies erbium_cawo4();   // g = 8.38, gamma = 1/s

// Spin-resonator coupling at a point: g0 = (1/2) * |dB_perp| * gyro_ratio,
// with dB_perp the field component perpendicular to the static-field
// direction. The default direction along the wire axis (out of plane)
// makes the whole in-plane field perpendicular.
double g0_at(const CrossSection& s, Vec2 p, const SpinSpecies& spin,
             Vec3 static_field_direction = Vec3{0.0, 0.0, 1.0});

struct ModeMetrics {
  double v_star = 0.0;                // m^3
  double v_star_over_lambda3 = 0.0;
  double lambda = 0.0;                // m
  double f_p_max = 0.0;               // Purcell factor at |f| = 1
  double q_reference = 0.0;           // Q used for f_p_max
  double b_max = 0.0;                 // T, normalization field
};

// Mode volume from the inductive zero-point energy (h f_r / 4) over the peak
// sampled field energy density.
ModeMetrics mode_volume_star(const FieldMap& map, double f_r, double q_total = 1e4);

// F_P = (3 / 4 pi^2) * Q / (V*/lambda^3) * f_norm^2
double purcell_factor(const ModeMetrics& metrics, double q, double f_norm);

// Resonant emission rate: Gamma_P = 4 (2 pi g0)^2 / kappa. g0 in Hz,
// kappa in rad/s.
double purcell_rate(double g0, double kappa);

}  // namespace ppres::field
