#include "ppres/cli.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ppres/circuit.hpp"
#include "ppres/config.hpp"
#include "ppres/constants.hpp"
#include "ppres/error.hpp"
#include "ppres/field.hpp"
#include "ppres/protocols.hpp"
#include "ppres/spectroscopy.hpp"
#include "ppres/tuning.hpp"
#include "ppres/units.hpp"

namespace ppres::cli {

namespace {

using json = nlohmann::ordered_json;
using units::Dimension;

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr std::uint64_t kDefaultSeed = 12345;

json qty(double value, Dimension dim) {
  json j;
  j["value"] = value;
  j["unit"] = std::string(units::unit_symbol(dim));
  return j;
}

json qty_count(double value) {
  json j;
  j["value"] = value;
  j["unit"] = "1";
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("file-io", "cannot write " + path.string());
  out << text;
  if (!out) fail("file-io", "short write: " + path.string());
}

void write_results(const std::filesystem::path& dir, const json& results) {
  write_file(dir / "results.json", results.dump(2) + "\n");
}

using Schema = std::map<std::string, std::optional<Dimension>>;

config::Config load_config(const RunConfig& rc, const Schema& schema, bool required) {
  config::Config cfg;
  if (rc.config_path) {
    cfg = config::Config::parse_file(*rc.config_path);
  } else if (required) {
    fail("config-parse", "command '" + rc.command + "' requires --config");
  }
  for (const auto& o : rc.overrides) cfg.apply_override(o);
  cfg.validate_against(schema);
  return cfg;
}

// ---------------------------------------------------------------- design --

const Schema kDesignSchema = {
    {"design.capacitor_diameter", Dimension::length},
    {"design.nanowire_length", Dimension::length},
    {"design.nanowire_width", Dimension::length},
    {"design.film_thickness", Dimension::length},
    {"design.dielectric_thickness", Dimension::length},
    {"design.dielectric_epsilon_r", Dimension::dimensionless},
    {"design.sheet_kinetic_inductance", Dimension::inductance},
    {"design.f_r", Dimension::frequency},
    {"design.inductance", Dimension::inductance},
    {"design.impedance", Dimension::impedance},
    {"design.current_zpf", Dimension::current},
    {"design.q_internal", Dimension::dimensionless},
    {"design.q_coupling", Dimension::dimensionless},
    {"design.line_impedance", Dimension::impedance},
    {"field.window_half_width", Dimension::length},
    {"field.window_y_min", Dimension::length},
    {"field.window_y_max", Dimension::length},
    {"field.spacing", Dimension::length},
    {"field.guard", Dimension::length},
    {"field.fiducial_x", Dimension::length},
    {"field.fiducial_y", Dimension::length},
    {"spin.name", std::nullopt},
    {"spin.g_factor", Dimension::dimensionless},
    {"spin.gamma_nr", Dimension::rate},
};

int cmd_design(const RunConfig& rc, std::ostream& human_err) {
  config::Config cfg = load_config(rc, kDesignSchema, true);

  circuit::DeviceDesign design;
  design.capacitor_diameter = cfg.number("design", "capacitor_diameter", Dimension::length);
  design.nanowire_length = cfg.number("design", "nanowire_length", Dimension::length);
  design.nanowire_width = cfg.number("design", "nanowire_width", Dimension::length);
  design.film_thickness = cfg.number("design", "film_thickness", Dimension::length);
  design.dielectric_thickness = cfg.number("design", "dielectric_thickness", Dimension::length);
  design.dielectric_epsilon_r =
      cfg.number_or("design", "dielectric_epsilon_r", Dimension::dimensionless, 11.9);
  design.sheet_kinetic_inductance =
      cfg.number("design", "sheet_kinetic_inductance", Dimension::inductance);
  design.validate();

  circuit::CircuitSpec mode;
  if (cfg.has("design", "f_r")) mode.f_r = cfg.number("design", "f_r", Dimension::frequency);
  if (cfg.has("design", "inductance"))
    mode.inductance = cfg.number("design", "inductance", Dimension::inductance);
  if (cfg.has("design", "impedance"))
    mode.impedance = cfg.number("design", "impedance", Dimension::impedance);
  if (cfg.has("design", "current_zpf"))
    mode.current_zpf = cfg.number("design", "current_zpf", Dimension::current);
  const circuit::CircuitParams params =
      circuit::solve_circuit(mode, circuit::kinetic_inductance(design));

  const double q_i = cfg.number_or("design", "q_internal", Dimension::dimensionless, 2e4);
  const double q_c = cfg.number_or("design", "q_coupling", Dimension::dimensionless, 2e4);
  const circuit::QualityFactors quality = circuit::quality_factors(q_i, q_c, params.f_r);
  const double line_z = cfg.number_or("design", "line_impedance", Dimension::impedance, 50.0);

  field::CrossSection section;
  section.width = design.nanowire_width;
  section.thickness = design.film_thickness;
  section.dielectric_thickness = design.dielectric_thickness;
  section.current_zpf = params.current_zpf;
  section.guard = cfg.number_or("field", "guard", Dimension::length, 5e-9);

  field::Window window = field::default_window(section);
  const double half_width =
      cfg.number_or("field", "window_half_width", Dimension::length, 1e-6);
  window.x_min = -half_width;
  window.x_max = half_width;
  window.y_min = cfg.number_or("field", "window_y_min", Dimension::length, window.y_min);
  window.y_max = cfg.number_or("field", "window_y_max", Dimension::length, window.y_max);
  const double spacing = cfg.number_or("field", "spacing", Dimension::length, 5e-9);

  const field::FieldMap map = field::field_map(section, window, spacing);
  const field::Vec2 fiducial{
      cfg.number_or("field", "fiducial_x", Dimension::length, 0.0),
      cfg.number_or("field", "fiducial_y", Dimension::length, -50e-9)};
  const field::Vec2 b_fid = field::delta_b(section, fiducial);
  const double b_fid_mag = std::hypot(b_fid.x, b_fid.y);

  const field::ModeMetrics metrics = field::mode_volume_star(map, params.f_r, quality.q_total);
  const double f_norm = std::min(b_fid_mag / map.b_max, 1.0);
  const double fp_fiducial = field::purcell_factor(metrics, quality.q_total, f_norm);

  std::vector<field::SpinSpecies> spins{field::free_electron(), field::erbium_cawo4()};
  if (cfg.has("spin", "g_factor")) {
    spins.push_back(field::make_spin(
        cfg.text_or("spin", "name", "custom"),
        cfg.number("spin", "g_factor", Dimension::dimensionless),
        cfg.number_or("spin", "gamma_nr", Dimension::rate, 1.0)));
  }

  json results;
  results["command"] = "design";
  json jc;
  jc["f_r"] = qty(params.f_r, Dimension::frequency);
  jc["inductance"] = qty(params.inductance, Dimension::inductance);
  jc["kinetic_inductance"] = qty(params.kinetic_inductance, Dimension::inductance);
  jc["impedance"] = qty(params.impedance, Dimension::impedance);
  jc["current_zpf"] = qty(params.current_zpf, Dimension::current);
  jc["galvanic_q_c"] = qty_count(circuit::galvanic_coupling_q(params.impedance, line_z));
  results["circuit"] = jc;

  json jq;
  jq["q_internal"] = qty_count(quality.q_internal);
  jq["q_coupling"] = qty_count(quality.q_coupling);
  jq["q_total"] = qty_count(quality.q_total);
  jq["kappa_over_2pi"] = qty(quality.kappa / kTwoPi, Dimension::frequency);
  jq["kappa_c_over_2pi"] = qty(quality.kappa_c / kTwoPi, Dimension::frequency);
  jq["kappa_i_over_2pi"] = qty(quality.kappa_i / kTwoPi, Dimension::frequency);
  results["quality"] = jq;

  json jf;
  jf["fiducial_x"] = qty(fiducial.x, Dimension::length);
  jf["fiducial_y"] = qty(fiducial.y, Dimension::length);
  jf["fiducial_b"] = qty(b_fid_mag, Dimension::magnetic_field);
  jf["b_max"] = qty(map.b_max, Dimension::magnetic_field);
  jf["spacing"] = qty(spacing, Dimension::length);
  jf["stored_samples"] = qty_count(static_cast<double>(map.samples.size()));
  results["field"] = jf;

  json jm;
  jm["v_star"] = qty(metrics.v_star, Dimension::dimensionless);
  jm["v_star"]["unit"] = "m^3";
  jm["v_star_over_lambda3"] = qty_count(metrics.v_star_over_lambda3);
  jm["lambda"] = qty(metrics.lambda, Dimension::length);
  jm["f_p_max"] = qty_count(metrics.f_p_max);
  jm["f_p_fiducial"] = qty_count(fp_fiducial);
  results["mode"] = jm;

  json jspins = json::array();
  for (const auto& spin : spins) {
    const double g0 = field::g0_at(section, fiducial, spin);
    const double rate = field::purcell_rate(g0, quality.kappa);
    json js;
    js["name"] = spin.name;
    js["g_factor"] = qty_count(spin.g_factor);
    js["gyro_ratio"] = qty(spin.gyro_ratio, Dimension::dimensionless);
    js["gyro_ratio"]["unit"] = "Hz/T";
    js["g0"] = qty(g0, Dimension::frequency);
    js["purcell_rate"] = qty(rate, Dimension::rate);
    js["t1_radiative"] = qty(1.0 / rate, Dimension::time);
    jspins.push_back(js);
  }
  results["spins"] = jspins;

  // resolved design echoed back in config form (strict unit suffixes);
  // prefixed units are used only when they reparse to the exact value
  {
    auto quantity = [](double value, const char* pretty, double scale, const char* base) {
      const std::string candidate = csvio::format_double(value / scale) + pretty;
      if (units::parse_quantity(candidate).value == value) return candidate;
      return csvio::format_double(value) + base;
    };
    std::ostringstream cfg_out;
    cfg_out << "[design]\n";
    cfg_out << "capacitor_diameter = " << quantity(design.capacitor_diameter, "um", 1e-6, "m")
            << "\n";
    cfg_out << "nanowire_length = " << quantity(design.nanowire_length, "um", 1e-6, "m") << "\n";
    cfg_out << "nanowire_width = " << quantity(design.nanowire_width, "nm", 1e-9, "m") << "\n";
    cfg_out << "film_thickness = " << quantity(design.film_thickness, "nm", 1e-9, "m") << "\n";
    cfg_out << "dielectric_thickness = "
            << quantity(design.dielectric_thickness, "nm", 1e-9, "m") << "\n";
    cfg_out << "dielectric_epsilon_r = " << csvio::format_double(design.dielectric_epsilon_r)
            << "\n";
    cfg_out << "sheet_kinetic_inductance = "
            << quantity(design.sheet_kinetic_inductance, "pH", 1e-12, "H") << "\n";
    cfg_out << "f_r = " << quantity(params.f_r, "GHz", 1e9, "Hz") << "\n";
    cfg_out << "inductance = " << quantity(params.inductance, "pH", 1e-12, "H") << "\n";
    // derived mode quantities, kept as comments so the file stays loadable
    cfg_out << "# impedance = " << csvio::format_double(params.impedance) << "ohm\n";
    cfg_out << "# current_zpf = " << quantity(params.current_zpf, "nA", 1e-9, "A") << "\n";
    cfg_out << "q_internal = " << csvio::format_double(quality.q_internal) << "\n";
    cfg_out << "q_coupling = " << csvio::format_double(quality.q_coupling) << "\n";
    write_file(rc.output_dir / "design_resolved.cfg", cfg_out.str());
  }

  // field map artifacts
  csvio::Table table;
  table.columns = {"x_m", "y_m", "bx_t", "by_t", "b_t"};
  table.data.resize(5);
  for (const auto& s : map.samples) {
    table.data[0].push_back(s.x);
    table.data[1].push_back(s.y);
    table.data[2].push_back(s.bx);
    table.data[3].push_back(s.by);
    table.data[4].push_back(s.magnitude());
  }
  csvio::write_table(rc.output_dir / "field_map.csv", table);

  PlotSpec plot;
  plot.kind = "heatmap";
  plot.title = "Magnetic zero-point field";
  plot.x_column = "x_m";
  plot.y_column = "y_m";
  plot.value_column = "b_t";
  plot.y_label = "y (m)";
  plot.x_label = "x (m)";
  emit_plot(plot, table, rc.output_dir / "field_map.svg");

  write_results(rc.output_dir, results);
  human_err << "design: wrote results.json, field_map.csv, field_map.svg\n";
  return 0;
}

// ------------------------------------------------------------------- fit --

const Schema kFitSchema = {};

int cmd_fit(const RunConfig& rc, std::ostream& human_err) {
  load_config(rc, kFitSchema, false);
  require(!rc.inputs.empty(), "config-parse", "fit requires at least one trace CSV input");

  json results;
  results["command"] = "fit";
  json traces = json::array();
  int index = 0;
  for (const auto& input : rc.inputs) {
    const spectroscopy::ComplexTrace raw = csvio::read_trace(input);
    auto [corrected, background] = spectroscopy::deembed(raw);
    const spectroscopy::ResonanceFit fit = spectroscopy::fit_resonance(corrected);

    json jt;
    jt["input"] = input.string();
    jt["f_r"] = qty(fit.f_r, Dimension::frequency);
    jt["Q_i"] = qty_count(fit.q_internal);
    jt["Q_c"] = qty_count(fit.q_coupling);
    jt["residual_rms"] = qty_count(fit.residual_rms);
    json ju;
    ju["f_r"] = qty(fit.standard_error.f_r, Dimension::frequency);
    ju["Q_i"] = qty_count(fit.standard_error.q_internal);
    ju["Q_c"] = qty_count(fit.standard_error.q_coupling);
    jt["uncertainties"] = ju;
    json jd;
    jd["a"] = qty_count(background.amplitude);
    jd["phi0"] = qty(background.phase_offset, Dimension::angle);
    jd["tau"] = qty(background.electrical_delay, Dimension::time);
    jt["deembed"] = jd;
    traces.push_back(jt);

    const std::string stem = "trace" + std::to_string(index);
    csvio::write_trace(rc.output_dir / (stem + "_corrected.csv"), corrected);

    csvio::Table table;
    table.columns = {"freq_hz", "s11_abs_data", "s11_abs_model"};
    table.data.resize(3);
    for (std::size_t i = 0; i < corrected.frequency.size(); ++i) {
      const double f = corrected.frequency[i];
      table.data[0].push_back(f);
      table.data[1].push_back(std::abs(corrected.s11[i]));
      table.data[2].push_back(
          std::abs(spectroscopy::model_s11(f, fit.f_r, fit.kappa_c(), fit.kappa_i())));
    }
    PlotSpec plot;
    plot.kind = "line";
    plot.title = "Reflection fit";
    plot.x_column = "freq_hz";
    plot.y_columns = {"s11_abs_data", "s11_abs_model"};
    plot.x_label = "frequency (Hz)";
    plot.y_label = "|S11|";
    emit_plot(plot, table, rc.output_dir / (stem + "_fit.svg"));
    ++index;
  }
  results["traces"] = traces;
  write_results(rc.output_dir, results);
  human_err << "fit: processed " << rc.inputs.size() << " trace(s)\n";
  return 0;
}

// ------------------------------------------------------------------ tune --

const Schema kTuneSchema = {};

int cmd_tune(const RunConfig& rc, std::ostream& human_err) {
  load_config(rc, kTuneSchema, false);
  require(rc.inputs.size() == 1, "config-parse", "tune requires exactly one sweep CSV input");
  const std::vector<tuning::FieldSweepRecord> records = csvio::read_sweep(rc.inputs[0]);

  std::vector<tuning::FieldSweepRecord> up, down;
  for (const auto& r : records) {
    (r.direction == tuning::SweepDirection::ramp_up ? up : down).push_back(r);
  }
  const std::vector<tuning::FieldSweepRecord>& primary = up.empty() ? down : up;
  const tuning::QuadraticTuneFit fit = tuning::fit_quadratic_tuning(primary);

  json results;
  results["command"] = "tune";
  json jf;
  jf["f_r0"] = qty(fit.f_r0, Dimension::frequency);
  jf["a_coeff"] = qty_count(fit.a_coeff);
  jf["a_coeff"]["unit"] = "1/T^2";
  jf["residual_rms"] = qty(fit.residual_rms, Dimension::frequency);
  results["quadratic_fit"] = jf;

  double b_hi = 0.0;
  for (const auto& r : records) b_hi = std::max(b_hi, r.field);
  results["predicted_detuning_at_max_field"] =
      qty(tuning::predict_detuning(fit, b_hi), Dimension::frequency);

  // Q_i(B) is reported descriptively, not modeled
  {
    double q_lo = std::numeric_limits<double>::infinity(), q_hi = 0.0, q_sum = 0.0;
    std::size_t q_n = 0;
    for (const auto& r : records) {
      if (!r.q_internal) continue;
      q_lo = std::min(q_lo, *r.q_internal);
      q_hi = std::max(q_hi, *r.q_internal);
      q_sum += *r.q_internal;
      ++q_n;
    }
    if (q_n > 0) {
      json jq;
      jq["count"] = qty_count(static_cast<double>(q_n));
      jq["min"] = qty_count(q_lo);
      jq["max"] = qty_count(q_hi);
      jq["mean"] = qty_count(q_sum / static_cast<double>(q_n));
      results["q_internal_stats"] = jq;
    }
  }

  json events = json::array();
  if (!up.empty() && !down.empty()) {
    const tuning::HysteresisReport hysteresis = tuning::hysteresis_metric(up, down);
    results["hysteresis_max_delta_f"] = qty(hysteresis.max_delta_f, Dimension::frequency);
    for (const auto& e : hysteresis.events) {
      json je;
      je["field"] = qty(e.field, Dimension::magnetic_field);
      je["delta_f"] = qty(e.delta_f, Dimension::frequency);
      je["direction"] = e.direction == tuning::SweepDirection::ramp_up ? "up" : "down";
      events.push_back(je);
    }
  } else {
    std::vector<tuning::FieldSweepRecord> sorted = primary;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.field < b.field; });
    for (std::size_t i : tuning::detect_jumps(sorted)) {
      json je;
      je["field"] = qty(sorted[i + 1].field, Dimension::magnetic_field);
      je["direction"] = sorted[i + 1].direction == tuning::SweepDirection::ramp_up ? "up" : "down";
      events.push_back(je);
    }
  }
  results["vortex_events"] = events;

  // predicted curve and overlay plot
  csvio::Table table;
  table.columns = {"b_tesla", "f_r_data_hz", "f_r_model_hz"};
  table.data.resize(3);
  for (const auto& r : primary) {
    table.data[0].push_back(r.field);
    table.data[1].push_back(r.f_r);
    table.data[2].push_back(fit.f_r0 + tuning::predict_detuning(fit, r.field));
  }
  csvio::write_table(rc.output_dir / "tuning.csv", table);

  PlotSpec plot;
  plot.kind = "line";
  plot.title = "Field tuning";
  plot.x_column = "b_tesla";
  plot.y_columns = {"f_r_data_hz", "f_r_model_hz"};
  plot.x_label = "|B| (T)";
  plot.y_label = "f_r (Hz)";
  emit_plot(plot, table, rc.output_dir / "tuning.svg");

  write_results(rc.output_dir, results);
  human_err << "tune: fitted " << primary.size() << " records\n";
  return 0;
}

// -------------------------------------------------------- protocol-count --

const Schema kCountSchema = {
    {"photon-counting.t1", Dimension::time},
    {"photon-counting.efficiency", Dimension::dimensionless},
    {"photon-counting.dark_rate", Dimension::rate},
    {"photon-counting.snr_target", Dimension::dimensionless},
    {"photon-counting.mc_trials", Dimension::dimensionless},
    {"photon-counting.t1_min", Dimension::time},
    {"photon-counting.t1_max", Dimension::time},
    {"photon-counting.dark_rates", std::nullopt},  // list of rates
};

int cmd_protocol_count(const RunConfig& rc, std::ostream& human_err) {
  config::Config cfg = load_config(rc, kCountSchema, true);

  protocols::PhotonCountingScenario scenario;
  scenario.t1 = cfg.number("photon-counting", "t1", Dimension::time);
  scenario.efficiency = cfg.number("photon-counting", "efficiency", Dimension::dimensionless);
  scenario.dark_rate = cfg.number("photon-counting", "dark_rate", Dimension::rate);
  scenario.snr_target =
      cfg.number_or("photon-counting", "snr_target", Dimension::dimensionless, 2.0);
  scenario.validate();

  const double tau_required = protocols::pc_integration_time(scenario);
  const std::size_t trials = static_cast<std::size_t>(
      cfg.number_or("photon-counting", "mc_trials", Dimension::dimensionless, 20000));
  const protocols::McEstimate mc = protocols::mc_photon_counting(
      scenario, tau_required, trials, rc.seed.value_or(kDefaultSeed));

  json results;
  results["command"] = "protocol-count";
  results["tau_m_required"] = qty(tau_required, Dimension::time);
  results["snr_target"] = qty_count(scenario.snr_target);
  results["regime"] = protocols::to_string(protocols::pc_regime(scenario));
  json jmc;
  jmc["snr"] = qty_count(mc.snr);
  jmc["std_error"] = qty_count(mc.std_error);
  jmc["trials"] = qty_count(static_cast<double>(mc.trials));
  jmc["seed"] = qty_count(static_cast<double>(rc.seed.value_or(kDefaultSeed)));
  results["monte_carlo"] = jmc;

  // integration-time map over T1 for a few dark-count rates
  const double t1_min = cfg.number_or("photon-counting", "t1_min", Dimension::time, 1e-6);
  const double t1_max = cfg.number_or("photon-counting", "t1_max", Dimension::time, 1e-2);
  std::vector<double> alphas{0.0, 10.0, 100.0, 1000.0};
  if (cfg.has("photon-counting", "dark_rates")) {
    alphas = cfg.number_list("photon-counting", "dark_rates", Dimension::rate);
  }

  csvio::Table table;
  table.columns = {"t1_s"};
  for (double a : alphas) table.columns.push_back("tau_alpha_" + csvio::format_double(a));
  table.data.resize(table.columns.size());
  const int n_grid = 60;
  for (int i = 0; i < n_grid; ++i) {
    const double t1 =
        t1_min * std::pow(t1_max / t1_min, static_cast<double>(i) / (n_grid - 1));
    table.data[0].push_back(t1);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      protocols::PhotonCountingScenario s = scenario;
      s.t1 = t1;
      s.dark_rate = alphas[a];
      table.data[a + 1].push_back(protocols::pc_integration_time(s));
    }
  }
  csvio::write_table(rc.output_dir / "integration_time.csv", table);

  PlotSpec plot;
  plot.kind = "loglog";
  plot.title = "Integration time to SNR " + csvio::format_double(scenario.snr_target);
  plot.x_column = "t1_s";
  for (std::size_t a = 0; a < alphas.size(); ++a) plot.y_columns.push_back(table.columns[a + 1]);
  plot.x_label = "T1 (s)";
  plot.y_label = "tau_m (s)";
  {
    // regime guides: slope 1 (shot noise) and slope 2 (dark counts)
    const double r2 = scenario.snr_target / scenario.efficiency;
    const double shot = r2 * r2 * scenario.efficiency * (1.0 - scenario.efficiency);
    svg::GuideLine g1{1.0, 1e-4, shot * 1e-4, "slope 1"};
    const double alpha_ref = scenario.dark_rate > 0.0 ? scenario.dark_rate : 100.0;
    svg::GuideLine g2{2.0, 1e-4, r2 * r2 * 2.0 * alpha_ref * 1e-8, "slope 2"};
    plot.guides = {g1, g2};
  }
  emit_plot(plot, table, rc.output_dir / "integration_time.svg");

  write_results(rc.output_dir, results);
  human_err << "protocol-count: tau_m = " << tau_required << " s ("
            << protocols::to_string(protocols::pc_regime(scenario)) << ")\n";
  return 0;
}

// --------------------------------------------------- protocol-dispersive --

const Schema kDispersiveSchema = {
    {"dispersive.g0", Dimension::frequency},
    {"dispersive.f_r", Dimension::frequency},
    {"dispersive.q_total", Dimension::dimensionless},
    {"dispersive.q_internal", Dimension::dimensionless},
    {"dispersive.q_coupling", Dimension::dimensionless},
    {"dispersive.efficiency", Dimension::dimensionless},
    {"dispersive.gamma_nr", Dimension::rate},
    {"dispersive.n_crit_safety", Dimension::dimensionless},
    {"dispersive.delta_grid", std::nullopt},  // list of frequencies (Delta/2pi)
    {"dispersive.mc_delta", Dimension::frequency},
    {"dispersive.mc_tau", Dimension::time},
    {"dispersive.mc_trials", Dimension::dimensionless},
};

int cmd_protocol_dispersive(const RunConfig& rc, std::ostream& human_err) {
  config::Config cfg = load_config(rc, kDispersiveSchema, true);

  protocols::DispersiveScenario scenario;
  const double g0 = cfg.number("dispersive", "g0", Dimension::frequency);
  const double f_r = cfg.number("dispersive", "f_r", Dimension::frequency);
  const double eta = cfg.number_or("dispersive", "efficiency", Dimension::dimensionless, 0.3);
  const double gamma = cfg.number_or("dispersive", "gamma_nr", Dimension::rate, 1.0);
  if (cfg.has("dispersive", "q_internal") || cfg.has("dispersive", "q_coupling")) {
    const double q_i = cfg.number("dispersive", "q_internal", Dimension::dimensionless);
    const double q_c = cfg.number("dispersive", "q_coupling", Dimension::dimensionless);
    const circuit::QualityFactors q = circuit::quality_factors(q_i, q_c, f_r);
    scenario.g0 = g0;
    scenario.f_r = f_r;
    scenario.efficiency = eta;
    scenario.gamma_nr = gamma;
    scenario.kappa_c = q.kappa_c;
    scenario.kappa_i = q.kappa_i;
  } else {
    const double q_total = cfg.number_or("dispersive", "q_total", Dimension::dimensionless, 1e4);
    scenario = protocols::critically_coupled(g0, q_total, f_r, eta, gamma);
  }
  scenario.n_crit_safety =
      cfg.number_or("dispersive", "n_crit_safety", Dimension::dimensionless, 2.0);
  scenario.validate();

  std::vector<double> delta_grid;  // rad/s
  if (cfg.has("dispersive", "delta_grid")) {
    for (double f : cfg.number_list("dispersive", "delta_grid", Dimension::frequency)) {
      delta_grid.push_back(kTwoPi * f);
    }
  } else {
    for (double mhz : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
      delta_grid.push_back(kTwoPi * mhz * 1e6);
    }
  }

  const std::vector<protocols::ReadoutOptimum> table_rows =
      protocols::optimize_readout(scenario, delta_grid);

  json results;
  results["command"] = "protocol-dispersive";
  json rows = json::array();
  double best_f = 0.0;
  for (const auto& r : table_rows) {
    json jr;
    jr["delta"] = qty(r.delta, Dimension::rate);
    jr["delta"]["unit"] = "rad/s";
    jr["delta_over_2pi"] = qty(r.delta / kTwoPi, Dimension::frequency);
    if (r.ok) {
      jr["n_bar"] = qty_count(r.n_bar);
      jr["tau_m_opt"] = qty(r.tau_m, Dimension::time);
      jr["T1"] = qty(r.t1, Dimension::time);
      jr["F"] = qty_count(r.fidelity);
      jr["F_r"] = qty_count(r.readout_fidelity);
      jr["P_e"] = qty_count(r.excited_population);
      jr["power_dbm"] = qty(r.power_dbm, Dimension::power_dbm);
      best_f = std::max(best_f, r.fidelity);
    } else {
      jr["error"] = r.error;
    }
    rows.push_back(jr);
  }
  results["per_detuning"] = rows;
  results["max_fidelity"] = qty_count(best_f);

  if (cfg.has("dispersive", "mc_delta")) {
    const double delta = kTwoPi * cfg.number("dispersive", "mc_delta", Dimension::frequency);
    const double tau = cfg.number_or("dispersive", "mc_tau", Dimension::time, 5e-3);
    const std::size_t trials = static_cast<std::size_t>(
        cfg.number_or("dispersive", "mc_trials", Dimension::dimensionless, 20000));
    const protocols::McEstimate mc =
        protocols::mc_dispersive(scenario, delta, tau, trials, rc.seed.value_or(kDefaultSeed));
    const protocols::SnrResult analytic = protocols::dispersive_snr(scenario, delta, tau);
    json jmc;
    jmc["delta_over_2pi"] = qty(delta / kTwoPi, Dimension::frequency);
    jmc["tau_m"] = qty(tau, Dimension::time);
    jmc["snr_mc"] = qty_count(mc.snr);
    jmc["snr_analytic"] = qty_count(analytic.value);
    jmc["std_error"] = qty_count(mc.std_error);
    jmc["trials"] = qty_count(static_cast<double>(mc.trials));
    results["monte_carlo"] = jmc;
  }

  csvio::Table table;
  table.columns = {"delta_over_2pi_hz", "n_bar",           "tau_m_opt_s",
                   "t1_s",              "fidelity",        "readout_fidelity",
                   "excited_population", "power_dbm"};
  table.data.resize(8);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : table_rows) {
    table.data[0].push_back(r.delta / kTwoPi);
    table.data[1].push_back(r.ok ? r.n_bar : nan);
    table.data[2].push_back(r.ok ? r.tau_m : nan);
    table.data[3].push_back(r.ok ? r.t1 : nan);
    table.data[4].push_back(r.ok ? r.fidelity : nan);
    table.data[5].push_back(r.ok ? r.readout_fidelity : nan);
    table.data[6].push_back(r.ok ? r.excited_population : nan);
    table.data[7].push_back(r.ok ? r.power_dbm : nan);
  }
  csvio::write_table(rc.output_dir / "dispersive.csv", table);

  PlotSpec plot;
  plot.kind = "line";
  plot.title = "Dispersive readout fidelity";
  plot.x_column = "delta_over_2pi_hz";
  plot.y_columns = {"fidelity", "readout_fidelity", "excited_population"};
  plot.x_label = "Delta / 2pi (Hz)";
  plot.y_label = "fidelity";
  emit_plot(plot, table, rc.output_dir / "dispersive.svg");

  write_results(rc.output_dir, results);
  human_err << "protocol-dispersive: max fidelity " << best_f << "\n";
  return 0;
}

// -------------------------------------------------------------- simulate --

const Schema kSimulateSchema = {
    {"simulate.kind", std::nullopt},
    {"simulate.f_r", Dimension::frequency},
    {"simulate.q_internal", Dimension::dimensionless},
    {"simulate.q_coupling", Dimension::dimensionless},
    {"simulate.amplitude", Dimension::dimensionless},
    {"simulate.phase_offset", Dimension::angle},
    {"simulate.electrical_delay", Dimension::time},
    {"simulate.noise_sigma", Dimension::dimensionless},
    {"simulate.n_points", Dimension::dimensionless},
    {"simulate.span_linewidths", Dimension::dimensionless},
    {"simulate.f_r0", Dimension::frequency},
    {"simulate.a_coeff", Dimension::dimensionless},
    {"simulate.b_max", Dimension::magnetic_field},
    {"simulate.noise_sigma_f", Dimension::frequency},
    {"simulate.jump_field", Dimension::magnetic_field},
    {"simulate.jump_delta_f", Dimension::frequency},
    {"simulate.directions", std::nullopt},
};

int cmd_simulate(const RunConfig& rc, std::ostream& human_err) {
  config::Config cfg = load_config(rc, kSimulateSchema, true);
  const std::string kind = cfg.text_or("simulate", "kind", "trace");
  const std::uint64_t seed = rc.seed.value_or(kDefaultSeed);

  json results;
  results["command"] = "simulate";
  results["kind"] = kind;
  results["seed"] = qty_count(static_cast<double>(seed));

  if (kind == "trace") {
    spectroscopy::SynthParams params;
    params.f_r = cfg.number_or("simulate", "f_r", Dimension::frequency, 7.5e9);
    params.q_internal = cfg.number_or("simulate", "q_internal", Dimension::dimensionless, 2e4);
    params.q_coupling = cfg.number_or("simulate", "q_coupling", Dimension::dimensionless, 1e4);
    params.n_points = static_cast<std::size_t>(
        cfg.number_or("simulate", "n_points", Dimension::dimensionless, 401));
    params.span_linewidths =
        cfg.number_or("simulate", "span_linewidths", Dimension::dimensionless, 10.0);
    spectroscopy::DeembedParams background;
    background.amplitude = cfg.number_or("simulate", "amplitude", Dimension::dimensionless, 1.0);
    background.phase_offset = cfg.number_or("simulate", "phase_offset", Dimension::angle, 0.0);
    background.electrical_delay =
        cfg.number_or("simulate", "electrical_delay", Dimension::time, 0.0);
    const double sigma = cfg.number_or("simulate", "noise_sigma", Dimension::dimensionless, 0.0);

    const spectroscopy::ComplexTrace trace =
        spectroscopy::synthesize_trace(params, background, sigma, seed);
    csvio::write_trace(rc.output_dir / "trace.csv", trace);
    results["output"] = "trace.csv";
    results["points"] = qty_count(static_cast<double>(trace.frequency.size()));
  } else if (kind == "sweep") {
    const double f_r0 = cfg.number_or("simulate", "f_r0", Dimension::frequency, 7.48e9);
    const double a = cfg.number_or("simulate", "a_coeff", Dimension::dimensionless, 0.0652);
    const double b_max = cfg.number_or("simulate", "b_max", Dimension::magnetic_field, 0.5);
    const std::size_t n = static_cast<std::size_t>(
        cfg.number_or("simulate", "n_points", Dimension::dimensionless, 20));
    const double sigma_f = cfg.number_or("simulate", "noise_sigma_f", Dimension::frequency, 0.0);
    const std::string directions = cfg.text_or("simulate", "directions", "up");
    require(n >= 4, "config-parse", "sweep needs at least 4 points");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<tuning::FieldSweepRecord> records;
    auto emit_branch = [&](tuning::SweepDirection dir) {
      for (std::size_t i = 0; i < n; ++i) {
        tuning::FieldSweepRecord r;
        r.field = b_max * static_cast<double>(i) / static_cast<double>(n - 1);
        r.f_r = f_r0 * (1.0 - a * r.field * r.field);
        if (cfg.has("simulate", "jump_field") &&
            r.field >= cfg.number("simulate", "jump_field", Dimension::magnetic_field)) {
          r.f_r += cfg.number_or("simulate", "jump_delta_f", Dimension::frequency, -2e6);
        }
        if (sigma_f > 0.0) r.f_r += sigma_f * gauss(rng);
        r.direction = dir;
        records.push_back(r);
      }
    };
    emit_branch(tuning::SweepDirection::ramp_up);
    if (directions == "both") emit_branch(tuning::SweepDirection::ramp_down);
    csvio::write_sweep(rc.output_dir / "sweep.csv", records);
    results["output"] = "sweep.csv";
    results["points"] = qty_count(static_cast<double>(records.size()));
  } else {
    fail("config-parse", "simulate.kind must be trace or sweep, got '" + kind + "'");
  }

  write_results(rc.output_dir, results);
  human_err << "simulate: wrote " << results["output"].get<std::string>() << "\n";
  return 0;
}

int exit_code_for(const std::string& code) {
  if (code == "file-io") return 3;
  if (code == "config-parse" || code == "unknown-key" || code == "schema-mismatch" ||
      code == "unit-parse" || code == "unit-mismatch") {
    return 2;
  }
  return 4;
}

}  // namespace

void emit_plot(const PlotSpec& spec, const csvio::Table& table,
               const std::filesystem::path& path) {
  auto column = [&](const std::string& name) -> const std::vector<double>& {
    const int idx = table.column_index(name);
    if (idx < 0) fail("missing-series", "plot references unknown column '" + name + "'");
    return table.data[static_cast<std::size_t>(idx)];
  };

  if (spec.kind == "heatmap") {
    const std::vector<double>& xs = column(spec.x_column);
    const std::vector<double>& ys = column(spec.y_column);
    const std::vector<double>& vs = column(spec.value_column);
    std::set<double> ux(xs.begin(), xs.end());
    std::set<double> uy(ys.begin(), ys.end());
    // stride dense grids down to a drawable cell count
    auto strided = [](const std::set<double>& s) {
      const std::size_t max_cells = 120;
      const std::size_t step = s.size() / max_cells + 1;
      std::vector<double> out;
      std::size_t i = 0;
      for (double v : s) {
        if (i++ % step == 0) out.push_back(v);
      }
      return out;
    };
    svg::Heatmap map;
    map.title = spec.title;
    map.x_label = spec.x_label;
    map.y_label = spec.y_label.empty() ? "y" : spec.y_label;
    map.value_label = spec.value_column;
    map.xs = strided(ux);
    map.ys = strided(uy);
    map.values.assign(map.xs.size() * map.ys.size(), std::numeric_limits<double>::quiet_NaN());
    auto index_of = [](const std::vector<double>& sorted, double v) -> std::ptrdiff_t {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
      if (it == sorted.end() || *it != v) return -1;
      return it - sorted.begin();
    };
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::ptrdiff_t ix = index_of(map.xs, xs[i]);
      const std::ptrdiff_t iy = index_of(map.ys, ys[i]);
      if (ix < 0 || iy < 0) continue;
      map.values[static_cast<std::size_t>(iy) * map.xs.size() + static_cast<std::size_t>(ix)] =
          vs[i];
    }
    write_file(path, svg::render(map));
    return;
  }

  svg::LinePlot plot;
  plot.title = spec.title;
  plot.x_label = spec.x_label;
  plot.y_label = spec.y_label;
  if (spec.kind == "loglog") {
    plot.x_scale = svg::AxisScale::log10;
    plot.y_scale = svg::AxisScale::log10;
  } else {
    require(spec.kind == "line", "config-parse", "plot kind must be line, loglog or heatmap");
  }
  plot.guides = spec.guides;
  const std::vector<double>& xs = column(spec.x_column);
  for (const auto& name : spec.y_columns) {
    const std::vector<double>& ys = column(name);
    bool any_finite = false;
    for (double v : ys) {
      if (std::isfinite(v)) {
        any_finite = true;
        break;
      }
    }
    if (!any_finite) continue;  // empty optional series: omitted
    svg::Series s;
    s.label = name;
    s.x = xs;
    s.y = ys;
    plot.series.push_back(std::move(s));
  }
  write_file(path, svg::render(plot));
}

int run(const RunConfig& config, std::ostream& machine_out, std::ostream& human_err) {
  try {
    require(!config.command.empty(), "config-parse", "no command given");
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    require(!ec, "file-io", "cannot create output directory " + config.output_dir.string());

    int code = -1;
    if (config.command == "design") code = cmd_design(config, human_err);
    else if (config.command == "fit") code = cmd_fit(config, human_err);
    else if (config.command == "tune") code = cmd_tune(config, human_err);
    else if (config.command == "protocol-count") code = cmd_protocol_count(config, human_err);
    else if (config.command == "protocol-dispersive")
      code = cmd_protocol_dispersive(config, human_err);
    else if (config.command == "simulate") code = cmd_simulate(config, human_err);
    else fail("config-parse", "unknown command '" + config.command + "'");
    if (code == 0) {
      json ok;
      ok["status"] = "ok";
      ok["results"] = (config.output_dir / "results.json").string();
      machine_out << ok.dump() << "\n";
    }
    return code;
  } catch (const Error& e) {
    json err;
    err["status"] = "error";
    err["code"] = e.code();
    err["message"] = e.what();
    machine_out << err.dump() << "\n";
    human_err << "error (" << e.code() << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    json err;
    err["status"] = "error";
    err["code"] = "internal";
    err["message"] = e.what();
    machine_out << err.dump() << "\n";
    human_err << "internal error: " << e.what() << "\n";
    return 5;
  }
}

int run(const RunConfig& config) { return run(config, std::cout, std::cerr); }

}  // namespace ppres::cli
