#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ppres/cli.hpp"
#include "ppres/error.hpp"

using namespace ppres;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "ppres_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kDesignConfig =
    "[design]\n"
    "capacitor_diameter = 825um\n"
    "nanowire_length = 10um\n"
    "nanowire_width = 300nm\n"
    "film_thickness = 50nm\n"
    "dielectric_thickness = 500nm\n"
    "dielectric_epsilon_r = 11.9\n"
    "sheet_kinetic_inductance = 0.2pH\n"
    "f_r = 7.5GHz\n"
    "inductance = 15.9327178058248pH\n"
    "q_internal = 2e4\n"
    "q_coupling = 2e4\n";

int run_cli(const std::string& command, const fs::path& out_dir,
            const std::optional<fs::path>& config, const std::vector<fs::path>& inputs,
            std::string* machine = nullptr, std::uint64_t seed = 12345,
            const std::vector<std::string>& overrides = {}) {
  cli::RunConfig rc;
  rc.command = command;
  rc.output_dir = out_dir;
  rc.config_path = config;
  rc.inputs = inputs;
  rc.seed = seed;
  rc.overrides = overrides;
  std::ostringstream mach, human;
  const int code = cli::run(rc, mach, human);
  if (machine != nullptr) *machine = mach.str();
  return code;
}

// every numeric leaf carries {"value": ..., "unit": ...}
void check_units(const json& node) {
  if (node.is_number()) {
    FAIL_CHECK("bare number in results.json");
    return;
  }
  if (node.is_object()) {
    if (node.contains("value")) {
      CHECK(node.contains("unit"));
      return;
    }
    for (const auto& [k, v] : node.items()) check_units(v);
  } else if (node.is_array()) {
    for (const auto& v : node) check_units(v);
  }
}

}  // namespace

TEST_CASE("design command reproduces the reference numbers") {
  const fs::path dir = scratch("design");
  write(dir / "design.cfg", kDesignConfig);
  std::string machine;
  const int code = run_cli("design", dir / "out", dir / "design.cfg", {}, &machine);
  REQUIRE(code == 0);
  CHECK(machine.find("\"status\":\"ok\"") != std::string::npos);

  const json r = json::parse(slurp(dir / "out" / "results.json"));
  CHECK(r["circuit"]["current_zpf"]["value"].get<double>() ==
        doctest::Approx(394.9e-9).epsilon(5e-3));
  CHECK(r["circuit"]["galvanic_q_c"]["value"].get<double>() ==
        doctest::Approx(66.6).epsilon(5e-3));
  CHECK(r["mode"]["f_p_fiducial"]["value"].get<double>() ==
        doctest::Approx(4.07e15).epsilon(0.5));
  bool saw_er = false;
  for (const auto& spin : r["spins"]) {
    if (spin["name"] == "er_cawo4") {
      saw_er = true;
      CHECK(spin["g0"]["value"].get<double>() == doctest::Approx(30.0e3).epsilon(0.10));
    }
  }
  CHECK(saw_er);
  check_units(r);

  CHECK(fs::exists(dir / "out" / "field_map.csv"));
  CHECK(fs::exists(dir / "out" / "field_map.svg"));
  const std::string svg = slurp(dir / "out" / "field_map.svg");
  CHECK(svg.find("<svg") != std::string::npos);

  // the resolved design echo is itself a loadable design config
  REQUIRE(fs::exists(dir / "out" / "design_resolved.cfg"));
  REQUIRE(run_cli("design", dir / "out2", dir / "out" / "design_resolved.cfg", {}) == 0);
  const json r2 = json::parse(slurp(dir / "out2" / "results.json"));
  CHECK(r2["circuit"]["current_zpf"]["value"].get<double>() ==
        doctest::Approx(r["circuit"]["current_zpf"]["value"].get<double>()).epsilon(1e-12));
}

TEST_CASE("design with a user-defined spin species") {
  const fs::path dir = scratch("custom_spin");
  write(dir / "design.cfg", kDesignConfig +
                                "[spin]\n"
                                "name = p_donor\n"
                                "g_factor = 1.9985\n"
                                "gamma_nr = 0.001/s\n");
  REQUIRE(run_cli("design", dir / "out", dir / "design.cfg", {}) == 0);
  const json r = json::parse(slurp(dir / "out" / "results.json"));
  bool found = false;
  for (const auto& spin : r["spins"]) {
    if (spin["name"] != "p_donor") continue;
    found = true;
    // g = 1.9985 sits just under the free-electron coupling
    CHECK(spin["g0"]["value"].get<double>() == doctest::Approx(7.18e3).epsilon(0.02));
  }
  CHECK(found);
}

TEST_CASE("simulate then fit round trip through the CLI") {
  const fs::path dir = scratch("roundtrip");
  write(dir / "sim.cfg",
        "[simulate]\n"
        "kind = trace\n"
        "f_r = 7.5GHz\n"
        "q_internal = 2e4\n"
        "q_coupling = 1e4\n"
        "amplitude = 0.8\n"
        "phase_offset = 1rad\n"
        "electrical_delay = 50ns\n"
        "noise_sigma = 0\n");
  REQUIRE(run_cli("simulate", dir / "sim", dir / "sim.cfg", {}) == 0);
  REQUIRE(fs::exists(dir / "sim" / "trace.csv"));

  REQUIRE(run_cli("fit", dir / "fit", {}, {dir / "sim" / "trace.csv"}) == 0);
  const json r = json::parse(slurp(dir / "fit" / "results.json"));
  const json& t = r["traces"][0];
  CHECK(t["f_r"]["value"].get<double>() == doctest::Approx(7.5e9).epsilon(1e-9));
  CHECK(t["Q_i"]["value"].get<double>() == doctest::Approx(2e4).epsilon(1e-5));
  CHECK(t["Q_c"]["value"].get<double>() == doctest::Approx(1e4).epsilon(1e-5));
  CHECK(t["uncertainties"].contains("Q_i"));
  CHECK(t["deembed"]["a"]["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(t["deembed"]["phi0"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(t["deembed"]["tau"]["value"].get<double>() == doctest::Approx(50e-9).epsilon(1e-6));
  check_units(r);
}

TEST_CASE("simulate then tune round trip with a vortex jump") {
  const fs::path dir = scratch("tune");
  write(dir / "sim.cfg",
        "[simulate]\n"
        "kind = sweep\n"
        "f_r0 = 7.48GHz\n"
        "a_coeff = 0.0652\n"
        "b_max = 500mT\n"
        "n_points = 26\n"
        "noise_sigma_f = 0Hz\n"
        "jump_field = 200mT\n"
        "jump_delta_f = -2MHz\n"
        "directions = both\n");
  REQUIRE(run_cli("simulate", dir / "sim", dir / "sim.cfg", {}) == 0);

  REQUIRE(run_cli("tune", dir / "tune", {}, {dir / "sim" / "sweep.csv"}) == 0);
  const json r = json::parse(slurp(dir / "tune" / "results.json"));
  CHECK(r["quadratic_fit"]["a_coeff"]["value"].get<double>() ==
        doctest::Approx(0.0652).epsilon(1e-4));
  CHECK(r["predicted_detuning_at_max_field"]["value"].get<double>() ==
        doctest::Approx(-121.934e6).epsilon(1e-3));
  bool saw_event_at_200mT = false;
  for (const auto& e : r["vortex_events"]) {
    if (std::abs(e["field"]["value"].get<double>() - 0.2) < 1e-9) saw_event_at_200mT = true;
  }
  CHECK(saw_event_at_200mT);
  CHECK(fs::exists(dir / "tune" / "tuning.csv"));
  CHECK(fs::exists(dir / "tune" / "tuning.svg"));
  check_units(r);
}

TEST_CASE("protocol commands") {
  const fs::path dir = scratch("protocols");
  write(dir / "count.cfg",
        "[photon-counting]\n"
        "t1 = 0.8ms\n"
        "efficiency = 0.3\n"
        "dark_rate = 100/s\n"
        "snr_target = 2\n"
        "mc_trials = 20000\n");
  REQUIRE(run_cli("protocol-count", dir / "count", dir / "count.cfg", {}) == 0);
  json r = json::parse(slurp(dir / "count" / "results.json"));
  CHECK(r["tau_m_required"]["value"].get<double>() == doctest::Approx(13.16e-3).epsilon(1e-3));
  CHECK(r["regime"] == "crossover");
  check_units(r);
  const double mc_snr = r["monte_carlo"]["snr"]["value"].get<double>();
  const double mc_se = r["monte_carlo"]["std_error"]["value"].get<double>();
  CHECK(std::abs(mc_snr - 2.0) <= 3.0 * mc_se);
  CHECK(fs::exists(dir / "count" / "integration_time.csv"));
  CHECK(fs::exists(dir / "count" / "integration_time.svg"));

  write(dir / "disp.cfg",
        "[dispersive]\n"
        "g0 = 30kHz\n"
        "f_r = 7.5GHz\n"
        "q_total = 1e4\n"
        "efficiency = 0.3\n"
        "gamma_nr = 1/s\n"
        "mc_delta = 10MHz\n"
        "mc_tau = 5ms\n"
        "mc_trials = 5000\n");
  REQUIRE(run_cli("protocol-dispersive", dir / "disp", dir / "disp.cfg", {}) == 0);
  r = json::parse(slurp(dir / "disp" / "results.json"));
  CHECK(r["max_fidelity"]["value"].get<double>() >= 0.80);
  bool tau_in_range = false;
  double best = 0.0;
  for (const auto& row : r["per_detuning"]) {
    if (!row.contains("F")) continue;
    for (const char* key : {"delta", "n_bar", "tau_m_opt", "T1", "F", "F_r", "P_e", "power_dbm"}) {
      CHECK(row.contains(key));
    }
    const double f = row["F"]["value"].get<double>();
    if (f > best) {
      best = f;
      const double tau = row["tau_m_opt"]["value"].get<double>();
      tau_in_range = tau >= 1e-3 && tau <= 10e-3;
    }
  }
  CHECK(tau_in_range);
  const double mc_snr_d = r["monte_carlo"]["snr_mc"]["value"].get<double>();
  const double mc_ana_d = r["monte_carlo"]["snr_analytic"]["value"].get<double>();
  const double mc_se_d = r["monte_carlo"]["std_error"]["value"].get<double>();
  CHECK(std::abs(mc_snr_d - mc_ana_d) <= 3.0 * mc_se_d);
  check_units(r);
}

TEST_CASE("protocol variants: explicit coupling split and custom grids") {
  const fs::path dir = scratch("protocol_variants");
  // undercoupled resonator via an explicit (Q_i, Q_c) pair
  write(dir / "disp.cfg",
        "[dispersive]\n"
        "g0 = 30kHz\n"
        "f_r = 7.5GHz\n"
        "q_internal = 3e4\n"
        "q_coupling = 1.5e4\n"
        "efficiency = 0.3\n"
        "gamma_nr = 1/s\n"
        "delta_grid = 5MHz,10MHz,20MHz\n");
  REQUIRE(run_cli("protocol-dispersive", dir / "disp", dir / "disp.cfg", {}) == 0);
  json r = json::parse(slurp(dir / "disp" / "results.json"));
  REQUIRE(r["per_detuning"].size() == 3);
  CHECK(r["per_detuning"][1]["delta_over_2pi"]["value"].get<double>() ==
        doctest::Approx(10e6));

  // photon counting with a custom dark-rate list for the regime map
  write(dir / "count.cfg",
        "[photon-counting]\n"
        "t1 = 0.8ms\n"
        "efficiency = 0.3\n"
        "dark_rate = 100/s\n"
        "mc_trials = 2000\n"
        "dark_rates = 0/s,50/s,500/s\n");
  REQUIRE(run_cli("protocol-count", dir / "count", dir / "count.cfg", {}) == 0);
  const std::string csv = slurp(dir / "count" / "integration_time.csv");
  CHECK(csv.find("tau_alpha_50") != std::string::npos);
  CHECK(csv.find("tau_alpha_500") != std::string::npos);
}

TEST_CASE("byte-identical outputs for identical inputs and seed") {
  const fs::path dir = scratch("determinism");
  write(dir / "sim.cfg",
        "[simulate]\n"
        "kind = trace\n"
        "noise_sigma = 0.01\n");
  REQUIRE(run_cli("simulate", dir / "run1", dir / "sim.cfg", {}, nullptr, 777) == 0);
  REQUIRE(run_cli("simulate", dir / "run2", dir / "sim.cfg", {}, nullptr, 777) == 0);
  CHECK(slurp(dir / "run1" / "trace.csv") == slurp(dir / "run2" / "trace.csv"));
  CHECK(slurp(dir / "run1" / "results.json") == slurp(dir / "run2" / "results.json"));

  // different seed, different noise
  REQUIRE(run_cli("simulate", dir / "run3", dir / "sim.cfg", {}, nullptr, 778) == 0);
  CHECK(slurp(dir / "run1" / "trace.csv") != slurp(dir / "run3" / "trace.csv"));

  // design + svg artifacts are deterministic too
  write(dir / "design.cfg", kDesignConfig);
  REQUIRE(run_cli("design", dir / "d1", dir / "design.cfg", {}) == 0);
  REQUIRE(run_cli("design", dir / "d2", dir / "design.cfg", {}) == 0);
  CHECK(slurp(dir / "d1" / "results.json") == slurp(dir / "d2" / "results.json"));
  CHECK(slurp(dir / "d1" / "field_map.csv") == slurp(dir / "d2" / "field_map.csv"));
  CHECK(slurp(dir / "d1" / "field_map.svg") == slurp(dir / "d2" / "field_map.svg"));
}

TEST_CASE("override flags reach the computation and unknown keys fail") {
  const fs::path dir = scratch("overrides");
  write(dir / "design.cfg", kDesignConfig);
  REQUIRE(run_cli("design", dir / "out", dir / "design.cfg", {}, nullptr, 12345,
                  {"design.q_coupling=1e4"}) == 0);
  const json r = json::parse(slurp(dir / "out" / "results.json"));
  CHECK(r["quality"]["q_coupling"]["value"].get<double>() == doctest::Approx(1e4));

  std::string machine;
  const int code = run_cli("design", dir / "bad", dir / "design.cfg", {}, &machine, 12345,
                           {"design.not_a_key=1"});
  CHECK(code == 2);
  const json err = json::parse(machine);
  CHECK(err["status"] == "error");
  CHECK(err["code"] == "unknown-key");
}

TEST_CASE("machine-readable errors with stable codes") {
  const fs::path dir = scratch("errors");

  std::string machine;
  // missing config
  CHECK(run_cli("design", dir / "a", {}, {}, &machine) == 2);
  CHECK(json::parse(machine)["code"] == "config-parse");

  // unknown command
  CHECK(run_cli("transmogrify", dir / "b", {}, {}, &machine) == 2);
  CHECK(json::parse(machine)["code"] == "config-parse");

  // malformed input file
  write(dir / "junk.csv", "freq,re,im\n1,2,3\n");
  CHECK(run_cli("fit", dir / "c", {}, {dir / "junk.csv"}, &machine) == 2);
  CHECK(json::parse(machine)["code"] == "schema-mismatch");

  // missing input file
  CHECK(run_cli("fit", dir / "d", {}, {dir / "nope.csv"}, &machine) == 3);
  CHECK(json::parse(machine)["code"] == "file-io");
}

TEST_CASE("plot emission from tables") {
  const fs::path dir = scratch("plots");
  csvio::Table table;
  table.columns = {"x", "y1", "y2"};
  table.data = {{1.0, 2.0, 3.0},
                {1.0, 4.0, 9.0},
                {std::nan(""), std::nan(""), std::nan("")}};  // empty optional series

  cli::PlotSpec spec;
  spec.kind = "loglog";
  spec.x_column = "x";
  spec.y_columns = {"y1", "y2"};  // y2 all-NaN: omitted silently
  spec.title = "test";
  CHECK_NOTHROW(cli::emit_plot(spec, table, dir / "ok.svg"));
  const std::string svg = slurp(dir / "ok.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("timestamp") == std::string::npos);

  spec.y_columns = {"does_not_exist"};
  try {
    cli::emit_plot(spec, table, dir / "bad.svg");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "missing-series");
  }
}

// The installed binary is exercised end to end when the harness provides it.
TEST_CASE("compiled binary runs a full design pipeline") {
  const char* exe = std::getenv("PPRES_CLI");
  if (exe == nullptr) return;  // library-level coverage above still applies
  const fs::path dir = scratch("binary");
  write(dir / "design.cfg", kDesignConfig);
  const std::string cmd = std::string("\"") + exe + "\" design --config " +
                          (dir / "design.cfg").string() + " --out " + (dir / "out").string() +
                          " > " + (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int code = std::system(cmd.c_str());
  CHECK(code == 0);
  CHECK(fs::exists(dir / "out" / "results.json"));
  const std::string machine = slurp(dir / "stdout.txt");
  CHECK(machine.find("\"status\":\"ok\"") != std::string::npos);
}
