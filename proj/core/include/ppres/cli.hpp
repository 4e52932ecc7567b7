#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ppres/csvio.hpp"
#include "ppres/svg.hpp"

namespace ppres::cli {

// One toolkit invocation. Commands: design | fit | tune | protocol-count |
// protocol-dispersive | simulate.
struct RunConfig {
  std::string command;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output_dir = ".";
  std::vector<std::string> overrides;  // "section.key=value"
  std::optional<std::uint64_t> seed;
};

// Executes the pipeline and writes results.json plus per-command CSV/SVG
// artifacts into output_dir. Returns the process exit code: 0 on success,
// nonzero with a machine-readable JSON error object printed to machine_out
// (one line) and a human-readable message on human_err.
int run(const RunConfig& config, std::ostream& machine_out, std::ostream& human_err);

// Convenience overload targeting std::cout / std::cerr.
int run(const RunConfig& config);

// Static plot emission from a result table. kind: line | loglog | heatmap.
// Referenced columns must exist (Error("missing-series") otherwise); series
// whose cells are all NaN are omitted. For heatmaps the table must hold the
// x, y and value columns of a rectilinear grid in long format.
struct PlotSpec {
  std::string kind = "line";
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::string x_label;
  std::string y_label;
  std::string y_column;      // heatmap only: grid y coordinate
  std::string value_column;  // heatmap only: cell value
  std::vector<svg::GuideLine> guides;
};

void emit_plot(const PlotSpec& spec, const csvio::Table& table,
               const std::filesystem::path& path);

}  // namespace ppres::cli
