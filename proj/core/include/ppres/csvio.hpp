#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ppres/spectroscopy.hpp"
#include "ppres/tuning.hpp"

namespace ppres::csvio {

// Column-oriented numeric table; NaN marks missing optional cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[c][row]

  std::size_t rows() const { return data.empty() ? 0 : data[0].size(); }
  int column_index(const std::string& name) const;  // -1 when absent
};

// Shortest representation that round-trips a double; "nan" for missing.
std::string format_double(double v);

// Trace files: header exactly `freq_hz,re,im`, one numeric row per point,
// strictly increasing frequency. Schema violations are rejected with
// Error("schema-mismatch") citing the file line (and column name).
spectroscopy::ComplexTrace read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const spectroscopy::ComplexTrace& trace);

// Sweep files: header exactly `b_tesla,angle_rad,f_r_hz,q_i,direction`;
// angle_rad and q_i cells may be empty; direction is `up` or `down`.
std::vector<tuning::FieldSweepRecord> read_sweep(const std::filesystem::path& path);
void write_sweep(const std::filesystem::path& path,
                 const std::vector<tuning::FieldSweepRecord>& records);

void write_table(const std::filesystem::path& path, const Table& table);

}  // namespace ppres::csvio
