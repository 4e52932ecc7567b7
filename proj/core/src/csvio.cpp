#include "ppres/csvio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ppres/error.hpp"

namespace ppres::csvio {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& file, std::size_t line_no,
                  const std::string& column) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) {
    fail("schema-mismatch", file + ": row " + std::to_string(line_no) + ", column '" + column +
                                "': not a number: '" + cell + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("file-io", "cannot open CSV file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void check_header(const std::vector<std::string>& lines, const std::string& expected,
                  const std::filesystem::path& path) {
  if (lines.empty()) fail("schema-mismatch", path.string() + ": empty file");
  if (lines[0] != expected) {
    fail("schema-mismatch",
         path.string() + ": row 1: expected header '" + expected + "', got '" + lines[0] + "'");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("file-io", "cannot write file: " + path.string());
  out << text;
  if (!out) fail("file-io", "short write: " + path.string());
}

}  // namespace

int Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::string best;
  int first_hit = 0;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), back);
    if (back == v) {
      if (best.empty() || std::strlen(buf) < best.size()) best = buf;
      if (first_hit == 0) first_hit = prec;
    }
    // a few more digits can undo a premature exponent form ("5e+02" -> "500")
    if (first_hit != 0 && prec >= first_hit + 4) break;
  }
  return best.empty() ? buf : best;
}

spectroscopy::ComplexTrace read_trace(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  check_header(lines, "freq_hz,re,im", path);

  spectroscopy::ComplexTrace trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> cells = split_line(lines[i]);
    if (cells.size() != 3) {
      fail("schema-mismatch", path.string() + ": row " + std::to_string(i + 1) + ": expected 3 columns, got " +
                                  std::to_string(cells.size()));
    }
    const double f = parse_cell(cells[0], path.string(), i + 1, "freq_hz");
    const double re = parse_cell(cells[1], path.string(), i + 1, "re");
    const double im = parse_cell(cells[2], path.string(), i + 1, "im");
    if (!trace.frequency.empty() && f <= trace.frequency.back()) {
      fail("schema-mismatch", path.string() + ": row " + std::to_string(i + 1) +
                                  ": frequencies must be strictly increasing");
    }
    trace.frequency.push_back(f);
    trace.s11.emplace_back(re, im);
  }
  trace.validate();
  return trace;
}

void write_trace(const std::filesystem::path& path, const spectroscopy::ComplexTrace& trace) {
  std::string out = "freq_hz,re,im\n";
  for (std::size_t i = 0; i < trace.frequency.size(); ++i) {
    out += format_double(trace.frequency[i]);
    out += ',';
    out += format_double(trace.s11[i].real());
    out += ',';
    out += format_double(trace.s11[i].imag());
    out += '\n';
  }
  write_text(path, out);
}

std::vector<tuning::FieldSweepRecord> read_sweep(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  check_header(lines, "b_tesla,angle_rad,f_r_hz,q_i,direction", path);

  std::vector<tuning::FieldSweepRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> cells = split_line(lines[i]);
    if (cells.size() != 5) {
      fail("schema-mismatch", path.string() + ": row " + std::to_string(i + 1) + ": expected 5 columns, got " +
                                  std::to_string(cells.size()));
    }
    tuning::FieldSweepRecord r;
    r.field = parse_cell(cells[0], path.string(), i + 1, "b_tesla");
    if (!cells[1].empty()) r.angle = parse_cell(cells[1], path.string(), i + 1, "angle_rad");
    r.f_r = parse_cell(cells[2], path.string(), i + 1, "f_r_hz");
    if (!cells[3].empty()) r.q_internal = parse_cell(cells[3], path.string(), i + 1, "q_i");
    if (cells[4] == "up") {
      r.direction = tuning::SweepDirection::ramp_up;
    } else if (cells[4] == "down") {
      r.direction = tuning::SweepDirection::ramp_down;
    } else {
      fail("schema-mismatch", path.string() + ": row " + std::to_string(i + 1) +
                                  ", column 'direction': expected up|down, got '" + cells[4] + "'");
    }
    records.push_back(r);
  }
  require(!records.empty(), "schema-mismatch", path.string() + ": no data rows");
  return records;
}

void write_sweep(const std::filesystem::path& path,
                 const std::vector<tuning::FieldSweepRecord>& records) {
  std::string out = "b_tesla,angle_rad,f_r_hz,q_i,direction\n";
  for (const auto& r : records) {
    out += format_double(r.field);
    out += ',';
    if (r.angle) out += format_double(*r.angle);
    out += ',';
    out += format_double(r.f_r);
    out += ',';
    if (r.q_internal) out += format_double(*r.q_internal);
    out += ',';
    out += r.direction == tuning::SweepDirection::ramp_up ? "up" : "down";
    out += '\n';
  }
  write_text(path, out);
}

void write_table(const std::filesystem::path& path, const Table& table) {
  require(!table.columns.empty() && table.columns.size() == table.data.size(), "domain-error",
          "table columns and data are inconsistent");
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  const std::size_t rows = table.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.data.size(); ++c) {
      if (c > 0) out += ',';
      const double v = table.data[c][r];
      if (!std::isnan(v)) out += format_double(v);
    }
    out += '\n';
  }
  write_text(path, out);
}

}  // namespace ppres::csvio
