#pragma once

// File formats for simulation artifacts:
//
//  * Field dumps — a fixed-layout binary format carrying one or more frames
//    of lattice fields together with the grid geometry.  Header words are
//    64-bit little-endian, payload is row-major float64.
//  * CSV tables — UTF-8, comma-separated, one header row; numbers printed
//    with %.17g so a read-back round-trips bit-exactly.
//  * Probe records — JSON-lines, one object per (path, probe) pair.
//
// All writers are deterministic: identical inputs produce byte-identical
// files.  Nothing here timestamps its output.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "shelab/density.hpp"
#include "shelab/errors.hpp"
#include "shelab/grid.hpp"

static_assert(std::endian::native == std::endian::little,
              "field dumps are defined little-endian; this platform is not");

namespace shelab {

// ---------------------------------------------------------------------------
// Binary field dumps
// ---------------------------------------------------------------------------

inline constexpr char kFieldDumpMagic[8] = {'S', 'H', 'L', 'F',
                                            'L', 'D', '0', '1'};

struct FieldDump {
  std::size_t dim = 0;
  std::size_t n = 0;
  std::size_t components = 0;
  std::size_t frames = 0;       // 1 for a snapshot, n_steps for a film
  double box_length = 0.0;
  double dt = 0.0;
  std::vector<double> data;     // frame-major, then component, then cell

  std::size_t cells() const {
    std::size_t c = 1;
    for (std::size_t a = 0; a < dim; ++a) c *= n;
    return c;
  }
  const double* frame(std::size_t f) const {
    return data.data() + f * components * cells();
  }
};

namespace detail {

inline void put_u64(std::ofstream& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.write(buf, 8);
}

inline void put_f64(std::ofstream& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.write(buf, 8);
}

inline std::uint64_t get_u64(std::ifstream& in) {
  char buf[8];
  in.read(buf, 8);
  std::uint64_t v;
  std::memcpy(&v, buf, 8);
  return v;
}

inline double get_f64(std::ifstream& in) {
  char buf[8];
  in.read(buf, 8);
  double v;
  std::memcpy(&v, buf, 8);
  return v;
}

}  // namespace detail

inline void write_field_dump(const std::string& path, const FieldDump& dump) {
  if (dump.dim != 1 && dump.dim != 2) {
    throw config_error("field dump: dimension must be 1 or 2");
  }
  if (dump.frames == 0 || dump.components == 0 || dump.n == 0) {
    throw config_error("field dump: empty geometry");
  }
  if (dump.data.size() != dump.frames * dump.components * dump.cells()) {
    throw config_error("field dump: payload size does not match the header");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot open for writing: " + path);
  out.write(kFieldDumpMagic, 8);
  detail::put_u64(out, dump.dim);
  detail::put_u64(out, dump.n);
  detail::put_u64(out, dump.components);
  detail::put_u64(out, dump.frames);
  detail::put_f64(out, dump.box_length);
  detail::put_f64(out, dump.dt);
  for (double v : dump.data) detail::put_f64(out, v);
  if (!out) throw config_error("write failed: " + path);
}

// Convenience: snapshot of a multi-component lattice field.
inline void write_field_dump(const std::string& path, const GridSpec& grid,
                             const Fields& field) {
  FieldDump dump;
  dump.dim = static_cast<std::size_t>(grid.dim);
  dump.n = grid.n;
  dump.components = field.components;
  dump.frames = 1;
  dump.box_length = grid.box_length;
  dump.dt = grid.dt;
  dump.data = field.data;
  write_field_dump(path, dump);
}

inline FieldDump read_field_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open for reading: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kFieldDumpMagic, 8) != 0) {
    throw config_error("not a field dump: " + path);
  }
  FieldDump dump;
  dump.dim = detail::get_u64(in);
  dump.n = detail::get_u64(in);
  dump.components = detail::get_u64(in);
  dump.frames = detail::get_u64(in);
  dump.box_length = detail::get_f64(in);
  dump.dt = detail::get_f64(in);
  if (!in || (dump.dim != 1 && dump.dim != 2) || dump.n == 0 ||
      dump.components == 0 || dump.frames == 0) {
    throw config_error("corrupt field dump header: " + path);
  }
  const std::size_t count = dump.frames * dump.components * dump.cells();
  dump.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) dump.data[i] = detail::get_f64(in);
  if (!in) throw config_error("truncated field dump: " + path);
  return dump;
}

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

// Shortest exact decimal form: %.17g round-trips IEEE doubles.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) {
      throw config_error("CSV row width does not match the header");
    }
    rows.push_back(std::move(row));
  }
};

inline void write_csv(const std::string& path, const CsvTable& table) {
  if (table.columns.empty()) throw config_error("CSV needs at least one column");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw config_error("cannot open for writing: " + path);
  auto put_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  put_row(table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw config_error("CSV row width does not match the header");
    }
    put_row(row);
  }
  if (!out) throw config_error("write failed: " + path);
}

// Numeric convenience: equally long columns of doubles.
inline void write_csv(const std::string& path,
                      std::span<const std::string> columns,
                      std::span<const std::vector<double>> data) {
  if (columns.size() != data.size()) {
    throw config_error("CSV column names and data disagree");
  }
  CsvTable table;
  table.columns.assign(columns.begin(), columns.end());
  const std::size_t rows = data.empty() ? 0 : data[0].size();
  for (const auto& col : data) {
    if (col.size() != rows) throw config_error("CSV columns have unequal length");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> row(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      row[c] = format_double(data[c][r]);
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

// ---------------------------------------------------------------------------
// Probe records
// ---------------------------------------------------------------------------

// One JSON object per line:
//   {"path":0,"step":8,"cell":12,"t":0.25,"x":[...],"u":[...]}
// Numbers are printed with %.17g, so re-running a deterministic ensemble
// reproduces the file byte for byte.
inline void write_probe_jsonl(const std::string& path, const GridSpec& grid,
                              const EnsembleResult& ensemble) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw config_error("cannot open for writing: " + path);
  std::vector<double> x(static_cast<std::size_t>(grid.dim));
  for (std::size_t p = 0; p < ensemble.paths; ++p) {
    for (std::size_t pi = 0; pi < ensemble.probes.size(); ++pi) {
      const ProbePoint& probe = ensemble.probes[pi];
      grid.cell_coordinates(probe.cell, x.data());
      out << "{\"path\":" << p << ",\"step\":" << probe.step
          << ",\"cell\":" << probe.cell << ",\"t\":"
          << format_double(static_cast<double>(probe.step) * grid.dt)
          << ",\"x\":[";
      for (int a = 0; a < grid.dim; ++a) {
        if (a) out << ',';
        out << format_double(x[static_cast<std::size_t>(a)]);
      }
      out << "],\"u\":[";
      for (std::size_t c = 0; c < ensemble.components; ++c) {
        if (c) out << ',';
        out << format_double(ensemble.at(p, pi, c));
      }
      out << "]}\n";
    }
  }
  if (!out) throw config_error("write failed: " + path);
}

}  // namespace shelab
