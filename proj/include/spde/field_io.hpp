#pragma once

#include <iosfwd>
#include <string>

#include "spde/grid.hpp"

namespace spde::io {

// CSV: header "t,x1[,x2[,x3]],value", one line per (row, spatial cell),
// time outermost, 17 significant digits.
void write_field_csv(std::ostream& os, const Field& field);

// SPDF1 binary container (all integers and floats little-endian):
//   0   5 bytes  magic "SPDF1"
//   5   u8       layout (0 = cells, 1 = nodes)
//   6   u8       spatial dimension d
//   7   u8       reserved, 0
//   8   f64      t_max
//   16  u64      n_steps
//   24  f64      half_width L
//   32  u64      n_cells per axis
//   40  u64      n_rows
//   48  u64[n_rows]            time step index of each row
//   ..  u64      metadata length m
//   ..  m bytes  UTF-8 JSON metadata (resolved config, version)
//   ..  f64[n_rows * n_cells^d] values, row-major, time outermost
void write_field_binary(std::ostream& os, const Field& field, const std::string& metadata = "{}");

struct LoadedField {
    Field field;
    std::string metadata;
};
// Throws InputError on a malformed or truncated stream.
LoadedField read_field_binary(std::istream& is);

} // namespace spde::io
