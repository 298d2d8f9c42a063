#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "obslab/grid.hpp"

namespace obslab {

/// Binary grid file layout (all little-endian):
///
///   8 bytes   magic "OBSGRID1"
///   uint32    dimension n
///   uint64    nodes per axis, n entries
///   float64   lower bound per axis, n entries
///   float64   upper bound per axis, n entries
///   float64   node values, row-major (last axis fastest)
void write_field(std::ostream& out, const ScalarField& field);
void write_field(const std::filesystem::path& path, const ScalarField& field);

/// Throws FormatError on a bad magic string, truncated data, or trailing bytes.
ScalarField read_field(std::istream& in);
ScalarField read_field(const std::filesystem::path& path);

/// 8-bit binary portable graymap of a 2D field, mapped linearly from
/// [min, max] to [0, 255]; rows run along axis 1 with axis 0 increasing
/// downwards. Throws std::invalid_argument for n != 2.
void write_pgm(const std::filesystem::path& path, const ScalarField& field);
/// Same for a boolean node mask (true = white).
void write_pgm(const std::filesystem::path& path, const GridSpec& grid, const std::vector<bool>& mask);

}  // namespace obslab
