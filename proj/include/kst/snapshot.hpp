#pragma once

// Field snapshots: `<stem>.raw` holds little-endian float64 values in grid
// order (z fastest) with no header; `<stem>.txt` is a key=value sidecar with
// n_cells, L, h, time and field.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kst/grid.hpp"

namespace kst {

struct Snapshot {
  Grid3 grid;
  double time = 0.0;
  std::string field;
  std::vector<double> values;
};

void write_snapshot(const std::filesystem::path& stem, const Grid3& grid, std::span<const double> values,
                    double time, const std::string& field);

/// Throws IoError / ParseError on missing or inconsistent files.
Snapshot read_snapshot(const std::filesystem::path& stem);

}  // namespace kst
