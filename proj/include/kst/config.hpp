#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kst/matrixflux.hpp"

namespace kst {

struct InitialData {
  enum class Kind { Gaussian, Ball, File };

  Kind kind = Kind::Gaussian;
  double mass = 1.0;
  std::array<double, 3> sigma{1.0, 1.0, 1.0};  // per-axis widths (gaussian)
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 1.0;                    // ball
  Matrix orientation = Matrix::Identity(3, 3);  // shape evaluated at orientation * (x - center)
  std::filesystem::path file;             // snapshot stem
};

/// Full experiment description.
///
/// Text form: one `key = value` per line, `#` starts a comment, unknown keys
/// are rejected. Keys:
///   matrix                  row-major comma list (n^2 entries), default identity
///   matrix_file             path to an n-line matrix file (relative to the config file)
///   chi                     chemotactic sensitivity >= 0 (default 1)
///   chi_admissibility_ratio r in (0, 1]: replaces chi by the value for which the
///                           sampled initial data has m0 = r * C_Bl * M^3
///   n_cells, half_width     grid (default 64, 8)
///   initial                 gaussian | ball | file
///   mass, sigma (1 or 3 values), center (3 values), radius, orientation (9 values)
///   initial_file            snapshot stem (relative to the config file)
///   epsilon                 concentrating rescaling eps^{-3} u0(x/eps) of analytic data
///   t_end, cfl (0.4), dt_max (0.01), dt_min (1e-8), blowup_factor (1e3)
///   diag_every              steps between diagnostics records (default 10)
///   output_dir              directory for diagnostics.csv / outcome.txt / snapshots
///   snapshot_times          comma list of times for field snapshots
struct SimConfig {
  Matrix a = Matrix::Identity(3, 3);
  double chi = 1.0;
  std::optional<double> chi_admissibility_ratio;
  int n_cells = 64;
  double half_width = 8.0;
  InitialData initial;
  std::optional<double> epsilon;
  double t_end = 1.0;
  double cfl = 0.4;
  double dt_max = 1e-2;
  double dt_min = 1e-8;
  double blowup_factor = 1e3;
  int diag_every = 10;
  std::filesystem::path output_dir;
  std::vector<double> snapshot_times;

  /// Throws ConfigInvalid describing the first violated constraint.
  void validate() const;
};

SimConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
SimConfig read_config(const std::filesystem::path& path);

}  // namespace kst
