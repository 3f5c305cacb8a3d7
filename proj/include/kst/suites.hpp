#pragma once

// Fixed-seed property suites shared by the `verify` and `calibrate-cn`
// commands and the test programs.

#include <string>
#include <vector>

#include "kst/grid.hpp"

namespace kst {

struct SuiteDensity {
  std::string name;
  DensityField u;
};

/// Twelve test densities on 64^3 grids: isotropic, offset and anisotropic
/// Gaussians, balls, a shell, a cube, mixtures and random smoothed fields.
std::vector<SuiteDensity> density_suite();

/// Gaussian with per-axis widths, unit mass before sampling.
DensityField gaussian_density(const Grid3& grid, double mass, double sx, double sy, double sz,
                              double cx = 0.0, double cy = 0.0, double cz = 0.0);

struct CaseResult {
  std::string name;
  double margin = 0.0;  // positive when the case passes
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CaseResult> cases;
  bool pass() const;
};

SuiteReport verify_potential_oracle();
SuiteReport verify_biler();
SuiteReport verify_gradv_bound();
SuiteReport verify_moment_identity();

/// Names accepted by run_suites, in execution order for "all".
const std::vector<std::string>& suite_names();

/// Runs one named suite, or every suite for "all". Throws BadParameter for
/// unknown names.
std::vector<SuiteReport> run_suites(const std::string& name);

struct CnCalibration {
  double c_n = 0.0;  // infimum of the sampled ratios
  std::vector<CaseResult> samples;  // margin holds the ratio
};

/// Scans ||u||_{L^{3/2}} / (M (M/m)^{1/2}) over anisotropic Gaussians and balls.
CnCalibration calibrate_cn();

}  // namespace kst
