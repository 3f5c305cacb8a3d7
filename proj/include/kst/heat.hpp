#pragma once

#include <memory>
#include <vector>

#include "kst/grid.hpp"

namespace kst {

/// Exact time integration of du/dt = Lap_h u on the grid box with reflecting
/// (zero-flux) walls, where Lap_h is the 7-point Laplacian. The cosine
/// transform diagonalizes Lap_h; each mode is multiplied by
/// exp(-dt sum_d (4/h^2) sin^2(pi k_d / (2n))). The propagator conserves the
/// discrete mass exactly and maps non-negative fields to non-negative fields.
class HeatPropagator {
 public:
  explicit HeatPropagator(const Grid3& grid);
  ~HeatPropagator();
  HeatPropagator(const HeatPropagator&) = delete;
  HeatPropagator& operator=(const HeatPropagator&) = delete;

  const Grid3& grid() const { return grid_; }

  /// Advances `values` by dt in place. Throws BadParameter for dt < 0.
  void apply(std::vector<double>& values, double dt) const;

 private:
  struct Plans;

  Grid3 grid_;
  std::vector<double> symbol_1d_;  // (4/h^2) sin^2(pi k / (2n))
  std::unique_ptr<Plans> plans_;
};

}  // namespace kst
