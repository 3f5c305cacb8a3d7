#include "kst/grid.hpp"

#include <cmath>
#include <string>

#include "kst/error.hpp"

namespace kst {

Grid3::Grid3(int n_cells, double half_width) : n_(n_cells), half_width_(half_width) {
  if (n_cells < 2 || (n_cells & (n_cells - 1)) != 0) {
    throw Error(ErrorCode::InvalidGrid,
                "n_cells must be a power of two >= 2, got " + std::to_string(n_cells));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorCode::InvalidGrid, "half_width must be positive and finite");
  }
  h_ = 2.0 * half_width / n_cells;
}

DensityField::DensityField(const Grid3& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::InvalidGrid, "field size does not match grid");
  }
}

}  // namespace kst
