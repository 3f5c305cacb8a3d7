#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace kst {

/// Uniform cell-centered grid over the cube [-L, L]^3. Cell centers are
/// x_i = -L + (i + 1/2) h with h = 2L / n_cells. Linear index is row-major
/// with z fastest: (i * n + j) * n + k.
class Grid3 {
 public:
  /// Throws InvalidGrid unless n_cells is a power of two >= 2 and L > 0.
  Grid3(int n_cells, double half_width);

  int n() const { return n_; }
  double half_width() const { return half_width_; }
  double h() const { return h_; }
  double cell_volume() const { return h_ * h_ * h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double center(int i) const { return -half_width_ + (i + 0.5) * h_; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  bool operator==(const Grid3& o) const { return n_ == o.n_ && half_width_ == o.half_width_; }

 private:
  int n_;
  double half_width_;
  double h_;
};

/// Cell-centered density u >= 0 (mass per volume).
struct DensityField {
  explicit DensityField(const Grid3& g) : grid(g), values(g.size(), 0.0) {}
  DensityField(const Grid3& g, std::vector<double> v);

  double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }

  Grid3 grid;
  std::vector<double> values;
};

/// Potential v = K_3 * u and its gradient, both cell-centered on the density grid.
struct PotentialField {
  explicit PotentialField(const Grid3& g)
      : grid(g), v(g.size(), 0.0), grad{std::vector<double>(g.size(), 0.0),
                                          std::vector<double>(g.size(), 0.0),
                                          std::vector<double>(g.size(), 0.0)} {}

  Grid3 grid;
  std::vector<double> v;
  std::array<std::vector<double>, 3> grad;
};

}  // namespace kst
