#pragma once

// Free-space Newtonian potential v = K_n * u with
//   K_n(x) = |x|^{2-n} / (n (n-2) omega_n),   omega_n = |B_1(0)|,
// on a cell-centered grid. The discrete potential is the midpoint-rule sum
//   v_i = h^3 sum_j u_j K(x_i - x_j),   grad v_i = h^3 sum_j u_j G(x_i - x_j),
// where the singular self term of K uses the mean of K_3 over one cell and G
// is the gradient kernel described at grad_kernel_table_entry. The fast path evaluates the sums exactly by
// zero-padded FFT convolution on the doubled box; the direct path is the
// O(N^2) double loop.

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "kst/grid.hpp"

namespace kst {

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// n (n-2) omega_n, the normalization of K_n (4 pi for n = 3).
double kernel_normalization(int n);

/// K_n(x). Throws DomainError at x = 0 or for n < 3.
double kernel_value(std::span<const double> x, int n);

/// grad K_n(x) = -x / (n omega_n |x|^n). Throws DomainError at x = 0 or for n < 3.
std::vector<double> grad_kernel(std::span<const double> x, int n);

/// Integral of 1/|x| over the unit cube centered at the origin,
/// 3 ln((sqrt3 + 1)/(sqrt3 - 1)) - pi/2.
double unit_cube_inverse_distance_integral();

/// Mean of K_3 over a cube of side h centered at the origin.
double self_cell_kernel(double h);

/// Discrete kernel table entry K(d h) for integer offsets (self cell regularized).
double kernel_table_entry(int dx, int dy, int dz, double h);

/// Discrete gradient kernel G(d h) with grad v_i = h^3 sum_j u_j G(x_i - x_j).
/// G is the midpoint value grad K_3(d h), zero at the self cell, plus a
/// correction on the six face neighbours that restores the self-cell
/// contribution (h^2 / (12 pi)) (int_{[-1/2,1/2]^3} |s|^{-1} ds) grad u of a
/// linearly varying density. G is odd.
void grad_kernel_table_entry(int dx, int dy, int dz, double h, double out[3]);

/// Zero-padded FFT convolution solver bound to one grid. Kernel spectra are
/// built once at construction; solve() is const and safe to call concurrently.
class FreeSpacePoisson {
 public:
  /// Throws GridTooSmall when n_cells < 16.
  explicit FreeSpacePoisson(const Grid3& grid);
  ~FreeSpacePoisson();
  FreeSpacePoisson(const FreeSpacePoisson&) = delete;
  FreeSpacePoisson& operator=(const FreeSpacePoisson&) = delete;

  const Grid3& grid() const { return grid_; }
  PotentialField solve(const DensityField& u) const;
  /// Potential only, skipping the three gradient transforms.
  std::vector<double> solve_value(const DensityField& u) const;

 private:
  struct Plans;

  void forward_padded(const DensityField& u, std::complex<double>* spectrum, double* real) const;
  void convolve_into(const std::complex<double>* u_hat, const std::vector<std::complex<double>>& k_hat,
                     std::complex<double>* work, double* real, std::vector<double>& out) const;

  Grid3 grid_;
  int padded_;  // 2 n
  std::size_t spectral_size_;
  std::unique_ptr<Plans> plans_;
  std::vector<std::complex<double>> k_hat_;
  std::array<std::vector<std::complex<double>>, 3> g_hat_;
};

/// Shared solver for `grid`, built on first use and cached per grid.
std::shared_ptr<const FreeSpacePoisson> cached_poisson(const Grid3& grid);

PotentialField solve_potential_fast(const DensityField& u);

/// Reference O(N^2) quadrature. Throws TooLarge for grids beyond 24^3.
PotentialField solve_potential_direct(const DensityField& u);

}  // namespace kst
