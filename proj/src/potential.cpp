#include "kst/potential.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "kst/error.hpp"

namespace kst {

namespace detail {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

using detail::FftwBuffer;
using detail::FftwPlan;

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double kernel_normalization(int n) { return n * (n - 2) * unit_ball_volume(n); }

namespace {

double norm_checked(std::span<const double> x, int n) {
  if (n < 3) throw Error(ErrorCode::DomainError, "kernel defined for n >= 3");
  if (static_cast<int>(x.size()) != n) {
    throw Error(ErrorCode::DomainError, "point dimension does not match n");
  }
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  if (r2 == 0.0) throw Error(ErrorCode::DomainError, "kernel is singular at x = 0");
  return std::sqrt(r2);
}

}  // namespace

double kernel_value(std::span<const double> x, int n) {
  const double r = norm_checked(x, n);
  return std::pow(r, 2.0 - n) / kernel_normalization(n);
}

std::vector<double> grad_kernel(std::span<const double> x, int n) {
  const double r = norm_checked(x, n);
  const double c = -1.0 / (n * unit_ball_volume(n) * std::pow(r, n));
  std::vector<double> g(x.begin(), x.end());
  for (double& gi : g) gi *= c;
  return g;
}

double unit_cube_inverse_distance_integral() {
  const double s3 = std::numbers::sqrt3;
  return 3.0 * std::log((s3 + 1.0) / (s3 - 1.0)) - 0.5 * std::numbers::pi;
}

double self_cell_kernel(double h) {
  return unit_cube_inverse_distance_integral() / (4.0 * std::numbers::pi * h);
}

double kernel_table_entry(int dx, int dy, int dz, double h) {
  if (dx == 0 && dy == 0 && dz == 0) return self_cell_kernel(h);
  const double r = h * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
  return 1.0 / (4.0 * std::numbers::pi * r);
}

void grad_kernel_table_entry(int dx, int dy, int dz, double h, double out[3]) {
  const int d2 = dx * dx + dy * dy + dz * dz;
  if (d2 == 0) {
    out[0] = out[1] = out[2] = 0.0;
    return;
  }
  const double r = h * std::sqrt(static_cast<double>(d2));
  const double c = -h / (4.0 * std::numbers::pi * r * r * r);
  out[0] = c * dx;
  out[1] = c * dy;
  out[2] = c * dz;
  if (d2 == 1) {
    // Self-cell term of a linearly varying density, h^2 C / (12 pi) grad u,
    // carried by central differences over the six face neighbours.
    const double s = unit_cube_inverse_distance_integral() / (24.0 * std::numbers::pi * h * h);
    out[0] -= s * dx;
    out[1] -= s * dy;
    out[2] -= s * dz;
  }
}

struct FreeSpacePoisson::Plans {
  FftwPlan r2c;
  FftwPlan c2r;
};

FreeSpacePoisson::FreeSpacePoisson(const Grid3& grid) : grid_(grid), padded_(2 * grid.n()) {
  if (grid.n() < 16) {
    throw Error(ErrorCode::GridTooSmall, "fast solver needs n_cells >= 16, got " + std::to_string(grid.n()));
  }
  const int p = padded_;
  const std::size_t real_size = static_cast<std::size_t>(p) * p * p;
  spectral_size_ = static_cast<std::size_t>(p) * p * (p / 2 + 1);

  FftwBuffer<double> real(real_size);
  FftwBuffer<std::complex<double>> spec(spectral_size_);
  plans_ = std::make_unique<Plans>();
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plans_->r2c = FftwPlan(fftw_plan_dft_r2c_3d(p, p, p, real.data(),
                                                reinterpret_cast<fftw_complex*>(spec.data()),
                                                FFTW_ESTIMATE));
    plans_->c2r = FftwPlan(fftw_plan_dft_c2r_3d(p, p, p, reinterpret_cast<fftw_complex*>(spec.data()),
                                                real.data(), FFTW_ESTIMATE));
  }

  const int n = grid.n();
  const double h = grid.h();
  // Quadrature weight h^3 and the 1/p^3 of the unnormalized inverse transform.
  const double scale = grid.cell_volume() / static_cast<double>(real_size);
  auto offset = [n, p](int a) { return a < n ? a : a - p; };

  auto transform_table = [&](auto&& entry, std::vector<std::complex<double>>& out) {
#pragma omp parallel for
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) {
        for (int c = 0; c < p; ++c) {
          real[(static_cast<std::size_t>(a) * p + b) * p + c] = entry(offset(a), offset(b), offset(c));
        }
      }
    }
    fftw_execute_dft_r2c(plans_->r2c.get(), real.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    out.resize(spectral_size_);
    for (std::size_t i = 0; i < spectral_size_; ++i) out[i] = spec[i] * scale;
  };

  transform_table([h](int dx, int dy, int dz) { return kernel_table_entry(dx, dy, dz, h); }, k_hat_);
  for (int comp = 0; comp < 3; ++comp) {
    transform_table(
        [h, comp](int dx, int dy, int dz) {
          double g[3];
          grad_kernel_table_entry(dx, dy, dz, h, g);
          return g[comp];
        },
        g_hat_[comp]);
  }
}

FreeSpacePoisson::~FreeSpacePoisson() = default;

void FreeSpacePoisson::forward_padded(const DensityField& u, std::complex<double>* spectrum,
                                      double* real) const {
  const int n = grid_.n();
  const int p = padded_;
  std::fill(real, real + static_cast<std::size_t>(p) * p * p, 0.0);
#pragma omp parallel for
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double* src = &u.values[grid_.index(i, j, 0)];
      std::copy(src, src + n, real + (static_cast<std::size_t>(i) * p + j) * p);
    }
  }
  fftw_execute_dft_r2c(plans_->r2c.get(), real, reinterpret_cast<fftw_complex*>(spectrum));
}

void FreeSpacePoisson::convolve_into(const std::complex<double>* u_hat,
                                     const std::vector<std::complex<double>>& k_hat,
                                     std::complex<double>* work, double* real,
                                     std::vector<double>& out) const {
  const auto s = static_cast<std::ptrdiff_t>(spectral_size_);
#pragma omp parallel for
  for (std::ptrdiff_t i = 0; i < s; ++i) work[i] = u_hat[i] * k_hat[i];
  fftw_execute_dft_c2r(plans_->c2r.get(), reinterpret_cast<fftw_complex*>(work), real);
  const int n = grid_.n();
  const int p = padded_;
  out.resize(grid_.size());
#pragma omp parallel for
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double* src = real + (static_cast<std::size_t>(i) * p + j) * p;
      std::copy(src, src + n, &out[grid_.index(i, j, 0)]);
    }
  }
}

PotentialField FreeSpacePoisson::solve(const DensityField& u) const {
  if (!(u.grid == grid_)) throw Error(ErrorCode::InvalidGrid, "density grid differs from solver grid");
  const std::size_t real_size = static_cast<std::size_t>(padded_) * padded_ * padded_;
  FftwBuffer<double> real(real_size);
  FftwBuffer<std::complex<double>> u_hat(spectral_size_);
  FftwBuffer<std::complex<double>> work(spectral_size_);
  forward_padded(u, u_hat.data(), real.data());

  PotentialField out(grid_);
  convolve_into(u_hat.data(), k_hat_, work.data(), real.data(), out.v);
  for (int c = 0; c < 3; ++c) convolve_into(u_hat.data(), g_hat_[c], work.data(), real.data(), out.grad[c]);
  return out;
}

std::vector<double> FreeSpacePoisson::solve_value(const DensityField& u) const {
  if (!(u.grid == grid_)) throw Error(ErrorCode::InvalidGrid, "density grid differs from solver grid");
  const std::size_t real_size = static_cast<std::size_t>(padded_) * padded_ * padded_;
  FftwBuffer<double> real(real_size);
  FftwBuffer<std::complex<double>> u_hat(spectral_size_);
  FftwBuffer<std::complex<double>> work(spectral_size_);
  forward_padded(u, u_hat.data(), real.data());
  std::vector<double> v;
  convolve_into(u_hat.data(), k_hat_, work.data(), real.data(), v);
  return v;
}

std::shared_ptr<const FreeSpacePoisson> cached_poisson(const Grid3& grid) {
  static std::mutex mutex;
  static std::vector<std::shared_ptr<const FreeSpacePoisson>> cache;
  constexpr std::size_t kMaxEntries = 4;

  std::lock_guard lock(mutex);
  for (const auto& s : cache) {
    if (s->grid() == grid) return s;
  }
  auto solver = std::make_shared<const FreeSpacePoisson>(grid);
  if (cache.size() >= kMaxEntries) cache.erase(cache.begin());
  cache.push_back(solver);
  return solver;
}

PotentialField solve_potential_fast(const DensityField& u) { return cached_poisson(u.grid)->solve(u); }

PotentialField solve_potential_direct(const DensityField& u) {
  const Grid3& g = u.grid;
  const int n = g.n();
  if (n > 24) throw Error(ErrorCode::TooLarge, "direct quadrature limited to 24^3 grids");
  const double h = g.h();
  const double w = g.cell_volume();

  // Offset tables over [-(n-1), n-1]^3.
  const int span = 2 * n - 1;
  auto toff = [n, span](int dx, int dy, int dz) {
    return (static_cast<std::size_t>(dx + n - 1) * span + (dy + n - 1)) * span + (dz + n - 1);
  };
  const std::size_t tsize = static_cast<std::size_t>(span) * span * span;
  std::vector<double> kt(tsize);
  std::vector<double> gt(3 * tsize);
  for (int dx = -(n - 1); dx < n; ++dx)
    for (int dy = -(n - 1); dy < n; ++dy)
      for (int dz = -(n - 1); dz < n; ++dz) {
        const std::size_t o = toff(dx, dy, dz);
        kt[o] = kernel_table_entry(dx, dy, dz, h);
        grad_kernel_table_entry(dx, dy, dz, h, &gt[3 * o]);
      }

  PotentialField out(g);
#pragma omp parallel for
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
              const double s = u.values[g.index(a, b, c)];
              if (s == 0.0) continue;
              const std::size_t o = toff(i - a, j - b, k - c);
              v += s * kt[o];
              gx += s * gt[3 * o];
              gy += s * gt[3 * o + 1];
              gz += s * gt[3 * o + 2];
            }
          }
        }
        const std::size_t idx = g.index(i, j, k);
        out.v[idx] = w * v;
        out.grad[0][idx] = w * gx;
        out.grad[1][idx] = w * gy;
        out.grad[2][idx] = w * gz;
      }
    }
  }
  return out;
}

}  // namespace kst
