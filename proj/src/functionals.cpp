#include "kst/functionals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "kst/error.hpp"

namespace kst {

namespace {

constexpr double kBoundaryLeakLimit = 1e-4;

template <typename F>
double cell_sum(const DensityField& u, F&& weight) {
  const Grid3& g = u.grid;
  const int n = g.n();
  double total = 0.0;
#pragma omp parallel for reduction(+ : total)
  for (int i = 0; i < n; ++i) {
    const double x = g.center(i);
    for (int j = 0; j < n; ++j) {
      const double y = g.center(j);
      for (int k = 0; k < n; ++k) {
        const double val = u.values[g.index(i, j, k)];
        if (val != 0.0) total += val * weight(x, y, g.center(k));
      }
    }
  }
  return total * g.cell_volume();
}

void require_spd3(const Matrix& b) {
  if (b.rows() != 3 || b.cols() != 3) throw Error(ErrorCode::NotSPD, "weight matrix must be 3x3");
  const double scale = b.norm();
  if (!((b - b.transpose()).norm() <= 1e-12 * scale)) throw Error(ErrorCode::NotSPD, "weight matrix not symmetric");
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotSPD, "weight matrix not positive definite");
}

void require_grid_flux(const FluxTensor& flux) {
  if (flux.n() != 3) throw Error(ErrorCode::BadParameter, "grid functionals need a 3x3 flux tensor");
}

}  // namespace

double mass(const DensityField& u) {
  return cell_sum(u, [](double, double, double) { return 1.0; });
}

double second_moment(const DensityField& u) {
  return cell_sum(u, [](double x, double y, double z) { return x * x + y * y + z * z; });
}

double weighted_moment(const DensityField& u, const Matrix& b) {
  require_spd3(b);
  const double b00 = b(0, 0), b11 = b(1, 1), b22 = b(2, 2);
  const double b01 = b(0, 1) + b(1, 0), b02 = b(0, 2) + b(2, 0), b12 = b(1, 2) + b(2, 1);
  return cell_sum(u, [=](double x, double y, double z) {
    return b00 * x * x + b11 * y * y + b22 * z * z + b01 * x * y + b02 * x * z + b12 * y * z;
  });
}

double sup_norm(const DensityField& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const DensityField& u) {
  return u.values.empty() ? 0.0 : *std::min_element(u.values.begin(), u.values.end());
}

double lq_norm(const DensityField& u, double q) {
  if (!(q >= 1.0)) throw Error(ErrorCode::BadParameter, "lq_norm needs q >= 1");
  double s = 0.0;
  for (double v : u.values) s += std::pow(std::abs(v), q);
  return std::pow(s * u.grid.cell_volume(), 1.0 / q);
}

double boundary_mass_fraction(const DensityField& u, int shell) {
  const Grid3& g = u.grid;
  const int n = g.n();
  double outer = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double v = u.values[g.index(i, j, k)];
        total += v;
        const int edge = std::min({i, j, k, n - 1 - i, n - 1 - j, n - 1 - k});
        if (edge < shell) outer += v;
      }
    }
  }
  return total > 0.0 ? outer / total : 0.0;
}

double interaction_integral(const DensityField& u, const PotentialField& pot) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) s += u.values[i] * pot.v[i];
  return 4.0 * std::numbers::pi * u.grid.cell_volume() * s;
}

double interaction_integral(const DensityField& u) {
  const auto v = cached_poisson(u.grid)->solve_value(u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) s += u.values[i] * v[i];
  return 4.0 * std::numbers::pi * u.grid.cell_volume() * s;
}

double interaction_integral_direct(const DensityField& u) {
  const Grid3& g = u.grid;
  const int n = g.n();
  if (n > 24) throw Error(ErrorCode::TooLarge, "direct interaction sum limited to 24^3 grids");
  const double h = g.h();
  const double self = 4.0 * std::numbers::pi * self_cell_kernel(h);
  double total = 0.0;
#pragma omp parallel for reduction(+ : total)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double ui = u.values[g.index(i, j, k)];
        if (ui == 0.0) continue;
        double row = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
              const double uj = u.values[g.index(a, b, c)];
              if (uj == 0.0) continue;
              const int dx = i - a, dy = j - b, dz = k - c;
              const int d2 = dx * dx + dy * dy + dz * dz;
              row += uj * (d2 == 0 ? self : 1.0 / (h * std::sqrt(static_cast<double>(d2))));
            }
          }
        }
        total += ui * row;
      }
    }
  }
  const double w = g.cell_volume();
  return total * w * w;
}

BilerCheck biler_check(double mass_value, double moment, double interaction, int n) {
  BilerCheck out;
  out.lhs = std::pow(mass_value, 0.5 * n + 1.0);
  out.rhs = interaction * std::pow(2.0 * moment, 0.5 * n - 1.0);
  out.ok = out.lhs <= out.rhs * (1.0 + 1e-6);
  return out;
}

BilerCheck biler_check(const DensityField& u) {
  const double m0 = mass(u);
  if (!(m0 > 0.0)) throw Error(ErrorCode::ZeroField, "Biler inequality needs a nonzero density");
  return biler_check(m0, second_moment(u), interaction_integral(u), 3);
}

double moment_rhs_identity(const DensityField& u, const PotentialField& pot, const FluxTensor& flux,
                           double chi) {
  require_grid_flux(flux);
  const Matrix& U = flux.u_orth();
  const Grid3& g = u.grid;
  const int n = g.n();
  double drift = 0.0;
#pragma omp parallel for reduction(+ : drift)
  for (int i = 0; i < n; ++i) {
    const double x = g.center(i);
    for (int j = 0; j < n; ++j) {
      const double y = g.center(j);
      for (int k = 0; k < n; ++k) {
        const std::size_t idx = g.index(i, j, k);
        const double val = u.values[idx];
        if (val == 0.0) continue;
        const double z = g.center(k);
        const double gx = pot.grad[0][idx], gy = pot.grad[1][idx], gz = pot.grad[2][idx];
        const double ux = U(0, 0) * gx + U(0, 1) * gy + U(0, 2) * gz;
        const double uy = U(1, 0) * gx + U(1, 1) * gy + U(1, 2) * gz;
        const double uz = U(2, 0) * gx + U(2, 1) * gy + U(2, 2) * gz;
        drift += val * (x * ux + y * uy + z * uz);
      }
    }
  }
  return 2.0 * flux.trace_pinv() * mass(u) + 2.0 * chi * g.cell_volume() * drift;
}

double moment_rhs_identity(const DensityField& u, const FluxTensor& flux, double chi) {
  return moment_rhs_identity(u, solve_potential_fast(u), flux, chi);
}

double moment_rhs_symmetrized_direct(const DensityField& u, const FluxTensor& flux, double chi) {
  require_grid_flux(flux);
  const Grid3& g = u.grid;
  const int n = g.n();
  if (n > 32) throw Error(ErrorCode::TooLarge, "symmetrized double sum limited to 32^3 grids");
  const Matrix& U = flux.u_orth();
  const double h = g.h();

  // q(d) = d.U G(d) for integer offsets, G the discrete gradient kernel.
  const int span = 2 * n - 1;
  std::vector<double> q(static_cast<std::size_t>(span) * span * span, 0.0);
  auto toff = [n, span](int dx, int dy, int dz) {
    return (static_cast<std::size_t>(dx + n - 1) * span + (dy + n - 1)) * span + (dz + n - 1);
  };
  for (int dx = -(n - 1); dx < n; ++dx)
    for (int dy = -(n - 1); dy < n; ++dy)
      for (int dz = -(n - 1); dz < n; ++dz) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const Eigen::Vector3d d(dx * h, dy * h, dz * h);
        Eigen::Vector3d gk;
        grad_kernel_table_entry(dx, dy, dz, h, gk.data());
        q[toff(dx, dy, dz)] = d.dot(U * gk);
      }

  // Nonzero cells only; most test fields have compact support.
  std::vector<std::array<int, 3>> cells;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double v = u.values[g.index(i, j, k)];
        if (v != 0.0) {
          cells.push_back({i, j, k});
          vals.push_back(v);
        }
      }

  const auto count = static_cast<std::ptrdiff_t>(cells.size());
  double pair_sum = 0.0;
#pragma omp parallel for reduction(+ : pair_sum) schedule(dynamic, 64)
  for (std::ptrdiff_t a = 0; a < count; ++a) {
    double row = 0.0;
    for (std::ptrdiff_t b = 0; b < count; ++b) {
      row += vals[b] * q[toff(cells[a][0] - cells[b][0], cells[a][1] - cells[b][1], cells[a][2] - cells[b][2])];
    }
    pair_sum += vals[a] * row;
  }
  const double w = g.cell_volume();
  return 2.0 * flux.trace_pinv() * mass(u) + chi * w * w * pair_sum;
}

double moment_rhs_bound(double w, double mass_value, const FluxTensor& flux, double chi, int n) {
  if (!(w > 0.0)) throw Error(ErrorCode::NonPositiveMoment, "moment bound needs w > 0");
  if (!(mass_value > 0.0)) throw Error(ErrorCode::NonPositiveMoment, "moment bound needs M > 0");
  if (flux.n() != n) throw Error(ErrorCode::BadParameter, "flux tensor dimension differs from n");
  const double half = 0.5 * n;
  const double attraction = std::pow(2.0, 1.0 - half) * chi * flux.kappa() * std::pow(mass_value, half + 1.0) /
                            (n * unit_ball_volume(n));
  return 2.0 * flux.trace_pinv() * mass_value -
         attraction * std::pow(flux.lam_min(), half - 1.0) * std::pow(w, 1.0 - half);
}

GradvBound gradv_sup_bound(double mass_value, double sup, int n, std::optional<double> gamma) {
  if (!(mass_value > 0.0) || !(sup > 0.0)) {
    throw Error(ErrorCode::ZeroField, "gradient bound needs positive mass and sup norm");
  }
  const double n_omega = n * unit_ball_volume(n);
  GradvBound out;
  if (gamma) {
    if (!(*gamma > 0.0)) throw Error(ErrorCode::BadParameter, "gamma must be positive");
    out.gamma_used = *gamma;
  } else {
    out.gamma_used = std::pow((n - 1) * mass_value / (n_omega * sup), 1.0 / n);
  }
  out.bound = out.gamma_used * sup + std::pow(out.gamma_used, 1.0 - n) * mass_value / n_omega;
  return out;
}

GradvBound gradv_sup_bound(const DensityField& u, std::optional<double> gamma) {
  return gradv_sup_bound(mass(u), sup_norm(u), 3, gamma);
}

double gradv_sup(const PotentialField& pot) {
  double m = 0.0;
  for (std::size_t i = 0; i < pot.v.size(); ++i) {
    const double gx = pot.grad[0][i], gy = pot.grad[1][i], gz = pot.grad[2][i];
    m = std::max(m, gx * gx + gy * gy + gz * gz);
  }
  return std::sqrt(m);
}

DiagnosticsRecord measure(double t, const DensityField& u, const PotentialField& pot, const FluxTensor& flux,
                          double chi) {
  DiagnosticsRecord r;
  r.t = t;
  r.mass = mass(u);
  r.m2 = second_moment(u);
  r.w = weighted_moment(u, flux.p_inv());
  r.J = interaction_integral(u, pot);
  r.linf = sup_norm(u);
  r.lq = lq_norm(u, 1.5);
  r.gradv_sup = gradv_sup(pot);
  r.dwdt_measured = std::numeric_limits<double>::quiet_NaN();
  r.dwdt_rhs = moment_rhs_identity(u, pot, flux, chi);
  r.dwdt_bound = (r.w > 0.0 && r.mass > 0.0) ? moment_rhs_bound(r.w, r.mass, flux, chi, 3)
                                              : std::numeric_limits<double>::quiet_NaN();
  r.boundary_mass_fraction = boundary_mass_fraction(u);
  r.min_value = min_value(u);
  r.boundary_ok = r.boundary_mass_fraction <= kBoundaryLeakLimit;
  return r;
}

void fill_dwdt_measured(std::vector<DiagnosticsRecord>& records) {
  const std::size_t n = records.size();
  if (n < 2) {
    for (auto& r : records) r.dwdt_measured = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  if (n == 2) {
    const double d = (records[1].w - records[0].w) / (records[1].t - records[0].t);
    records[0].dwdt_measured = records[1].dwdt_measured = d;
    return;
  }
  // Derivative at t[c] of the quadratic through samples a, b, c (any order).
  auto three_point = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t at) {
    const double ta = records[a].t, tb = records[b].t, tc = records[c].t, t = records[at].t;
    const double la = ((t - tb) + (t - tc)) / ((ta - tb) * (ta - tc));
    const double lb = ((t - ta) + (t - tc)) / ((tb - ta) * (tb - tc));
    const double lc = ((t - ta) + (t - tb)) / ((tc - ta) * (tc - tb));
    return la * records[a].w + lb * records[b].w + lc * records[c].w;
  };
  records[0].dwdt_measured = three_point(0, 1, 2, 0);
  for (std::size_t k = 1; k + 1 < n; ++k) records[k].dwdt_measured = three_point(k - 1, k, k + 1, k);
  records[n - 1].dwdt_measured = three_point(n - 3, n - 2, n - 1, n - 1);
}

std::string csv_header() {
  return "t,mass,m2,w,J,linf,lq,gradv_sup,dwdt_measured,dwdt_rhs,dwdt_bound,boundary_mass_fraction";
}

std::string to_csv_row(const DiagnosticsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g", r.t,
                r.mass, r.m2, r.w, r.J, r.linf, r.lq, r.gradv_sup, r.dwdt_measured, r.dwdt_rhs, r.dwdt_bound,
                r.boundary_mass_fraction);
  return buf;
}

}  // namespace kst
