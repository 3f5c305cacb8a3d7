#include "kst/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "kst/error.hpp"
#include "kst/functionals.hpp"
#include "kst/matrixflux.hpp"
#include "kst/potential.hpp"
#include "kst/solver.hpp"
#include "kst/thresholds.hpp"

namespace kst {

namespace {

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

DensityField sample(const Grid3& g, double target_mass, const std::function<double(double, double, double)>& f) {
  DensityField u(g);
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) u.at(i, j, k) = f(g.center(i), g.center(j), g.center(k));
  const double m = mass(u);
  for (double& v : u.values) v *= target_mass / m;
  return u;
}

DensityField ball(const Grid3& g, double mass_value, double r, double cx, double cy, double cz) {
  InitialData d;
  d.kind = InitialData::Kind::Ball;
  d.mass = mass_value;
  d.radius = r;
  d.center = {cx, cy, cz};
  return make_initial_data(d, g);
}

DensityField random_smoothed(const Grid3& g, unsigned seed, int bumps, double spread, double aniso) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> pos(0.0, spread);
  std::uniform_real_distribution<double> width(0.3, 0.8);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  struct Bump {
    double x, y, z, s, w;
  };
  std::vector<Bump> b;
  for (int i = 0; i < bumps; ++i) b.push_back({pos(rng), pos(rng), aniso * pos(rng), width(rng), weight(rng)});
  return sample(g, 1.0, [&](double x, double y, double z) {
    double acc = 0.0;
    for (const auto& q : b) {
      const double r2 = (x - q.x) * (x - q.x) + (y - q.y) * (y - q.y) + (z - q.z) * (z - q.z);
      acc += q.w * std::exp(-0.5 * r2 / (q.s * q.s)) / (q.s * q.s * q.s);
    }
    return acc;
  });
}

std::vector<FluxTensor> identity_fluxes() {
  Matrix skew_axis(3, 3);
  // Rotation by 1 rad about (1, 1, 1)/sqrt3 (Rodrigues), scaled by an SPD factor.
  const double c = std::cos(1.0), s = std::sin(1.0), t = 1.0 - c, k = 1.0 / std::sqrt(3.0);
  skew_axis << c + t * k * k, t * k * k - s * k, t * k * k + s * k,
      t * k * k + s * k, c + t * k * k, t * k * k - s * k,
      t * k * k - s * k, t * k * k + s * k, c + t * k * k;
  Matrix spd(3, 3);
  spd << 2.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 0.7;
  Matrix diag = Matrix::Zero(3, 3);
  diag.diagonal() << 1.0, 2.0, 0.5;
  return {FluxTensor::from_matrix(Matrix::Identity(3, 3)), FluxTensor::from_matrix(rotation_z(std::numbers::pi / 4)),
          FluxTensor::from_matrix(diag * rotation_z(std::numbers::pi / 3)), FluxTensor::from_matrix(spd * skew_axis)};
}

double rel_max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

DensityField gaussian_density(const Grid3& grid, double mass_value, double sx, double sy, double sz, double cx,
                              double cy, double cz) {
  InitialData d;
  d.mass = mass_value;
  d.sigma = {sx, sy, sz};
  d.center = {cx, cy, cz};
  return make_initial_data(d, grid);
}

std::vector<SuiteDensity> density_suite() {
  const Grid3 g8(64, 8.0);
  const Grid3 g12(64, 12.0);
  std::vector<SuiteDensity> s;
  s.push_back({"gaussian_s1", gaussian_density(g8, 1.0, 1.0, 1.0, 1.0)});
  s.push_back({"gaussian_s0.5_M2", gaussian_density(g8, 2.0, 0.5, 0.5, 0.5)});
  s.push_back({"gaussian_offset", gaussian_density(g8, 1.0, 0.8, 0.8, 0.8, 1.5, -1.0, 0.5)});
  s.push_back({"gaussian_prolate", gaussian_density(g12, 1.0, 0.45, 0.45, 2.25)});
  {
    InitialData d;
    d.sigma = {0.5, 1.5, 0.8};
    d.orientation = rotation_z(0.7);
    d.mass = 3.0;
    s.push_back({"gaussian_rotated", make_initial_data(d, g8)});
  }
  s.push_back({"ball_r1", ball(g8, 1.0, 1.0, 0.0, 0.0, 0.0)});
  s.push_back({"ball_r2.5_offset", ball(g8, 0.5, 2.5, -1.0, 0.5, 0.0)});
  s.push_back({"shell", sample(g8, 1.0, [](double x, double y, double z) {
                 const double r = std::sqrt(x * x + y * y + z * z);
                 return std::exp(-0.5 * (r - 3.0) * (r - 3.0) / 0.09);
               })});
  s.push_back({"cube", sample(g8, 1.0, [](double x, double y, double z) {
                 return std::max({std::abs(x), std::abs(y), std::abs(z)}) <= 1.5 ? 1.0 : 0.0;
               })});
  s.push_back({"two_gaussians", sample(g8, 1.0, [](double x, double y, double z) {
                 const double a = (x - 2.5) * (x - 2.5) + y * y + z * z;
                 const double b = (x + 2.0) * (x + 2.0) + (y - 1.0) * (y - 1.0) + z * z;
                 return std::exp(-a / (2 * 0.36)) + 0.25 * std::exp(-b / (2 * 0.81));
               })});
  s.push_back({"random_smoothed_7", random_smoothed(g8, 7, 20, 1.5, 1.0)});
  s.push_back({"random_smoothed_11", random_smoothed(g12, 11, 30, 2.0, 0.4)});
  return s;
}

bool SuiteReport::pass() const {
  return std::all_of(cases.begin(), cases.end(), [](const CaseResult& c) { return c.pass; });
}

SuiteReport verify_potential_oracle() {
  SuiteReport r{"potential-oracle", {}};
  const Grid3 g16(16, 1.0);
  for (unsigned seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    DensityField u(g16);
    for (double& v : u.values) v = dist(rng);
    const PotentialField fast = solve_potential_fast(u);
    const PotentialField direct = solve_potential_direct(u);
    double err = rel_max_diff(fast.v, direct.v);
    for (int d = 0; d < 3; ++d) err = std::max(err, rel_max_diff(fast.grad[d], direct.grad[d]));
    const double tol = 1e-10;
    r.cases.push_back({"random16_seed" + std::to_string(seed), 1.0 - err / tol, err <= tol,
                       fmt("rel_err=%.3e tol=%.0e", err, tol)});
  }

  // Closed form for a unit Gaussian of width sigma: v = M erf(r/(sqrt2 s)) / (4 pi r).
  const double sigma = 1.0;
  const Grid3 g64(64, 8.0 * sigma);
  DensityField u(g64);
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -1.5);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      for (int k = 0; k < 64; ++k) {
        const double x = g64.center(i), y = g64.center(j), z = g64.center(k);
        u.at(i, j, k) = norm * std::exp(-0.5 * (x * x + y * y + z * z) / (sigma * sigma));
      }
  const PotentialField pot = solve_potential_fast(u);
  std::vector<double> v_exact(g64.size());
  std::array<std::vector<double>, 3> g_exact;
  for (auto& c : g_exact) c.resize(g64.size());
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      for (int k = 0; k < 64; ++k) {
        const double x[3] = {g64.center(i), g64.center(j), g64.center(k)};
        const double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        const double q = rr / (std::sqrt(2.0) * sigma);
        const double enclosed = std::erf(q) - 2.0 / std::sqrt(std::numbers::pi) * q * std::exp(-q * q);
        const std::size_t idx = g64.index(i, j, k);
        v_exact[idx] = std::erf(q) / (4.0 * std::numbers::pi * rr);
        for (int d = 0; d < 3; ++d) g_exact[d][idx] = -enclosed * x[d] / (4.0 * std::numbers::pi * rr * rr * rr);
      }
  const double tol = 1e-2;
  const double ev = rel_max_diff(pot.v, v_exact);
  r.cases.push_back({"gaussian64_v", 1.0 - ev / tol, ev <= tol, fmt("rel_err=%.3e tol=%.0e", ev, tol)});
  double eg = 0.0;
  for (int d = 0; d < 3; ++d) eg = std::max(eg, rel_max_diff(pot.grad[d], g_exact[d]));
  r.cases.push_back({"gaussian64_grad", 1.0 - eg / tol, eg <= tol, fmt("rel_err=%.3e tol=%.0e", eg, tol)});
  return r;
}

SuiteReport verify_biler() {
  SuiteReport r{"biler", {}};
  for (const auto& d : density_suite()) {
    const BilerCheck b = biler_check(d.u);
    r.cases.push_back({d.name, b.rhs / b.lhs - 1.0, b.ok, fmt("lhs=%.6g rhs=%.6g", b.lhs, b.rhs)});
  }
  return r;
}

SuiteReport verify_gradv_bound() {
  SuiteReport r{"gradv-bound", {}};
  for (const auto& d : density_suite()) {
    const PotentialField pot = solve_potential_fast(d.u);
    const double measured = gradv_sup(pot);
    const GradvBound b = gradv_sup_bound(d.u);
    r.cases.push_back({d.name, b.bound / measured - 1.0, measured <= b.bound,
                       fmt("measured=%.6g bound=%.6g", measured, b.bound)});
  }
  return r;
}

SuiteReport verify_moment_identity() {
  SuiteReport r{"moment-identity", {}};
  const auto fluxes = identity_fluxes();
  const double slack = 0.02;
  for (const auto& d : density_suite()) {
    const PotentialField pot = solve_potential_fast(d.u);
    const double m = mass(d.u);
    for (std::size_t f = 0; f < fluxes.size(); ++f) {
      const double w = weighted_moment(d.u, fluxes[f].p_inv());
      for (double chi : {1.0, 20.0}) {
        const double lhs = moment_rhs_identity(d.u, pot, fluxes[f], chi);
        const double bound = moment_rhs_bound(w, m, fluxes[f], chi, 3);
        const double allowed = bound + slack * std::abs(bound);
        char name[96];
        std::snprintf(name, sizeof name, "%s/A%zu/chi%g", d.name.c_str(), f, chi);
        r.cases.push_back({name, (allowed - lhs) / std::abs(bound), lhs <= allowed,
                           fmt("identity=%.6g bound=%.6g", lhs, bound)});
      }
    }
  }

  // The FFT form and the pair-symmetrized double sum agree on coarse grids.
  const Grid3 g16(16, 5.0);
  std::vector<SuiteDensity> coarse;
  coarse.push_back({"coarse_gaussian", gaussian_density(g16, 1.0, 0.6, 0.5, 0.7, 0.3, 0.0, -0.2)});
  coarse.push_back({"coarse_random", random_smoothed(g16, 5, 6, 0.7, 1.0)});
  for (const auto& d : coarse) {
    for (std::size_t f = 0; f < fluxes.size(); ++f) {
      const double fast = moment_rhs_identity(d.u, fluxes[f], 3.0);
      const double direct = moment_rhs_symmetrized_direct(d.u, fluxes[f], 3.0);
      const double scale = 2.0 * fluxes[f].trace_pinv() * mass(d.u);
      const double err = std::abs(fast - direct) / scale;
      const double tol = 1e-10;
      char name[96];
      std::snprintf(name, sizeof name, "%s/A%zu/symmetrized", d.name.c_str(), f);
      r.cases.push_back({name, 1.0 - err / tol, err <= tol, fmt("fast=%.12g direct=%.12g", fast, direct)});
    }
  }
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"potential-oracle", "biler", "gradv-bound", "moment-identity"};
  return names;
}

std::vector<SuiteReport> run_suites(const std::string& name) {
  std::vector<SuiteReport> out;
  auto one = [&](const std::string& s) {
    if (s == "potential-oracle") out.push_back(verify_potential_oracle());
    else if (s == "biler") out.push_back(verify_biler());
    else if (s == "gradv-bound") out.push_back(verify_gradv_bound());
    else if (s == "moment-identity") out.push_back(verify_moment_identity());
    else throw Error(ErrorCode::BadParameter, "unknown suite '" + s + "'");
  };
  if (name == "all") {
    for (const auto& s : suite_names()) one(s);
  } else {
    one(name);
  }
  return out;
}

CnCalibration calibrate_cn() {
  const Grid3 g(64, 8.0);
  const double sigmas[][3] = {{1.0, 1.0, 1.0}, {1.0, 1.0, 0.7}, {1.0, 0.7, 0.7}, {1.0, 1.0, 0.5},
                              {1.0, 0.5, 0.5}, {1.0, 0.7, 0.4}, {1.0, 0.5, 0.3}, {1.0, 1.0, 0.3}};
  CnCalibration c;
  c.c_n = std::numeric_limits<double>::infinity();
  for (const auto& s : sigmas) {
    char name[64];
    std::snprintf(name, sizeof name, "gaussian_%g_%g_%g", s[0], s[1], s[2]);
    InitialData d;
    d.sigma = {s[0], s[1], s[2]};
    d.orientation = rotation_z(0.4);
    const double ratio = compatibility_ratio(make_initial_data(d, g));
    c.samples.push_back({name, ratio, true, {}});
    c.c_n = std::min(c.c_n, ratio);
  }
  for (double radius : {1.5, 3.0, 5.0}) {
    const double ratio = compatibility_ratio(ball(g, 1.0, radius, 0.0, 0.0, 0.0));
    c.samples.push_back({"ball_r" + fmt("%g", radius, 0.0), ratio, true, {}});
    c.c_n = std::min(c.c_n, ratio);
  }
  return c;
}

}  // namespace kst
