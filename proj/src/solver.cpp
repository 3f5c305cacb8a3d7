#include "kst/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "kst/error.hpp"
#include "kst/snapshot.hpp"
#include "kst/thresholds.hpp"

namespace kst {

namespace {

constexpr double kSupportLeakLimit = 1e-6;
// Negative round-off below this fraction of ||u||_inf is clamped (and counted).
constexpr double kClampFraction = 1e-13;

}  // namespace

DensityField make_initial_data(const InitialData& d, const Grid3& grid, std::optional<double> epsilon) {
  if (!(d.mass > 0.0)) throw Error(ErrorCode::BadParameter, "initial mass must be positive");
  if (epsilon && !(*epsilon > 0.0)) throw Error(ErrorCode::BadParameter, "epsilon must be positive");

  DensityField u(grid);
  if (d.kind == InitialData::Kind::File) {
    if (epsilon) throw Error(ErrorCode::BadParameter, "epsilon applies to analytic initial data only");
    Snapshot s = read_snapshot(d.file);
    if (!(s.grid == grid)) throw Error(ErrorCode::ConfigInvalid, "snapshot grid differs from the configured grid");
    for (double v : s.values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::BadParameter, "snapshot has negative or non-finite values");
    u.values = std::move(s.values);
  } else {
    // eps^{-3} u0(x/eps): the profile with every length multiplied by eps; the
    // eps^{-3} factor is absorbed by the mass normalization below.
    const double eps = epsilon.value_or(1.0);
    const Eigen::Matrix3d orient = d.orientation;
    const Eigen::Vector3d c(d.center[0] * eps, d.center[1] * eps, d.center[2] * eps);
    const Eigen::Vector3d inv_var(1.0 / (d.sigma[0] * d.sigma[0] * eps * eps),
                                  1.0 / (d.sigma[1] * d.sigma[1] * eps * eps),
                                  1.0 / (d.sigma[2] * d.sigma[2] * eps * eps));
    const double r2 = d.radius * d.radius * eps * eps;
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const Eigen::Vector3d y = orient * (Eigen::Vector3d(grid.center(i), grid.center(j), grid.center(k)) - c);
          double val;
          if (d.kind == InitialData::Kind::Gaussian) {
            val = std::exp(-0.5 * y.cwiseProduct(y).dot(inv_var));
          } else {
            val = y.squaredNorm() <= r2 ? 1.0 : 0.0;
          }
          u.at(i, j, k) = val;
        }
  }

  const double raw_mass = mass(u);
  if (!(raw_mass > 0.0)) throw Error(ErrorCode::BadParameter, "initial profile has no mass on the grid");
  if (d.kind != InitialData::Kind::File) {
    const double scale = d.mass / raw_mass;
    for (double& v : u.values) v *= scale;
  }
  const double leak = boundary_mass_fraction(u);
  if (leak > kSupportLeakLimit) {
    throw Error(ErrorCode::SupportTooLarge,
                "initial data puts a fraction " + std::to_string(leak) + " of its mass in the boundary layer");
  }
  return u;
}

Stepper::Stepper(const Grid3& grid, const FluxTensor& flux, double chi)
    : grid_(grid),
      a_(flux.a()),
      chi_(chi),
      poisson_(cached_poisson(grid)),
      heat_(std::make_shared<const HeatPropagator>(grid)) {
  if (flux.n() != 3) throw Error(ErrorCode::BadParameter, "simulation needs a 3x3 flux tensor");
  if (!(chi >= 0.0)) throw Error(ErrorCode::BadParameter, "chi must be >= 0");
}

PotentialField Stepper::potential(const DensityField& u) const { return poisson_->solve(u); }

namespace {

struct Velocity {
  std::array<std::vector<double>, 3> b;
};

Velocity cell_velocity(const Matrix& a, double chi, const PotentialField& pot) {
  const std::size_t n = pot.v.size();
  Velocity out;
  for (auto& c : out.b) c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gx = pot.grad[0][i], gy = pot.grad[1][i], gz = pot.grad[2][i];
    for (int r = 0; r < 3; ++r) out.b[r][i] = chi * (a(r, 0) * gx + a(r, 1) * gy + a(r, 2) * gz);
  }
  return out;
}

// Index stride of axis d in the (i, j, k) layout with k fastest.
std::size_t stride(const Grid3& g, int d) {
  const auto n = static_cast<std::size_t>(g.n());
  return d == 0 ? n * n : (d == 1 ? n : 1);
}

// Position of a cell along axis d.
int coord(const Grid3& g, std::size_t idx, int d) {
  const auto n = static_cast<std::size_t>(g.n());
  return static_cast<int>(d == 0 ? idx / (n * n) : (d == 1 ? (idx / n) % n : idx % n));
}

}  // namespace

double Stepper::stable_dt(const PotentialField& pot) const {
  const Velocity vel = cell_velocity(a_, chi_, pot);
  const int n = grid_.n();
  double max_speed = 0.0;
  double max_outflow = 0.0;
  for (std::size_t idx = 0; idx < grid_.size(); ++idx) {
    const double bx = vel.b[0][idx], by = vel.b[1][idx], bz = vel.b[2][idx];
    max_speed = std::max(max_speed, std::sqrt(bx * bx + by * by + bz * bz));
    double out = 0.0;
    for (int d = 0; d < 3; ++d) {
      const std::size_t s = stride(grid_, d);
      const int c = coord(grid_, idx, d);
      const auto& b = vel.b[d];
      if (c + 1 < n) out += std::max(0.0, 0.5 * (b[idx] + b[idx + s]));
      if (c > 0) out += std::max(0.0, -0.5 * (b[idx - s] + b[idx]));
    }
    max_outflow = std::max(max_outflow, out);
  }
  const double h = grid_.h();
  double dt = std::numeric_limits<double>::infinity();
  if (max_speed > 0.0) dt = std::min(dt, h / max_speed);
  if (max_outflow > 0.0) dt = std::min(dt, h / max_outflow);
  return dt;
}

void Stepper::advect(const DensityField& u, const PotentialField& pot, double dt, std::vector<double>& out) const {
  const Velocity vel = cell_velocity(a_, chi_, pot);
  const int n = grid_.n();
  const double lambda = dt / grid_.h();
  out = u.values;
  const auto& in = u.values;
  for (int d = 0; d < 3; ++d) {
    const std::size_t s = stride(grid_, d);
    const auto& b = vel.b[d];
    // Each line along axis d is independent.
#pragma omp parallel for
    for (int line = 0; line < n * n; ++line) {
      const int p = line / n, q = line % n;
      std::size_t base;
      if (d == 0) base = grid_.index(0, p, q);
      else if (d == 1) base = grid_.index(p, 0, q);
      else base = grid_.index(p, q, 0);
      for (int c = 0; c + 1 < n; ++c) {
        const std::size_t left = base + c * s;
        const std::size_t right = left + s;
        const double face = 0.5 * (b[left] + b[right]);
        const double flux = face > 0.0 ? face * in[left] : face * in[right];
        out[left] -= lambda * flux;
        out[right] += lambda * flux;
      }
    }
  }
}

DensityField Stepper::step(const DensityField& u, const PotentialField& pot, double dt) const {
  if (!(u.grid == grid_)) throw Error(ErrorCode::InvalidGrid, "density grid differs from stepper grid");
  if (!(dt > 0.0)) throw Error(ErrorCode::BadParameter, "dt must be positive");
  const double limit = stable_dt(pot);
  if (dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorCode::CflViolation,
                "dt = " + std::to_string(dt) + " exceeds the advective limit " + std::to_string(limit));
  }
  DensityField next(grid_);
  advect(u, pot, dt, next.values);
  heat_->apply(next.values, dt);

  double sup = 0.0;
  for (double v : next.values) sup = std::max(sup, v);
  const double floor = -kClampFraction * sup;
  double before = 0.0, after = 0.0;
  bool clamped = false;
  for (double& v : next.values) {
    before += v;
    if (v < 0.0 && v >= floor) {
      v = 0.0;
      clamped = true;
    }
    after += v;
  }
  if (clamped) {
    ++clamp_events_;
    // Restore the pre-clamp total so the clamp does not drift the mass.
    if (after > 0.0) {
      const double scale = before / after;
      for (double& v : next.values) v *= scale;
    }
  }
  return next;
}

DensityField step(const DensityField& u, const FluxTensor& flux, double chi, double dt) {
  Stepper stepper(u.grid, flux, chi);
  return stepper.step(u, stepper.potential(u), dt);
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::CompletedToTEnd: return "CompletedToTEnd";
    case RunStatus::NumericalBlowup: return "NumericalBlowup";
    case RunStatus::Aborted: return "Aborted";
  }
  return "Unknown";
}

double calibrate_chi(double m0, double mass_value, const FluxTensor& flux, double ratio) {
  if (!(ratio > 0.0)) throw Error(ErrorCode::BadParameter, "ratio must be positive");
  if (!(m0 > 0.0) || !(mass_value > 0.0)) throw Error(ErrorCode::BadParameter, "calibration needs m0 > 0, M > 0");
  // C_Bl scales as chi^{2/(n-2)} = chi^2 at n = 3.
  const double c1 = blowup_constant(flux, 1.0, 3);
  return std::sqrt(m0 / (ratio * c1 * std::pow(mass_value, 3.0)));
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

SimOutcome run(const SimConfig& config, const std::function<void(const DiagnosticsRecord&)>& on_record) {
  config.validate();
  const FluxTensor flux = FluxTensor::from_matrix(config.a);
  const Grid3 grid(config.n_cells, config.half_width);
  DensityField u = make_initial_data(config.initial, grid, config.epsilon);

  const double mass0 = mass(u);
  double chi = config.chi;
  if (config.chi_admissibility_ratio) {
    chi = calibrate_chi(second_moment(u), mass0, flux, *config.chi_admissibility_ratio);
  }

  SimOutcome out;
  out.chi = chi;
  Stepper stepper(grid, flux, chi);
  PotentialField pot = stepper.potential(u);
  const double sup0 = sup_norm(u);
  out.min_value_seen = min_value(u);

  auto record = [&](double t) {
    out.records.push_back(measure(t, u, pot, flux, chi));
    if (on_record) on_record(out.records.back());
  };

  std::size_t next_snapshot = 0;
  auto maybe_snapshot = [&](double t) {
    if (config.output_dir.empty()) return;
    while (next_snapshot < config.snapshot_times.size() && t >= config.snapshot_times[next_snapshot]) {
      std::filesystem::create_directories(config.output_dir);
      char name[64];
      std::snprintf(name, sizeof name, "u_%03zu", next_snapshot);
      write_snapshot(config.output_dir / name, grid, u.values, t, "u");
      ++next_snapshot;
    }
  };

  double t = 0.0;
  record(t);
  maybe_snapshot(t);
  const double t_tol = 1e-12 * config.t_end;

  while (true) {
    if (t >= config.t_end - t_tol) {
      out.status = RunStatus::CompletedToTEnd;
      break;
    }
    const double dt_stable = config.cfl * stepper.stable_dt(pot);
    if (dt_stable < config.dt_min) {
      out.status = RunStatus::NumericalBlowup;
      out.evidence = BlowupEvidence{"dt_floor", dt_stable, sup_norm(u) / sup0};
      break;
    }
    const double dt = std::min({config.dt_max, dt_stable, config.t_end - t});
    u = stepper.step(u, pot, dt);
    t += dt;
    ++out.steps;
    if (!all_finite(u.values)) {
      out.status = RunStatus::Aborted;
      out.message = "NonFiniteField: non-finite density at t = " + std::to_string(t);
      break;
    }
    pot = stepper.potential(u);

    const double m = mass(u);
    out.max_mass_drift = std::max(out.max_mass_drift, std::abs(m - mass0) / mass0);
    out.min_value_seen = std::min(out.min_value_seen, min_value(u));
    maybe_snapshot(t);

    const double growth = sup_norm(u) / sup0;
    if (growth >= config.blowup_factor) {
      out.status = RunStatus::NumericalBlowup;
      out.evidence = BlowupEvidence{"sup_growth", dt, growth};
      break;
    }
    if (out.steps % static_cast<std::size_t>(config.diag_every) == 0) record(t);
  }

  if (out.status != RunStatus::Aborted && out.records.back().t < t) record(t);
  out.t_final = t;
  out.clamp_events = stepper.clamp_events();
  fill_dwdt_measured(out.records);
  return out;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << csv_header() << "\n";
  for (const auto& r : records) f << to_csv_row(r) << "\n";
}

void write_outcome(const std::filesystem::path& path, const SimOutcome& o) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  char buf[128];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
  };
  f << "status=" << to_string(o.status) << "\n";
  f << "t_final=" << num(o.t_final) << "\n";
  f << "steps=" << o.steps << "\n";
  f << "chi=" << num(o.chi) << "\n";
  f << "records=" << o.records.size() << "\n";
  if (o.evidence) {
    f << "trigger=" << o.evidence->trigger << "\n";
    f << "dt_at_stop=" << num(o.evidence->dt_at_stop) << "\n";
    f << "sup_growth=" << num(o.evidence->sup_growth) << "\n";
  }
  f << "max_mass_drift=" << num(o.max_mass_drift) << "\n";
  f << "min_value=" << num(o.min_value_seen) << "\n";
  f << "clamp_events=" << o.clamp_events << "\n";
  if (!o.message.empty()) f << "message=" << o.message << "\n";
}

}  // namespace kst
