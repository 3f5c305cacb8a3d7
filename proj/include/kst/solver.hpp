#pragma once

// Time integration of u_t = Lap u - chi div(u A grad v), -Lap v = u on a 3-D
// grid. One step is first-order splitting: conservative face-upwind advection
// by b = chi A grad v, then exact diffusion of the 7-point Laplacian on the
// box with reflecting walls. Both stages keep u >= 0 and conserve mass.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kst/config.hpp"
#include "kst/functionals.hpp"
#include "kst/grid.hpp"
#include "kst/heat.hpp"
#include "kst/matrixflux.hpp"
#include "kst/potential.hpp"

namespace kst {

/// Samples the descriptor on `grid`. With epsilon set, the analytic profile
/// eps^{-3} u0(x/eps) is evaluated directly. The sampled shape is scaled so
/// the discrete mass equals the descriptor mass. Throws SupportTooLarge when
/// more than 1e-6 of the mass falls in the outer two cell layers.
DensityField make_initial_data(const InitialData& descriptor, const Grid3& grid,
                               std::optional<double> epsilon = std::nullopt);

class Stepper {
 public:
  Stepper(const Grid3& grid, const FluxTensor& flux, double chi);

  const Grid3& grid() const { return grid_; }
  double chi() const { return chi_; }

  PotentialField potential(const DensityField& u) const;

  /// Largest dt keeping the upwind stage positive and |b| dt <= h
  /// (infinite when b vanishes).
  double stable_dt(const PotentialField& pot) const;

  /// Advances u by dt using the potential of u. Throws CflViolation when dt
  /// exceeds stable_dt(pot).
  DensityField step(const DensityField& u, const PotentialField& pot, double dt) const;

  /// Clamped round-off negatives since construction.
  std::size_t clamp_events() const { return clamp_events_; }

 private:
  void advect(const DensityField& u, const PotentialField& pot, double dt, std::vector<double>& out) const;

  Grid3 grid_;
  Matrix a_;
  double chi_;
  std::shared_ptr<const FreeSpacePoisson> poisson_;
  std::shared_ptr<const HeatPropagator> heat_;
  mutable std::size_t clamp_events_ = 0;
};

/// One step with a freshly computed potential.
DensityField step(const DensityField& u, const FluxTensor& flux, double chi, double dt);

enum class RunStatus { CompletedToTEnd, NumericalBlowup, Aborted };
const char* to_string(RunStatus s);

struct BlowupEvidence {
  std::string trigger;  // "sup_growth" or "dt_floor"
  double dt_at_stop = 0.0;
  double sup_growth = 0.0;  // ||u||_inf / ||u0||_inf at stop
};

struct SimOutcome {
  RunStatus status = RunStatus::Aborted;
  double t_final = 0.0;
  std::size_t steps = 0;
  double chi = 0.0;  // value actually used (after calibration)
  std::vector<DiagnosticsRecord> records;
  std::optional<BlowupEvidence> evidence;
  double max_mass_drift = 0.0;  // max_t |M(t) - M(0)| / M(0) over every step
  double min_value_seen = 0.0;  // min_t min_x u over every step
  std::size_t clamp_events = 0;
  std::string message;
};

/// Chemotactic sensitivity for which m0 = ratio * C_Bl(chi) * M^3 (n = 3).
/// Throws HypothesisViolated when the flux fails the attraction hypothesis.
double calibrate_chi(double m0, double mass, const FluxTensor& flux, double ratio);

/// Runs to t_end or until numerical blow-up (||u||_inf >= blowup_factor ||u0||_inf,
/// or a stability-limited dt below dt_min). A non-finite field ends the run
/// with status Aborted. Snapshots are written when output_dir and
/// snapshot_times are set. Throws ConfigInvalid for invalid configs.
SimOutcome run(const SimConfig& config, const std::function<void(const DiagnosticsRecord&)>& on_record = {});

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);
void write_outcome(const std::filesystem::path& path, const SimOutcome& outcome);

}  // namespace kst
