#include "kst/solver.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kst/snapshot.hpp"
#include "kst/suites.hpp"
#include "kst/thresholds.hpp"
#include "test_util.hpp"

using namespace kst;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig small_config() {
  SimConfig c;
  c.n_cells = 32;
  c.half_width = 6.0;
  c.initial.sigma = {1.0, 1.0, 1.0};
  c.t_end = 0.2;
  c.dt_max = 0.01;
  c.diag_every = 2;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(InitialData, GaussianBallAndRescaling) {
  const Grid3 g(64, 8.0);
  InitialData d;
  d.sigma = {0.5, 0.5, 0.5};
  const DensityField u = make_initial_data(d, g);
  EXPECT_NEAR(mass(u), 1.0, 1e-6);
  EXPECT_NEAR(second_moment(u), 3 * 0.25, 0.01 * 0.75);

  InitialData b;
  b.kind = InitialData::Kind::Ball;
  b.radius = 1.0;
  EXPECT_NEAR(second_moment(make_initial_data(b, Grid3(64, 4.0))), 0.6, 0.02 * 0.6);

  InitialData w;
  w.mass = 2.0;
  w.sigma = {1.0, 0.8, 1.2};
  w.center = {0.5, 0.0, -0.5};
  const DensityField base = make_initial_data(w, g);
  const DensityField half = make_initial_data(w, g, 0.5);
  EXPECT_NEAR(mass(half), mass(base), 1e-12);
  EXPECT_NEAR(second_moment(half) / second_moment(base), 0.25, 1e-6);
}

TEST(InitialData, Errors) {
  const Grid3 g(32, 4.0);
  InitialData d;
  d.sigma = {2.0, 2.0, 2.0};
  EXPECT_KST_ERROR(make_initial_data(d, g), SupportTooLarge);
  d.sigma = {1.0, 1.0, 1.0};
  d.mass = 0.0;
  EXPECT_KST_ERROR(make_initial_data(d, g), BadParameter);
  d.mass = 1.0;
  EXPECT_KST_ERROR(make_initial_data(d, g, -1.0), BadParameter);
}

TEST(InitialData, FromSnapshot) {
  test::TempDir dir("snap");
  const Grid3 g(16, 2.0);
  const DensityField u = gaussian_density(g, 1.5, 0.25, 0.25, 0.25);
  write_snapshot(dir.path() / "u0", g, u.values, 0.0, "u");
  InitialData d;
  d.kind = InitialData::Kind::File;
  d.file = dir.path() / "u0";
  const DensityField back = make_initial_data(d, g);
  EXPECT_EQ(back.values, u.values);
  EXPECT_KST_ERROR(make_initial_data(d, Grid3(16, 3.0)), ConfigInvalid);
}

TEST(Snapshot, RoundTripAndErrors) {
  test::TempDir dir("snap2");
  const Grid3 g(16, 1.5);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i) - 3.0;
  write_snapshot(dir.path() / "s", g, v, 0.125, "v");
  const Snapshot s = read_snapshot(dir.path() / "s");
  EXPECT_TRUE(s.grid == g);
  EXPECT_EQ(s.time, 0.125);
  EXPECT_EQ(s.field, "v");
  EXPECT_EQ(s.values, v);
  EXPECT_EQ(std::filesystem::file_size(dir.path() / "s.raw"), g.size() * sizeof(double));
  EXPECT_KST_ERROR(read_snapshot(dir.path() / "missing"), IoError);
  std::filesystem::resize_file(dir.path() / "s.raw", 100);
  EXPECT_KST_ERROR(read_snapshot(dir.path() / "s"), ParseError);
}

TEST(Step, PureDiffusionWidensGaussian) {
  const Grid3 g(64, 8.0);
  const FluxTensor f = FluxTensor::from_matrix(Matrix::Identity(3, 3));
  DensityField u = gaussian_density(g, 1.0, 1.0, 1.0, 1.0);
  const double var0 = second_moment(u) / 3.0;
  const double dt = 0.05;
  for (int s = 1; s <= 4; ++s) {
    u = step(u, f, 0.0, dt);
    EXPECT_NEAR(second_moment(u) / 3.0, var0 + 2.0 * dt * s, 0.005 * (var0 + 2.0 * dt * s));
  }
  // Heat kernel: variance 1 + 2t, sampled half a cell off the peak in each axis.
  const double s2 = 1.0 + 2.0 * 0.2;
  const double peak = std::pow(2 * kPi * s2, -1.5) * std::exp(-3.0 * 0.125 * 0.125 / (2.0 * s2));
  EXPECT_NEAR(sup_norm(u), peak, 0.005 * peak);
}

TEST(Step, ZeroFieldStaysZero) {
  const Grid3 g(16, 1.0);
  const DensityField z(g);
  const DensityField out = step(z, FluxTensor::from_matrix(rotation_z(0.3)), 5.0, 0.1);
  for (double v : out.values) EXPECT_EQ(v, 0.0);
}

TEST(Step, ConservesMassAndPositivity) {
  const Grid3 g(32, 5.0);
  const FluxTensor f = FluxTensor::from_matrix(rotation_z(kPi / 4));
  const double chi = 200.0;
  Stepper stepper(g, f, chi);
  DensityField u = gaussian_density(g, 1.0, 0.7, 0.5, 0.6, 0.2, -0.1, 0.0);
  const double m0 = mass(u);
  for (int s = 0; s < 10; ++s) {
    const PotentialField pot = stepper.potential(u);
    const double dt = 0.9 * stepper.stable_dt(pot);
    u = stepper.step(u, pot, dt);
    EXPECT_LE(std::abs(mass(u) - m0) / m0, 1e-13 * (s + 1));
    EXPECT_GE(min_value(u), 0.0);
  }
}

TEST(Step, CflViolationRejected) {
  const Grid3 g(32, 4.0);
  const FluxTensor f = FluxTensor::from_matrix(Matrix::Identity(3, 3));
  Stepper stepper(g, f, 50.0);
  const DensityField u = gaussian_density(g, 1.0, 0.5, 0.5, 0.5);
  const PotentialField pot = stepper.potential(u);
  EXPECT_KST_ERROR(stepper.step(u, pot, 2.0 * stepper.stable_dt(pot)), CflViolation);
  EXPECT_KST_ERROR(stepper.step(u, pot, 0.0), BadParameter);
  Stepper still(g, f, 0.0);
  EXPECT_TRUE(std::isinf(still.stable_dt(pot)));
}

TEST(Run, PureDiffusionMomentLaw) {
  SimConfig c = small_config();
  c.chi = 0.0;
  c.t_end = 0.5;
  c.dt_max = 0.05;
  const SimOutcome o = run(c);
  ASSERT_EQ(o.status, RunStatus::CompletedToTEnd);
  EXPECT_NEAR(o.t_final, 0.5, 1e-12);
  const double m0 = o.records.front().m2;
  for (std::size_t i = 1; i < o.records.size(); ++i) {
    EXPECT_GT(o.records[i].t, o.records[i - 1].t);
    EXPECT_NEAR(o.records[i].m2, m0 + 6.0 * o.records[i].t, 0.01 * 6.0 * o.records[i].t);
    EXPECT_NEAR(o.records[i].dwdt_measured, 6.0, 0.06);
  }
  EXPECT_LE(o.max_mass_drift, 1e-12);
}

TEST(Run, DtFloorCountsAsBlowup) {
  SimConfig c = small_config();
  c.chi = 500.0;
  c.dt_min = 5e-3;
  const SimOutcome o = run(c);
  ASSERT_EQ(o.status, RunStatus::NumericalBlowup);
  ASSERT_TRUE(o.evidence.has_value());
  EXPECT_EQ(o.evidence->trigger, "dt_floor");
  EXPECT_LT(o.evidence->dt_at_stop, 5e-3);
}

TEST(Run, InvalidConfigRejected) {
  SimConfig c = small_config();
  c.cfl = 2.0;
  EXPECT_KST_ERROR(run(c), ConfigInvalid);
  c = small_config();
  c.n_cells = 12;
  EXPECT_KST_ERROR(run(c), ConfigInvalid);
}

TEST(Run, CalibratedChiHitsRequestedRatio) {
  const FluxTensor f = FluxTensor::from_matrix(rotation_z(kPi / 4));
  const double chi = calibrate_chi(3.0, 1.0, f, 0.5);
  EXPECT_NEAR(3.0 / blowup_constant(f, chi, 3), 0.5, 1e-12);
  EXPECT_KST_ERROR(calibrate_chi(3.0, 1.0, FluxTensor::from_matrix(rotation_z(2.0)), 0.5), HypothesisViolated);

  SimConfig c = small_config();
  c.a = rotation_z(kPi / 4);
  c.chi_admissibility_ratio = 0.5;
  c.t_end = 1e-3;
  const SimOutcome o = run(c);
  const double m0 = o.records.front().m2;
  EXPECT_NEAR(m0 / blowup_constant(f, o.chi, 3), 0.5, 1e-9);
}

TEST(Run, QuarterTurnCovariance) {
  // A = I commutes with the grid rotation (x, y) -> (-y, x).
  SimConfig c = small_config();
  c.half_width = 8.0;
  c.chi = 20.0;
  c.initial.sigma = {0.6, 1.1, 0.8};
  c.initial.center = {0.4, -0.3, 0.1};
  SimConfig r = c;
  r.initial.orientation = rotation_z(-kPi / 2);
  r.initial.center = {0.3, 0.4, 0.1};
  const SimOutcome a = run(c), b = run(r);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_NEAR(a.records[i].m2, b.records[i].m2, 1e-10 * a.records[i].m2);
    EXPECT_NEAR(a.records[i].linf, b.records[i].linf, 1e-10 * a.records[i].linf);
    EXPECT_NEAR(a.records[i].J, b.records[i].J, 1e-10 * a.records[i].J);
  }
}

TEST(Run, SmoothPhaseFollowsMomentIdentity) {
  SimConfig c = small_config();
  c.n_cells = 64;
  c.a = rotation_z(kPi / 4);
  c.chi = 5.0;
  c.t_end = 0.1;
  c.dt_max = 2e-3;
  c.diag_every = 5;
  const SimOutcome o = run(c);
  ASSERT_EQ(o.status, RunStatus::CompletedToTEnd);
  for (const auto& r : o.records) {
    EXPECT_NEAR(r.dwdt_measured, r.dwdt_rhs, 0.05 * std::abs(r.dwdt_rhs));
    EXPECT_LE(r.dwdt_measured, r.dwdt_bound + 0.05 * std::abs(r.dwdt_bound));
  }
}

TEST(Run, WritesArtifacts) {
  test::TempDir dir("run");
  SimConfig c = small_config();
  c.output_dir = dir.path();
  c.snapshot_times = {0.0, 0.1};
  const SimOutcome o = run(c);
  write_diagnostics_csv(dir.path() / "diagnostics.csv", o.records);
  write_outcome(dir.path() / "outcome.txt", o);
  const std::string csv = slurp(dir.path() / "diagnostics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), csv_header());
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), o.records.size() + 1);
  const std::string out = slurp(dir.path() / "outcome.txt");
  EXPECT_NE(out.find("status=CompletedToTEnd\n"), std::string::npos);
  EXPECT_NE(out.find("t_final=0.2\n"), std::string::npos);
  const Snapshot s0 = read_snapshot(dir.path() / "u_000");
  const Snapshot s1 = read_snapshot(dir.path() / "u_001");
  EXPECT_EQ(s0.time, 0.0);
  EXPECT_GE(s1.time, 0.1);
  EXPECT_LT(s1.time, 0.1 + c.dt_max + 1e-12);
}
