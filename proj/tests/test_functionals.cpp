#include "kst/functionals.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "kst/solver.hpp"
#include "kst/suites.hpp"
#include "test_util.hpp"

using namespace kst;

namespace {

constexpr double kPi = std::numbers::pi;

DensityField ball_field(const Grid3& g, double r) {
  InitialData d;
  d.kind = InitialData::Kind::Ball;
  d.radius = r;
  return make_initial_data(d, g);
}

}  // namespace

TEST(Moments, GaussianAndBall) {
  const Grid3 g(64, 8.0);
  const DensityField u = gaussian_density(g, 1.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(mass(u), 1.0, 1e-12);
  EXPECT_NEAR(second_moment(u), 3.0, 0.03);

  const DensityField b = ball_field(g, 3.0);
  EXPECT_NEAR(second_moment(b), 0.6 * 9.0, 0.02 * 5.4);

  const DensityField a = gaussian_density(Grid3(64, 12.0), 1.0, 0.8, 1.2, 2.0);
  Matrix w = Matrix::Zero(3, 3);
  w.diagonal() << 1.0, 2.0, 3.0;
  EXPECT_NEAR(weighted_moment(a, w), 0.64 + 2.0 * 1.44 + 3.0 * 4.0, 1e-3);
  EXPECT_NEAR(weighted_moment(a, Matrix::Identity(3, 3)), second_moment(a), 1e-12);
}

TEST(Moments, WeightMustBeSpd) {
  const Grid3 g(16, 1.0);
  DensityField u(g);
  u.values[0] = 1.0;
  Matrix nonsym = Matrix::Identity(3, 3);
  nonsym(0, 1) = 0.5;
  Matrix indefinite = Matrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  EXPECT_KST_ERROR(weighted_moment(u, nonsym), NotSPD);
  EXPECT_KST_ERROR(weighted_moment(u, indefinite), NotSPD);
  EXPECT_KST_ERROR(weighted_moment(u, Matrix::Identity(2, 2)), NotSPD);
}

TEST(Norms, SupMinLq) {
  const Grid3 g(64, 8.0);
  const DensityField u = gaussian_density(g, 1.0, 1.0, 1.0, 1.0);
  // ||G||_{3/2} = (2 pi)^{-3/2} (4 pi / 3) for the unit Gaussian.
  EXPECT_NEAR(lq_norm(u, 1.5), std::pow(2 * kPi, -1.5) * 4 * kPi / 3, 1e-6);
  EXPECT_NEAR(lq_norm(u, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(sup_norm(u), std::pow(2 * kPi, -1.5) * std::exp(-3.0 * 0.125 * 0.125 / 2.0), 1e-9);
  EXPECT_LE(sup_norm(u), std::pow(2 * kPi, -1.5));
  EXPECT_GT(min_value(u), 0.0);
  EXPECT_KST_ERROR(lq_norm(u, 0.5), BadParameter);
}

TEST(Norms, BoundaryMassFraction) {
  const Grid3 g(16, 1.0);
  DensityField u(g);
  for (double& v : u.values) v = 1.0;
  EXPECT_NEAR(boundary_mass_fraction(u), 1.0 - std::pow(12.0 / 16.0, 3), 1e-14);
  EXPECT_NEAR(boundary_mass_fraction(u, 1), 1.0 - std::pow(14.0 / 16.0, 3), 1e-14);
  EXPECT_EQ(boundary_mass_fraction(DensityField(g)), 0.0);
}

TEST(Interaction, GaussianValueAndDirectSum) {
  const DensityField u = gaussian_density(Grid3(64, 8.0), 1.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(interaction_integral(u), 1.0 / std::sqrt(kPi), 0.01 / std::sqrt(kPi));

  const Grid3 g(16, 2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  DensityField r(g);
  for (double& v : r.values) v = d(rng);
  const double fast = interaction_integral(r);
  EXPECT_NEAR(fast, interaction_integral_direct(r), 1e-10 * fast);
  EXPECT_KST_ERROR(interaction_integral_direct(DensityField(Grid3(32, 1.0))), TooLarge);
}

TEST(Biler, ScalarAndGrid) {
  const BilerCheck s = biler_check(1.0, 3.0, 1.0 / std::sqrt(kPi), 3);
  EXPECT_DOUBLE_EQ(s.lhs, 1.0);
  EXPECT_NEAR(s.rhs, std::sqrt(6.0 / kPi), 1e-14);
  EXPECT_TRUE(s.ok);
  EXPECT_FALSE(biler_check(1.0, 0.1, 0.5, 3).ok);
  const DensityField b = ball_field(Grid3(64, 4.0), 1.0);
  const BilerCheck c = biler_check(b);
  // Uniform ball: J = 6/5 M^2 / R, m = 3/5 M R^2.
  EXPECT_NEAR(c.rhs, 1.2 * std::sqrt(1.2), 0.03);
  EXPECT_TRUE(c.ok);
  EXPECT_KST_ERROR(biler_check(DensityField(Grid3(16, 1.0))), ZeroField);
}

TEST(MomentIdentity, SymmetrizedFormAgrees) {
  const Grid3 g(16, 3.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  DensityField u(g);
  for (int i = 3; i < 13; ++i)
    for (int j = 2; j < 12; ++j)
      for (int k = 4; k < 14; ++k) u.at(i, j, k) = d(rng);
  Matrix a(3, 3);
  a << 1.5, -0.4, 0.1, 0.6, 0.9, 0.0, -0.2, 0.3, 1.1;
  const FluxTensor f = FluxTensor::from_matrix(a);
  const double fast = moment_rhs_identity(u, f, 2.5);
  const double direct = moment_rhs_symmetrized_direct(u, f, 2.5);
  EXPECT_NEAR(fast, direct, 1e-10 * std::abs(direct));
  EXPECT_NEAR(moment_rhs_identity(u, f, 0.0), 2.0 * f.trace_pinv() * mass(u), 1e-12);
}

TEST(MomentIdentity, BoundClosedForm) {
  const FluxTensor id = FluxTensor::from_matrix(Matrix::Identity(3, 3));
  // 6 - 2^{-1/2} / (4 pi) / sqrt(3)
  EXPECT_NEAR(moment_rhs_bound(3.0, 1.0, id, 1.0, 3), 6.0 - 1.0 / (4.0 * kPi * std::sqrt(6.0)), 1e-14);
  EXPECT_NEAR(moment_rhs_bound(3.0, 1.0, id, 1.0, 3), 5.9675, 1e-4);
  EXPECT_KST_ERROR(moment_rhs_bound(0.0, 1.0, id, 1.0, 3), NonPositiveMoment);
  EXPECT_KST_ERROR(moment_rhs_bound(1.0, 0.0, id, 1.0, 3), NonPositiveMoment);
}

TEST(MomentIdentity, IdentityBelowBoundOnGaussian) {
  const DensityField u = gaussian_density(Grid3(64, 8.0), 1.0, 0.7, 1.0, 1.3);
  const FluxTensor f = FluxTensor::from_matrix(rotation_z(kPi / 4));
  for (double chi : {1.0, 50.0, 500.0}) {
    const double w = weighted_moment(u, f.p_inv());
    EXPECT_LE(moment_rhs_identity(u, f, chi), moment_rhs_bound(w, mass(u), f, chi, 3));
  }
}

TEST(GradvBound, OptimalGamma) {
  const GradvBound b = gradv_sup_bound(1.0, 1.0, 3);
  EXPECT_NEAR(b.gamma_used, std::cbrt(1.0 / (2.0 * kPi)), 1e-12);
  EXPECT_NEAR(b.gamma_used, 0.5419, 1e-4);
  const double g = b.gamma_used;
  EXPECT_NEAR(b.bound, g + 1.0 / (g * g * 4.0 * kPi), 1e-14);
  EXPECT_LT(b.bound, gradv_sup_bound(1.0, 1.0, 3, 1.1 * g).bound);
  EXPECT_LT(b.bound, gradv_sup_bound(1.0, 1.0, 3, g / 1.1).bound);
  EXPECT_NEAR(gradv_sup_bound(2.0, 0.5, 3, 1.0).bound, 0.5 + 2.0 / (4.0 * kPi), 1e-14);
  EXPECT_KST_ERROR(gradv_sup_bound(0.0, 1.0, 3), ZeroField);
  EXPECT_KST_ERROR(gradv_sup_bound(1.0, 0.0, 3), ZeroField);
}

TEST(GradvBound, DominatesMeasuredGradient) {
  const DensityField u = gaussian_density(Grid3(64, 6.0), 2.0, 0.5, 0.6, 0.7);
  EXPECT_LE(gradv_sup(solve_potential_fast(u)), gradv_sup_bound(u).bound);
}

TEST(Diagnostics, MeasureFillsRecord) {
  const DensityField u = gaussian_density(Grid3(64, 8.0), 1.0, 1.0, 1.0, 1.0);
  const auto pot = solve_potential_fast(u);
  const FluxTensor f = FluxTensor::from_matrix(Matrix::Identity(3, 3));
  const DiagnosticsRecord r = measure(0.5, u, pot, f, 2.0);
  EXPECT_EQ(r.t, 0.5);
  EXPECT_NEAR(r.mass, 1.0, 1e-12);
  EXPECT_NEAR(r.w, r.m2, 1e-12);
  EXPECT_NEAR(r.J, interaction_integral(u), 1e-12);
  EXPECT_NEAR(r.dwdt_rhs, moment_rhs_identity(u, pot, f, 2.0), 1e-12);
  EXPECT_LE(r.dwdt_rhs, r.dwdt_bound);
  EXPECT_TRUE(r.boundary_ok);
  EXPECT_TRUE(std::isnan(r.dwdt_measured));
}

TEST(Diagnostics, ThreePointDerivativeIsExactForQuadratics) {
  std::vector<DiagnosticsRecord> rs;
  for (double t : {0.0, 0.1, 0.35, 0.4, 0.9}) {
    DiagnosticsRecord r;
    r.t = t;
    r.w = 2.0 - 3.0 * t + 0.5 * t * t;
    rs.push_back(r);
  }
  fill_dwdt_measured(rs);
  for (const auto& r : rs) EXPECT_NEAR(r.dwdt_measured, -3.0 + r.t, 1e-12);
  std::vector<DiagnosticsRecord> one(1);
  fill_dwdt_measured(one);
  EXPECT_TRUE(std::isnan(one[0].dwdt_measured));
}

TEST(Diagnostics, CsvLayout) {
  EXPECT_EQ(csv_header(), "t,mass,m2,w,J,linf,lq,gradv_sup,dwdt_measured,dwdt_rhs,dwdt_bound,boundary_mass_fraction");
  DiagnosticsRecord r;
  r.t = 0.25;
  r.mass = 1.0 / 3.0;
  const std::string row = to_csv_row(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 11);
  EXPECT_EQ(row.substr(0, 20), "0.25,0.333333333333,");
}
