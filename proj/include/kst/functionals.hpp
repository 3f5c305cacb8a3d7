#pragma once

// Scalar functionals of a density on the grid. Every integral is a midpoint
// cell sum h^3 * sum_i f(x_i).

#include <optional>
#include <string>
#include <vector>

#include "kst/grid.hpp"
#include "kst/matrixflux.hpp"
#include "kst/potential.hpp"

namespace kst {

double mass(const DensityField& u);
double second_moment(const DensityField& u);

/// h^3 sum u(x_i) (x_i . B x_i). Throws NotSPD unless B is a symmetric positive
/// definite 3x3 matrix.
double weighted_moment(const DensityField& u, const Matrix& b);

double sup_norm(const DensityField& u);
double min_value(const DensityField& u);

/// (h^3 sum u^q)^{1/q}. Throws BadParameter for q < 1.
double lq_norm(const DensityField& u, double q);

/// Fraction of the mass held by the outermost `shell` layers of cells (0 for u = 0).
double boundary_mass_fraction(const DensityField& u, int shell = 2);

/// J = int int u(x) u(y) |x - y|^{-1}, evaluated as 4 pi h^3 sum u v.
double interaction_integral(const DensityField& u);
double interaction_integral(const DensityField& u, const PotentialField& pot);

/// Same discrete J as a direct double sum over cell pairs. Throws TooLarge beyond 24^3.
double interaction_integral_direct(const DensityField& u);

struct BilerCheck {
  double lhs = 0.0;  // M^{n/2+1}
  double rhs = 0.0;  // J (2m)^{n/2-1}
  bool ok = false;
};

/// M^{n/2+1} <= J (2m)^{n/2-1} with relative slack 1e-6.
BilerCheck biler_check(double mass, double moment, double interaction, int n);
/// Grid version (n = 3). Throws ZeroField for u = 0.
BilerCheck biler_check(const DensityField& u);

/// 2 Tr(P^{-1}) M + 2 chi h^3 sum u(x) x . (U grad v)(x), the time derivative of
/// w = int u x.P^{-1}x along solutions. The identity does not depend on the
/// attraction hypothesis.
double moment_rhs_identity(const DensityField& u, const FluxTensor& flux, double chi);
double moment_rhs_identity(const DensityField& u, const PotentialField& pot, const FluxTensor& flux,
                           double chi);

/// The same quantity after exchanging x and y:
///   2 Tr(P^{-1}) M + chi h^6 sum_{i != j} u_i u_j d.U G(d),  d = x_i - x_j,
/// with G the discrete gradient kernel. Away from face neighbours
/// d.U G(d) = -(d.U d)/(4 pi |d|^3).
/// Direct double sum; throws TooLarge beyond 32^3.
double moment_rhs_symmetrized_direct(const DensityField& u, const FluxTensor& flux, double chi);

/// Upper bound on dw/dt in terms of w alone:
///   2 Tr(P^{-1}) M - 2^{1-n/2} chi kappa M^{n/2+1} / (n omega_n) * lam_min^{n/2-1} w^{1-n/2}.
/// Throws NonPositiveMoment for w <= 0 or M <= 0.
double moment_rhs_bound(double w, double mass, const FluxTensor& flux, double chi, int n);

struct GradvBound {
  double bound = 0.0;
  double gamma_used = 0.0;
};

/// sup |grad v| <= gamma ||u||_inf + gamma^{1-n} M / (n omega_n). Without an
/// explicit gamma the minimizer gamma* = ((n-1) M / (n omega_n ||u||_inf))^{1/n}
/// is used. Throws ZeroField when M or ||u||_inf vanish.
GradvBound gradv_sup_bound(double mass, double sup, int n, std::optional<double> gamma = std::nullopt);
GradvBound gradv_sup_bound(const DensityField& u, std::optional<double> gamma = std::nullopt);

/// max_i |grad v(x_i)|.
double gradv_sup(const PotentialField& pot);

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double m2 = 0.0;
  double w = 0.0;
  double J = 0.0;
  double linf = 0.0;
  double lq = 0.0;  // L^{3/2}
  double gradv_sup = 0.0;
  double dwdt_measured = 0.0;
  double dwdt_rhs = 0.0;
  double dwdt_bound = 0.0;
  double boundary_mass_fraction = 0.0;
  // Not serialized.
  double min_value = 0.0;
  bool boundary_ok = true;
};

/// Evaluates every record field except dwdt_measured.
DiagnosticsRecord measure(double t, const DensityField& u, const PotentialField& pot, const FluxTensor& flux,
                          double chi);

/// Fills dwdt_measured: three-point differences on the (nonuniform) sample
/// times, second-order one-sided at the ends. NaN when fewer than two records.
void fill_dwdt_measured(std::vector<DiagnosticsRecord>& records);

std::string csv_header();
std::string to_csv_row(const DiagnosticsRecord& r);

}  // namespace kst
