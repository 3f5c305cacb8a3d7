#include "kst/thresholds.hpp"

#include <algorithm>
#include <cmath>

#include "kst/error.hpp"
#include "kst/functionals.hpp"
#include "kst/potential.hpp"

namespace kst {

namespace {

void require_analysis_inputs(const FluxTensor& flux, double chi, int n) {
  if (n < 3) throw Error(ErrorCode::BadParameter, "dimension must be >= 3");
  if (flux.n() != n) throw Error(ErrorCode::BadParameter, "flux tensor dimension differs from n");
  if (!(chi > 0.0)) throw Error(ErrorCode::BadParameter, "chi must be positive");
}

double attraction_term(double mass, const FluxTensor& flux, double chi, int n) {
  const double half = 0.5 * n;
  return std::pow(2.0, 1.0 - half) * chi * flux.kappa() * std::pow(mass, half + 1.0) *
         std::pow(flux.lam_min(), half - 1.0) / (n * unit_ball_volume(n));
}

}  // namespace

double blowup_constant(const FluxTensor& flux, double chi, int n) {
  require_analysis_inputs(flux, chi, n);
  if (!flux.hypothesis_holds() || !(flux.kappa() > 0.0)) {
    throw Error(ErrorCode::HypothesisViolated, "x^T U x > 0 fails; blow-up constant undefined");
  }
  const double half = 0.5 * n;
  const double bracket = std::pow(2.0, 1.0 - half) * chi * flux.kappa() * std::pow(flux.lam_min(), half - 1.0) /
                         (2.0 * flux.trace_pinv() * std::pow(flux.lam_max(), half - 1.0) * n * unit_ball_volume(n));
  return std::pow(bracket, 2.0 / (n - 2));
}

double blowup_rate_function(double w, double mass, const FluxTensor& flux, double chi, int n) {
  require_analysis_inputs(flux, chi, n);
  return 2.0 * flux.trace_pinv() * mass * std::pow(w, 0.5 * n - 1.0) - attraction_term(mass, flux, chi, n);
}

BlowupVerdict admissibility(double m0, double mass, const FluxTensor& flux, double chi, int n) {
  if (!(m0 >= 0.0)) throw Error(ErrorCode::BadParameter, "initial moment must be >= 0");
  if (!(mass > 0.0)) throw Error(ErrorCode::BadParameter, "mass must be positive");
  BlowupVerdict v;
  v.c_bl = blowup_constant(flux, chi, n);
  const double level = v.c_bl * std::pow(mass, static_cast<double>(n) / (n - 2));
  v.margin = level - m0;
  v.admissible = m0 <= level * (1.0 + 1e-12);
  const double w0 = flux.lam_max() * m0;
  v.f_w0 = blowup_rate_function(w0, mass, flux, chi, n);
  if (v.f_w0 < 0.0) v.t_upper = (2.0 / n) * std::pow(w0, 0.5 * n) / std::abs(v.f_w0);
  return v;
}

double rescale_epsilon(double m0, double mass, const FluxTensor& flux, double chi, int n) {
  if (!(m0 > 0.0)) throw Error(ErrorCode::BadParameter, "rescaling needs m0 > 0");
  if (!(mass > 0.0)) throw Error(ErrorCode::BadParameter, "mass must be positive");
  const double c_bl = blowup_constant(flux, chi, n);
  return std::sqrt(c_bl * std::pow(mass, static_cast<double>(n) / (n - 2)) / m0);
}

double global_delta(double p, int n, double chi, double a_maxnorm, double c_czi, double c_gns) {
  if (n < 3) throw Error(ErrorCode::BadParameter, "dimension must be >= 3");
  if (!(p >= std::max(1.0, 0.5 * n - 1.0))) {
    throw Error(ErrorCode::BadExponent, "p must be >= max{1, n/2 - 1}");
  }
  if (!(chi > 0.0) || !(a_maxnorm > 0.0) || !(c_czi > 0.0) || !(c_gns > 0.0)) {
    throw Error(ErrorCode::BadParameter, "chi, ||A||_max, C_CZI and C_GNS must be positive");
  }
  const double m = std::min(2.0 / (n * c_czi), 1.0 / (p * c_czi));
  return m / (chi * a_maxnorm * c_gns * c_gns);
}

CompatibilityCheck compatibility_check(double lq, double mass, double m0, int n, double c_n) {
  if (!(c_n > 0.0)) throw Error(ErrorCode::BadParameter, "C_n must be positive");
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroField, "compatibility check needs positive mass");
  if (!(m0 > 0.0)) throw Error(ErrorCode::NonPositiveMoment, "compatibility check needs m0 > 0");
  CompatibilityCheck c;
  c.lhs = lq;
  c.rhs = c_n * mass * std::pow(mass / m0, 0.5 * (n - 2));
  c.ok = c.lhs >= c.rhs;
  return c;
}

CompatibilityCheck compatibility_check(const DensityField& u0, int n, double c_n) {
  if (n != 3) throw Error(ErrorCode::BadParameter, "grid fields are three-dimensional");
  const double m = mass(u0);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroField, "compatibility check needs a nonzero density");
  return compatibility_check(lq_norm(u0, 1.5), m, second_moment(u0), n, c_n);
}

double compatibility_ratio(const DensityField& u) {
  const auto c = compatibility_check(u, 3, 1.0);
  return c.lhs / c.rhs;
}

}  // namespace kst
