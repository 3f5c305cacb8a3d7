#pragma once

// Explicit admissibility constants for finite-time blow-up and global existence.

#include <optional>

#include "kst/grid.hpp"
#include "kst/matrixflux.hpp"

namespace kst {

/// Smallness constant of the initial second moment,
///   C_Bl = [2^{1-n/2} chi kappa lam_min^{n/2-1} / (2 Tr(P^{-1}) lam_max^{n/2-1} n omega_n)]^{2/(n-2)}.
/// Throws HypothesisViolated when the attraction hypothesis fails (kappa <= 0)
/// and BadParameter for chi <= 0 or a dimension mismatch.
double blowup_constant(const FluxTensor& flux, double chi, int n);

/// f(w) = 2 Tr(P^{-1}) M w^{n/2-1} - 2^{1-n/2} chi kappa M^{n/2+1} lam_min^{n/2-1} / (n omega_n),
/// with (2/n) d/dt w^{n/2} <= f(w) along solutions.
double blowup_rate_function(double w, double mass, const FluxTensor& flux, double chi, int n);

struct BlowupVerdict {
  double c_bl = 0.0;
  bool admissible = false;
  double margin = 0.0;            // C_Bl M^{n/(n-2)} - m0
  std::optional<double> t_upper;  // upper bound on the blow-up time, present iff f_w0 < 0
  double f_w0 = 0.0;              // f at the worst-case initial weight lam_max * m0
};

/// Admissible when m0 <= C_Bl M^{n/(n-2)} up to a relative 1e-12 (the
/// rescaled data of rescale_epsilon sits exactly on the threshold).
/// Throws BadParameter for m0 < 0 or M <= 0, plus blowup_constant's errors.
BlowupVerdict admissibility(double m0, double mass, const FluxTensor& flux, double chi, int n);

/// Largest eps with eps^{-n} u0(x/eps) admissible: sqrt(C_Bl M^{n/(n-2)} / m0).
double rescale_epsilon(double m0, double mass, const FluxTensor& flux, double chi, int n);

/// L^{n/2} smallness level for global existence,
///   (1 / (chi ||A||_max C_GNS^2)) min{2 / (n C_CZI), 1 / (p C_CZI)}.
/// One Calderon-Zygmund constant serves both exponents (pass the larger one).
/// Throws BadExponent for p < max{1, n/2 - 1}, BadParameter for non-positive constants.
double global_delta(double p, int n, double chi, double a_maxnorm, double c_czi, double c_gns);

struct CompatibilityCheck {
  double lhs = 0.0;  // ||u0||_{L^{n/2}}
  double rhs = 0.0;  // C_n M (M/m0)^{(n-2)/2}
  bool ok = false;
};

/// Scalar form from measured (||u0||_{L^{n/2}}, M, m0).
CompatibilityCheck compatibility_check(double lq, double mass, double m0, int n, double c_n);
/// Grid form (n = 3). Throws ZeroField for u0 = 0.
CompatibilityCheck compatibility_check(const DensityField& u0, int n, double c_n);

/// ||u||_{L^{3/2}} / (M (M/m)^{1/2}) for a field, the quantity whose infimum over
/// a family calibrates C_3.
double compatibility_ratio(const DensityField& u);

}  // namespace kst
