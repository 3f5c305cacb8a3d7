#pragma once

// Flux tensor A of the chemotactic drift u*A*grad(v): polar factors, canonical
// spectrum of the orthogonal factor, and the attraction hypothesis
// x^T P^{-1} A x > 0 that gates the blow-up estimates.

#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kst {

using Matrix = Eigen::MatrixXd;

struct PolarFactors {
  Matrix p;       // symmetric positive definite, (A A^T)^{1/2}
  Matrix u_orth;  // orthogonal, P^{-1} A
};

/// Right-handed polar form A = P U. Throws SingularMatrix when the smallest
/// singular value is below 1e-12 times the largest.
PolarFactors polar_decompose(const Matrix& a);

struct CanonicalSpectrum {
  std::vector<double> angles;     // alpha_j in (0, pi), one per 2x2 rotation block
  std::vector<double> real_eigs;  // each exactly +1 or -1
};

/// Rotation angles and real eigenvalues of an orthogonal matrix, read off its
/// complex spectrum. Throws NotOrthogonal if ||U^T U - I||_F > 1e-10.
CanonicalSpectrum canonical_spectrum(const Matrix& u_orth);

struct HypothesisCheck {
  bool ok = false;
  double margin = 0.0;  // min eigenvalue of (U + U^T)/2
};

/// Checks x^T U x > 0 for all x != 0 through the canonical spectrum, and
/// cross-checks the verdict against the symmetric part of U.
HypothesisCheck check_hypothesis(const Matrix& a);

/// min{cos alpha_j} u {lambda_i} u {1}.
double spectrum_kappa(const CanonicalSpectrum& spectrum);

/// Smallest eigenvalue of the symmetric part of a square matrix.
double symmetric_part_min_eigenvalue(const Matrix& m);

class FluxTensor {
 public:
  /// Decomposes and validates `a`; throws SingularMatrix for singular input.
  static FluxTensor from_matrix(const Matrix& a);

  const Matrix& a() const { return a_; }
  int n() const { return static_cast<int>(a_.rows()); }
  const Matrix& p() const { return p_; }
  const Matrix& p_inv() const { return p_inv_; }
  const Matrix& u_orth() const { return u_orth_; }
  const std::vector<double>& angles() const { return spectrum_.angles; }
  const std::vector<double>& real_eigs() const { return spectrum_.real_eigs; }
  double kappa() const { return kappa_; }
  double lam_min() const { return lam_min_; }
  double lam_max() const { return lam_max_; }
  double trace_pinv() const { return trace_pinv_; }
  /// True when every real eigenvalue is +1 and every cos(alpha_j) > 0.
  bool hypothesis_holds() const { return hypothesis_.ok; }
  double margin() const { return hypothesis_.margin; }
  /// max_ij |a_ij|
  double max_norm() const { return a_.cwiseAbs().maxCoeff(); }

 private:
  FluxTensor() = default;

  Matrix a_;
  Matrix p_;
  Matrix p_inv_;
  Matrix u_orth_;
  CanonicalSpectrum spectrum_;
  HypothesisCheck hypothesis_;
  double kappa_ = 1.0;
  double lam_min_ = 1.0;
  double lam_max_ = 1.0;
  double trace_pinv_ = 0.0;
};

/// Rotation by `alpha` in the (x, y) plane, identity elsewhere.
Matrix rotation_z(double alpha, int n = 3);

/// n lines of n whitespace-separated numbers; `#` starts a comment.
Matrix parse_matrix_text(std::string_view text);
Matrix read_matrix_file(const std::filesystem::path& path);

/// Row-major comma (or whitespace) separated list with a square count of entries.
Matrix parse_matrix_list(std::string_view list);

}  // namespace kst
