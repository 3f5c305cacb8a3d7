#include "kst/matrixflux.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>

#include "kst/error.hpp"

namespace kst {

namespace {

constexpr double kSingularRatio = 1e-12;
constexpr double kOrthoTol = 1e-10;
constexpr double kSnapTol = 1e-8;
constexpr double kRouteAgreement = 1e-10;

// Values at or below this are treated as the hypothesis boundary (not satisfied).
constexpr double kBoundaryTol = 1e-12;

void require_square(const Matrix& a, const char* what) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": matrix must be square and non-empty");
  }
}

std::vector<double> parse_numbers(std::string_view text, bool allow_commas) {
  std::string buf(text);
  if (allow_commas) std::replace(buf.begin(), buf.end(), ',', ' ');
  std::istringstream in(buf);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(x)) {
      throw Error(ErrorCode::ParseError, "not a finite decimal literal: '" + tok + "'");
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace

PolarFactors polar_decompose(const Matrix& a) {
  require_square(a, "polar_decompose");
  // The left singular vectors W are the eigenvectors of A A^T and the singular
  // values are the square roots of its eigenvalues, so P = W S W^T.
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) <= kSingularRatio * s(0)) {
    throw Error(ErrorCode::SingularMatrix, "smallest singular value below 1e-12 of the largest");
  }
  const Matrix& w = svd.matrixU();
  PolarFactors out;
  out.p = w * s.asDiagonal() * w.transpose();
  out.p = 0.5 * (out.p + out.p.transpose());
  out.u_orth = w * svd.matrixV().transpose();
  return out;
}

CanonicalSpectrum canonical_spectrum(const Matrix& u_orth) {
  require_square(u_orth, "canonical_spectrum");
  const auto n = u_orth.rows();
  const double ortho_err = (u_orth.transpose() * u_orth - Matrix::Identity(n, n)).norm();
  if (!(ortho_err <= kOrthoTol)) {
    throw Error(ErrorCode::NotOrthogonal, "||U^T U - I||_F = " + std::to_string(ortho_err));
  }

  Eigen::EigenSolver<Matrix> es(u_orth, /*computeEigenvectors=*/false);
  CanonicalSpectrum out;
  int negative_imag = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (z.imag() > kSnapTol) {
      out.angles.push_back(std::atan2(z.imag(), z.real()));
    } else if (z.imag() < -kSnapTol) {
      ++negative_imag;
    } else if (std::abs(z.real() - 1.0) <= kSnapTol) {
      out.real_eigs.push_back(1.0);
    } else if (std::abs(z.real() + 1.0) <= kSnapTol) {
      out.real_eigs.push_back(-1.0);
    } else {
      throw Error(ErrorCode::NotOrthogonal, "real eigenvalue not within 1e-8 of +-1");
    }
  }
  if (negative_imag != static_cast<int>(out.angles.size())) {
    throw Error(ErrorCode::NotOrthogonal, "complex eigenvalues do not pair into conjugates");
  }
  std::sort(out.angles.begin(), out.angles.end());
  std::sort(out.real_eigs.begin(), out.real_eigs.end(), std::greater<>());
  return out;
}

double spectrum_kappa(const CanonicalSpectrum& spectrum) {
  double k = 1.0;
  for (double a : spectrum.angles) k = std::min(k, std::cos(a));
  for (double l : spectrum.real_eigs) k = std::min(k, l);
  return k;
}

double symmetric_part_min_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {

HypothesisCheck check_from_factors(const Matrix& u_orth, const CanonicalSpectrum& spectrum) {
  bool spectral_ok = true;
  for (double l : spectrum.real_eigs) spectral_ok = spectral_ok && l > 0.0;
  for (double a : spectrum.angles) spectral_ok = spectral_ok && std::cos(a) > kBoundaryTol;

  const double kappa = spectrum_kappa(spectrum);
  const double margin = symmetric_part_min_eigenvalue(u_orth);
  if (std::abs(kappa - margin) > kRouteAgreement) {
    throw Error(ErrorCode::NotOrthogonal,
                "spectrum route and symmetric-part route disagree on kappa");
  }
  HypothesisCheck out;
  out.ok = spectral_ok;
  out.margin = std::abs(margin) <= kBoundaryTol ? 0.0 : margin;
  return out;
}

}  // namespace

HypothesisCheck check_hypothesis(const Matrix& a) {
  const PolarFactors f = polar_decompose(a);
  return check_from_factors(f.u_orth, canonical_spectrum(f.u_orth));
}

FluxTensor FluxTensor::from_matrix(const Matrix& a) {
  require_square(a, "FluxTensor");
  if (a.rows() < 3) throw Error(ErrorCode::BadParameter, "flux tensor needs dimension n >= 3");
  FluxTensor t;
  t.a_ = a;
  PolarFactors f = polar_decompose(a);
  t.p_ = std::move(f.p);
  t.u_orth_ = std::move(f.u_orth);

  Eigen::SelfAdjointEigenSolver<Matrix> es(t.p_);
  const Eigen::VectorXd mu = es.eigenvalues();  // ascending, all > 0
  const Matrix& v = es.eigenvectors();
  t.p_inv_ = v * mu.cwiseInverse().asDiagonal() * v.transpose();
  t.p_inv_ = 0.5 * (t.p_inv_ + t.p_inv_.transpose());
  t.lam_min_ = 1.0 / mu(mu.size() - 1);
  t.lam_max_ = 1.0 / mu(0);
  t.trace_pinv_ = mu.cwiseInverse().sum();

  t.spectrum_ = canonical_spectrum(t.u_orth_);
  t.kappa_ = spectrum_kappa(t.spectrum_);
  t.hypothesis_ = check_from_factors(t.u_orth_, t.spectrum_);
  return t;
}

Matrix rotation_z(double alpha, int n) {
  if (n < 2) throw Error(ErrorCode::BadParameter, "rotation_z needs n >= 2");
  Matrix r = Matrix::Identity(n, n);
  r(0, 0) = std::cos(alpha);
  r(0, 1) = -std::sin(alpha);
  r(1, 0) = std::sin(alpha);
  r(1, 1) = std::cos(alpha);
  return r;
}

Matrix parse_matrix_text(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto row = parse_numbers(std::string_view(line).substr(0, line.find('#')), false);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto n = rows.size();
  if (n == 0) throw Error(ErrorCode::ParseError, "empty matrix");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " has " +
                                             std::to_string(rows[i].size()) + " entries, expected " +
                                             std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open matrix file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_matrix_text(ss.str());
}

Matrix parse_matrix_list(std::string_view list) {
  const auto vals = parse_numbers(list, true);
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(vals.size()))));
  if (vals.empty() || n * n != vals.size()) {
    throw Error(ErrorCode::ParseError,
                "matrix list needs a square number of entries, got " + std::to_string(vals.size()));
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = vals[i * n + j];
  return m;
}

}  // namespace kst
