#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace shtomo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Largest |A - A^dagger| entry.
inline double hermiticity_defect(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline RVector hermitian_eigenvalues(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Applies f to the spectrum of a Hermitian matrix.
template <class F>
CMatrix hermitian_function(const CMatrix& a, F&& f) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  RVector lam = es.eigenvalues();
  for (Eigen::Index k = 0; k < lam.size(); ++k) lam(k) = f(lam(k));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

/// L with a = L L^dagger for a PSD matrix; eigenvalues below relative_cutoff * max are treated as zero.
inline CMatrix psd_factor(const CMatrix& a, double relative_cutoff) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  const RVector lam = es.eigenvalues();
  const double cut = relative_cutoff * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  RVector root(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) root(k) = lam(k) > cut ? std::sqrt(lam(k)) : 0.0;
  return es.eigenvectors() * root.asDiagonal();
}

/// Square root of a PSD matrix; small negative eigenvalues are clipped.
inline CMatrix psd_sqrt(const CMatrix& a) {
  return hermitian_function(a, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

/// Euclidean projection of v onto the probability simplex.
inline RVector project_to_simplex(const RVector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  RVector out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = std::max(v(k) - theta, 0.0);
  return out;
}

/// Nearest (Frobenius) PSD trace-one matrix to a Hermitian matrix.
inline CMatrix project_to_density(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  const RVector lam = project_to_simplex(es.eigenvalues());
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

inline double frobenius_distance(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

}  // namespace shtomo
