#pragma once

// Mode bases, coherence matrices and the scalar metrics built on them.

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "shtomo/errors.hpp"
#include "shtomo/linalg.hpp"

namespace shtomo {

/// Transverse coordinate. One-dimensional setups leave y at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  Point operator+(const Point& o) const { return {x + o.x, y + o.y}; }
  Point operator-(const Point& o) const { return {x - o.x, y - o.y}; }
  double norm() const { return std::hypot(x, y); }
};

enum class BasisKind { PlaneWave, Vortex };

/// A finite set of computational modes with evaluable transverse amplitudes.
///
/// Plane waves use psi_k(x) = exp(-i p_k . x). Vortex modes are Laguerre-Gauss
/// LG_{0,l} beams at their waist, normalized to unit L2 norm:
/// psi_l(r, phi) = sqrt(2 / (pi |l|!)) / w0 * (r sqrt2 / w0)^|l| exp(-r^2/w0^2) exp(i l phi).
class ModeBasis {
 public:
  static ModeBasis plane_waves(std::vector<Point> momenta, double wavelength) {
    ModeBasis b;
    b.kind_ = BasisKind::PlaneWave;
    b.momenta_ = std::move(momenta);
    b.wavelength_ = wavelength;
    if (b.momenta_.size() < 2) throw DimensionError("a mode basis needs at least two modes");
    for (std::size_t i = 0; i < b.momenta_.size(); ++i)
      for (std::size_t j = i + 1; j < b.momenta_.size(); ++j)
        if (b.momenta_[i] == b.momenta_[j]) throw ArgumentError("plane-wave momenta must be distinct");
    b.validate_common();
    return b;
  }

  static ModeBasis vortex(std::vector<int> charges, double waist, double wavelength) {
    ModeBasis b;
    b.kind_ = BasisKind::Vortex;
    b.charges_ = std::move(charges);
    b.waist_ = waist;
    b.wavelength_ = wavelength;
    if (b.charges_.size() < 2) throw DimensionError("a mode basis needs at least two modes");
    if (std::set<int>(b.charges_.begin(), b.charges_.end()).size() != b.charges_.size())
      throw ArgumentError("vortex charges must be distinct");
    if (!(waist > 0.0)) throw ArgumentError("vortex waist must be positive");
    b.norms_.reserve(b.charges_.size());
    for (int l : b.charges_) {
      const int al = std::abs(l);
      b.norms_.push_back(std::sqrt(2.0 / (kPi * std::tgamma(al + 1.0))) / waist *
                         std::pow(std::sqrt(2.0) / waist, al));
    }
    b.validate_common();
    return b;
  }

  BasisKind kind() const { return kind_; }
  std::size_t dim() const { return kind_ == BasisKind::PlaneWave ? momenta_.size() : charges_.size(); }
  double wavelength() const { return wavelength_; }
  double wavenumber() const { return 2.0 * kPi / wavelength_; }
  const std::vector<Point>& momenta() const { return momenta_; }
  const std::vector<int>& charges() const { return charges_; }
  double waist() const { return waist_; }

  cplx amplitude(std::size_t k, Point p) const {
    if (kind_ == BasisKind::PlaneWave) {
      const double phase = -(momenta_[k].x * p.x + momenta_[k].y * p.y);
      return {std::cos(phase), std::sin(phase)};
    }
    const int l = charges_[k];
    const cplx z{p.x, l >= 0 ? p.y : -p.y};
    cplx zpow{1.0, 0.0};
    for (int n = 0; n < std::abs(l); ++n) zpow *= z;
    return norms_[k] * std::exp(-(p.x * p.x + p.y * p.y) / (waist_ * waist_)) * zpow;
  }

  /// Angular frequency (rad per length) beyond which the mode spectrum is negligible.
  double bandwidth(std::size_t k) const {
    if (kind_ == BasisKind::PlaneWave) return momenta_[k].norm();
    return (std::sqrt(2.0 * (std::abs(charges_[k]) + 1.0)) + 4.0) / waist_;
  }

  double max_bandwidth() const {
    double b = 0.0;
    for (std::size_t k = 0; k < dim(); ++k) b = std::max(b, bandwidth(k));
    return b;
  }

  std::string label(std::size_t k) const {
    if (kind_ == BasisKind::Vortex) return "V" + std::to_string(charges_[k]);
    return "P" + std::to_string(k);
  }

  friend bool operator==(const ModeBasis& a, const ModeBasis& b) {
    return a.kind_ == b.kind_ && a.momenta_ == b.momenta_ && a.charges_ == b.charges_ &&
           a.waist_ == b.waist_ && a.wavelength_ == b.wavelength_;
  }

 private:
  ModeBasis() = default;

  void validate_common() const {
    if (!(wavelength_ > 0.0)) throw ArgumentError("wavelength must be positive");
  }

  BasisKind kind_ = BasisKind::PlaneWave;
  std::vector<Point> momenta_;
  std::vector<int> charges_;
  std::vector<double> norms_;
  double waist_ = 0.0;
  double wavelength_ = 1.0;
};

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kPsdFloor = 1e-10;

/// Hermitian PSD matrix of second-order coherence in a given mode basis.
///
/// Stored as built (unnormalized); metrics use normalized().
class CoherenceMatrix {
 public:
  CoherenceMatrix(CMatrix rho, ModeBasis basis) : rho_(std::move(rho)), basis_(std::move(basis)) {
    const auto d = static_cast<Eigen::Index>(basis_.dim());
    if (rho_.rows() != d || rho_.cols() != d)
      throw DimensionError("coherence matrix is " + std::to_string(rho_.rows()) + "x" +
                           std::to_string(rho_.cols()) + " but basis has " + std::to_string(d) +
                           " modes");
    if (!rho_.allFinite()) throw InvalidStateError("coherence matrix has non-finite entries");
    const double scale = std::max(1.0, rho_.cwiseAbs().maxCoeff());
    if (hermiticity_defect(rho_) > 1e-8 * scale)
      throw InvalidStateError("coherence matrix is not Hermitian");
    rho_ = hermitian_part(rho_);
    const double tr = trace();
    if (!(tr > 0.0)) throw InvalidStateError("coherence matrix must have positive trace");
    if (hermitian_eigenvalues(rho_).minCoeff() < -kPsdFloor * tr)
      throw InvalidStateError("coherence matrix is not positive semidefinite");
  }

  const CMatrix& rho() const { return rho_; }
  const ModeBasis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }
  double trace() const { return rho_.trace().real(); }
  CMatrix normalized() const { return rho_ / trace(); }

 private:
  CMatrix rho_;
  ModeBasis basis_;
};

/// Weighted incoherent sum of pure states.
struct MixtureSpec {
  struct Component {
    double weight = 1.0;
    CVector ket;
  };
  std::vector<Component> components;
};

inline CoherenceMatrix coherence_from_mixture(const MixtureSpec& spec, const ModeBasis& basis) {
  if (spec.components.empty()) throw ArgumentError("mixture needs at least one component");
  const auto d = static_cast<Eigen::Index>(basis.dim());
  CMatrix rho = CMatrix::Zero(d, d);
  bool any_positive = false;
  for (const auto& c : spec.components) {
    if (c.ket.size() != d)
      throw DimensionError("mixture ket has length " + std::to_string(c.ket.size()) +
                           " but basis dimension is " + std::to_string(d));
    if (!(c.weight >= 0.0)) throw ArgumentError("mixture weights must be nonnegative");
    any_positive = any_positive || c.weight > 0.0;
    rho.noalias() += c.weight * c.ket * c.ket.adjoint();
  }
  if (!any_positive) throw ArgumentError("mixture needs a positive weight");
  return CoherenceMatrix(std::move(rho), basis);
}

namespace detail {

inline void require_density(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  const double tr = m.trace().real();
  if (!(tr > 0.0) || hermiticity_defect(m) > 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()) ||
      hermitian_eigenvalues(m).minCoeff() < -kPsdFloor * tr)
    throw InvalidStateError("fidelity needs Hermitian PSD inputs with positive trace");
}

}  // namespace detail

/// Root fidelity Tr sqrt(sqrt(a) b sqrt(a)) of the trace-normalized inputs.
///
/// Evaluated as the trace norm of La^dagger Lb with a = La La^dagger, b = Lb Lb^dagger, which avoids
/// square roots of the rounding-level eigenvalues of sqrt(a) b sqrt(a) for rank-deficient inputs.
inline double fidelity(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("fidelity arguments differ in dimension");
  detail::require_density(a);
  detail::require_density(b);
  constexpr double kRoundingCutoff = 1e-13;
  const CMatrix la = psd_factor(a / a.trace().real(), kRoundingCutoff);
  const CMatrix lb = psd_factor(b / b.trace().real(), kRoundingCutoff);
  const Eigen::JacobiSVD<CMatrix> svd(la.adjoint() * lb);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

inline double fidelity(const CoherenceMatrix& a, const CoherenceMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("fidelity arguments differ in dimension");
  return fidelity(a.rho(), b.rho());
}

inline double purity(const CoherenceMatrix& rho) {
  const CMatrix n = rho.normalized();
  return (n * n).trace().real();
}

/// I(x) = sum_mn psi_m(x) rho_mn conj(psi_n(x)).
inline double intensity_at(const CoherenceMatrix& rho, Point point) {
  const auto d = static_cast<Eigen::Index>(rho.dim());
  CVector psi(d);
  for (Eigen::Index m = 0; m < d; ++m) psi(m) = rho.basis().amplitude(static_cast<std::size_t>(m), point);
  const double value = (psi.transpose() * rho.rho() * psi.conjugate())(0, 0).real();
  return std::max(value, 0.0);
}

}  // namespace shtomo
