#pragma once

// Linear tomography map, its singular spectrum, and the two reconstructors
// (iterative maximum likelihood and pseudo-inverse).

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shtomo/errors.hpp"
#include "shtomo/field_model.hpp"
#include "shtomo/linalg.hpp"
#include "shtomo/sensor.hpp"

namespace shtomo {

/// Orthonormal basis of d x d Hermitian matrices, Tr(G_k G_l) = delta_kl.
///
/// Generalized Gell-Mann ordering: identity / sqrt(d); then for every pair
/// j < k the symmetric X_jk and antisymmetric Y_jk elements; then the d - 1
/// traceless diagonal elements Z_l. For d = 2 this is {I, sx, sy, sz} / sqrt 2.
class HermitianBasis {
 public:
  explicit HermitianBasis(std::size_t d) : d_(d) {
    if (d < 1) throw ArgumentError("Hermitian basis needs d >= 1");
    const auto n = static_cast<Eigen::Index>(d);
    const double r2 = 1.0 / std::sqrt(2.0);
    gammas_.push_back(CMatrix::Identity(n, n) / std::sqrt(static_cast<double>(d)));
    labels_.push_back("I");
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = j + 1; k < n; ++k) {
        CMatrix x = CMatrix::Zero(n, n);
        x(j, k) = x(k, j) = r2;
        gammas_.push_back(std::move(x));
        labels_.push_back("X" + std::to_string(j) + "," + std::to_string(k));
        CMatrix y = CMatrix::Zero(n, n);
        y(j, k) = -kI * r2;
        y(k, j) = kI * r2;
        gammas_.push_back(std::move(y));
        labels_.push_back("Y" + std::to_string(j) + "," + std::to_string(k));
      }
    for (Eigen::Index l = 1; l < n; ++l) {
      CMatrix z = CMatrix::Zero(n, n);
      const double s = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
      for (Eigen::Index m = 0; m < l; ++m) z(m, m) = s;
      z(l, l) = -static_cast<double>(l) * s;
      gammas_.push_back(std::move(z));
      labels_.push_back("Z" + std::to_string(l));
    }
  }

  std::size_t dim() const { return d_; }
  std::size_t size() const { return gammas_.size(); }
  const CMatrix& operator[](std::size_t k) const { return gammas_[k]; }
  const std::vector<CMatrix>& gammas() const { return gammas_; }
  const std::string& label(std::size_t k) const { return labels_[k]; }

  /// r_k = Tr(H G_k).
  RVector coordinates(const CMatrix& h) const {
    RVector r(static_cast<Eigen::Index>(size()));
    for (std::size_t k = 0; k < size(); ++k)
      r(static_cast<Eigen::Index>(k)) = (h * gammas_[k]).trace().real();
    return r;
  }

  CMatrix from_coordinates(const RVector& r) const {
    const auto n = static_cast<Eigen::Index>(d_);
    CMatrix h = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < size(); ++k) h += r(static_cast<Eigen::Index>(k)) * gammas_[k];
    return h;
  }

 private:
  std::size_t d_;
  std::vector<CMatrix> gammas_;
  std::vector<std::string> labels_;
};

inline HermitianBasis hermitian_basis(std::size_t d) { return HermitianBasis(d); }

/// Real matrix P with I = P r, P_{alpha k} = Tr(Pi_alpha G_k).
struct TomographyMatrix {
  RMatrix p;
  std::vector<std::pair<std::size_t, std::size_t>> row_index;  // (lens, pixel)
};

inline TomographyMatrix build_tomography_matrix(const PovmSet& povms, const HermitianBasis& hb) {
  if (povms.dim() != hb.dim()) throw DimensionError("POVM and Hermitian basis dimensions differ");
  const CMatrix& a = povms.amplitudes();
  const auto cols = a.cols();
  const auto sub = static_cast<Eigen::Index>(povms.subsamples());
  TomographyMatrix t;
  t.row_index = povms.index();
  t.p.resize(static_cast<Eigen::Index>(povms.outcomes()), static_cast<Eigen::Index>(hb.size()));
  const CMatrix ac = a.conjugate();
  for (std::size_t k = 0; k < hb.size(); ++k) {
    // a^T G conj(a) per column
    const RVector per_col = a.cwiseProduct(hb[k] * ac).colwise().sum().real().transpose();
    for (Eigen::Index alpha = 0; alpha < cols / sub; ++alpha)
      t.p(alpha, static_cast<Eigen::Index>(k)) = per_col.segment(alpha * sub, sub).sum() / static_cast<double>(sub);
  }
  return t;
}

inline TomographyMatrix build_tomography_matrix(const SensorGeometry& geom, const ModeBasis& basis,
                                                const HermitianBasis& hb) {
  return build_tomography_matrix(PovmSet::from_sensor(basis, geom), hb);
}

inline constexpr double kRankThreshold = 1e-8;

/// P = U S V^T with singular values sorted in descending order.
struct SingularSpectrum {
  RVector values;
  RMatrix u;
  RMatrix v;

  double largest() const { return values.size() ? values(0) : 0.0; }
  RVector normalized() const { return largest() > 0.0 ? RVector(values / largest()) : values; }

  std::size_t numerical_rank(double relative = kRankThreshold) const {
    std::size_t r = 0;
    for (Eigen::Index k = 0; k < values.size(); ++k)
      if (values(k) >= relative * largest() && values(k) > 0.0) ++r;
    return r;
  }
};

inline SingularSpectrum singular_spectrum(const RMatrix& p) {
  if (p.size() == 0) throw ArgumentError("tomography matrix is empty");
  Eigen::BDCSVD<RMatrix> svd(p, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

inline SingularSpectrum singular_spectrum(const TomographyMatrix& t) { return singular_spectrum(t.p); }

struct DynamicalRange {
  double threshold = 0.0;
  std::size_t count = 0;
  RMatrix modes;  // normal modes (columns of V) above threshold, in Gamma coordinates
};

/// Normal modes whose normalized singular value reaches `threshold`.
inline DynamicalRange dynamical_range(const SingularSpectrum& s, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ArgumentError("dynamical-range threshold must lie in (0, 1]");
  const RVector n = s.normalized();
  DynamicalRange out;
  out.threshold = threshold;
  for (Eigen::Index k = 0; k < n.size(); ++k)
    if (n(k) > 0.0 && n(k) >= threshold * (1.0 - 1e-12)) ++out.count;
  out.modes = s.v.leftCols(static_cast<Eigen::Index>(out.count));
  return out;
}

/// A direction of Hermitian-matrix space that the measurement cannot see.
struct NullDirection {
  RVector coordinates;
  std::string dominant_label;
  double alignment = 0.0;  // |coordinate| along the dominant basis element
};

inline std::vector<NullDirection> unobservable_directions(const SingularSpectrum& s, const HermitianBasis& hb,
                                                          double relative = kRankThreshold) {
  std::vector<NullDirection> out;
  const std::size_t rank = s.numerical_rank(relative);
  const auto n = static_cast<Eigen::Index>(hb.size());
  // null space = complement of the leading right singular vectors
  const RMatrix vr = s.v.leftCols(static_cast<Eigen::Index>(rank));
  const RMatrix complement = RMatrix::Identity(n, n) - vr * vr.transpose();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(complement);
  const RMatrix vnull = es.eigenvectors().rightCols(n - static_cast<Eigen::Index>(rank));
  for (Eigen::Index k = 0; k < vnull.cols(); ++k) {
    NullDirection nd;
    nd.coordinates = vnull.col(k);
    Eigen::Index idx = 0;
    nd.alignment = nd.coordinates.cwiseAbs().maxCoeff(&idx);
    nd.dominant_label = hb.label(static_cast<std::size_t>(idx));
    out.push_back(std::move(nd));
  }
  return out;
}

struct MlOptions {
  double tol = 1e-10;
  std::size_t max_iter = 5000;
  double probability_floor = 1e-12;
  double dilution = 0.5;
  bool keep_trace = false;
  std::optional<CMatrix> reference;
  /// Called with (iteration, trace-one iterate, log-likelihood) for every accepted iterate.
  std::function<void(std::size_t, const CMatrix&, double)> observer;
};

struct ReconstructionResult {
  CoherenceMatrix rho_hat;
  std::size_t iterations = 0;
  double log_likelihood = 0.0;
  double convergence_delta = 0.0;
  bool converged = false;
  std::size_t diluted_steps = 0;
  std::vector<double> loglik_trace;
  std::optional<double> fidelity;
  std::vector<std::string> warnings;
};

namespace detail {

inline double log_likelihood(const RVector& f, const RVector& p, double floor, std::size_t* floored = nullptr) {
  double l = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (f(k) <= 0.0) continue;
    if (p(k) < floor && floored) ++*floored;
    l += f(k) * std::log(std::max(p(k), floor));
  }
  return l;
}

}  // namespace detail

/// Maximum-likelihood estimate of the coherence matrix from relative intensities.
///
/// Multinomial model p_alpha = Tr(rho Pi_alpha) / Tr(rho G), G = sum Pi_alpha.
/// The fixed point rho <- N[R rho R], R = sum (f/p) Pi, runs on sigma = G^1/2 rho G^1/2,
/// where the measurement is complete (sums to the identity). A step that would
/// lower the likelihood is replaced by the diluted step (I + eps R) sigma (I + eps R),
/// eps halved from opts.dilution until the likelihood does not decrease.
inline ReconstructionResult ml_reconstruct(std::span<const double> data, const PovmSet& povms, const ModeBasis& basis,
                                           const MlOptions& opts = {}) {
  if (data.size() != povms.outcomes())
    throw DimensionError("data has " + std::to_string(data.size()) + " samples but the sensor has " +
                         std::to_string(povms.outcomes()) + " outcomes");
  if (povms.dim() != basis.dim()) throw DimensionError("POVM and basis dimensions differ");
  const auto d = static_cast<Eigen::Index>(basis.dim());
  RVector f(static_cast<Eigen::Index>(data.size()));
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!std::isfinite(data[k]) || data[k] < 0.0) throw ArgumentError("intensities must be finite and nonnegative");
    f(static_cast<Eigen::Index>(k)) = data[k];
    total += data[k];
  }
  if (!(total > 0.0)) throw DegenerateDataError("all intensities are zero");
  f /= total;

  std::vector<std::string> warnings;
  const CMatrix g = povms.total();
  Eigen::SelfAdjointEigenSolver<CMatrix> ges(hermitian_part(g));
  const RVector glam = ges.eigenvalues();
  const double gfloor = 1e-12 * glam.maxCoeff();
  RVector inv_sqrt(d), support(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const bool seen = glam(k) > gfloor;
    inv_sqrt(k) = seen ? 1.0 / std::sqrt(glam(k)) : 0.0;
    support(k) = seen ? 1.0 : 0.0;
  }
  if (support.sum() < static_cast<double>(d))
    warnings.push_back("measurement operators do not reach every mode; estimate restricted to the observed subspace");
  const CMatrix h = ges.eigenvectors() * inv_sqrt.asDiagonal() * ges.eigenvectors().adjoint();
  const CMatrix ident = ges.eigenvectors() * support.asDiagonal() * ges.eigenvectors().adjoint();
  const PovmSet complete = povms.transformed(h);

  auto to_rho = [&](const CMatrix& sigma) {
    CMatrix r = hermitian_part(h * sigma * h);
    return CMatrix(r / r.trace().real());
  };
  auto normalize = [](const CMatrix& m) {
    CMatrix r = hermitian_part(m);
    return CMatrix(r / r.trace().real());
  };

  CMatrix sigma = ident / support.sum();
  std::size_t floored = 0;
  RVector p = complete.probabilities(sigma);
  double loglik = detail::log_likelihood(f, p, opts.probability_floor, &floored);
  CMatrix rho = to_rho(sigma);
  std::vector<double> trace;
  if (opts.keep_trace) trace.push_back(loglik);
  if (opts.observer) opts.observer(0, rho, loglik);

  std::size_t iter = 0, diluted = 0;
  double delta = std::numeric_limits<double>::infinity();
  bool converged = false;
  // rounding noise in the summed likelihood; smaller differences do not steer the iteration
  auto slack = [](double l) { return 1e-12 * std::max(1.0, std::abs(l)); };

  while (iter < opts.max_iter) {
    RVector w(f.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) w(k) = f(k) > 0.0 ? f(k) / std::max(p(k), opts.probability_floor) : 0.0;
    const CMatrix r = complete.weighted_sum(w);

    CMatrix next = normalize(r * sigma * r);
    RVector pn = complete.probabilities(next);
    double ln = detail::log_likelihood(f, pn, opts.probability_floor);
    if (ln < loglik - slack(loglik)) {
      bool improved = false;
      for (double eps = opts.dilution; eps > 1e-9; eps *= 0.5) {
        const CMatrix step = ident + eps * r;
        next = normalize(step * sigma * step);
        pn = complete.probabilities(next);
        ln = detail::log_likelihood(f, pn, opts.probability_floor);
        if (ln >= loglik - slack(loglik)) {
          improved = true;
          break;
        }
      }
      if (!improved) {
        converged = true;  // no ascent direction left at working precision
        break;
      }
      ++diluted;
    }
    ++iter;
    const CMatrix rho_next = to_rho(next);
    delta = frobenius_distance(rho_next, rho);
    sigma = next;
    p = std::move(pn);
    loglik = ln;
    rho = rho_next;
    if (opts.keep_trace) trace.push_back(loglik);
    if (opts.observer) opts.observer(iter, rho, loglik);
    if (delta <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (floored > 0)
    warnings.push_back(std::to_string(floored) + " outcomes with data had zero predicted probability; floored at " +
                       std::to_string(opts.probability_floor));

  ReconstructionResult res{CoherenceMatrix(rho, basis)};
  res.iterations = iter;
  res.log_likelihood = loglik;
  res.convergence_delta = delta;
  res.converged = converged;
  res.diluted_steps = diluted;
  res.loglik_trace = std::move(trace);
  res.warnings = std::move(warnings);
  if (opts.reference) res.fidelity = fidelity(rho, *opts.reference);
  return res;
}

inline ReconstructionResult ml_reconstruct(const IntensityRecord& data, const SensorGeometry& geom,
                                           const ModeBasis& basis, const MlOptions& opts = {}) {
  if (data.lenses != geom.lens_count() || data.pixels_per_lens() != geom.pixel_count())
    throw DimensionError("intensity record does not match the sensor geometry");
  return ml_reconstruct(data.values, PovmSet::from_sensor(basis, geom), basis, opts);
}

struct LinearReconstruction {
  CoherenceMatrix rho;
  CMatrix unprojected;       // trace-one Hermitian pseudo-inverse estimate
  RVector coordinates;       // raw Gamma coordinates r = V S^+ U^T I
  double projection_shift;   // largest eigenvalue change caused by the PSD projection
  std::size_t rank;
};

/// Minimum-norm least-squares solution of I = P r, projected to the nearest
/// trace-one PSD matrix.
inline LinearReconstruction linear_reconstruct(std::span<const double> data, const SingularSpectrum& s,
                                               const HermitianBasis& hb, const ModeBasis& basis,
                                               double relative = kRankThreshold) {
  if (static_cast<std::size_t>(s.u.rows()) != data.size()) throw DimensionError("data length does not match P");
  const Eigen::Map<const RVector> y(data.data(), static_cast<Eigen::Index>(data.size()));
  const std::size_t rank = s.numerical_rank(relative);
  RVector coeff = s.u.transpose() * y;
  for (Eigen::Index k = 0; k < coeff.size(); ++k)
    coeff(k) = static_cast<std::size_t>(k) < rank ? coeff(k) / s.values(k) : 0.0;
  const RVector r = s.v * coeff;
  CMatrix hm = hb.from_coordinates(r);
  const double tr = hm.trace().real();
  if (!(tr > 0.0)) throw DegenerateDataError("linear estimate has nonpositive trace");
  hm /= tr;
  const CMatrix rho = project_to_density(hm);
  const double shift = (hermitian_eigenvalues(rho) - hermitian_eigenvalues(hm)).cwiseAbs().maxCoeff();
  return {CoherenceMatrix(rho, basis), hm, r, shift, rank};
}

inline LinearReconstruction linear_reconstruct(std::span<const double> data, const TomographyMatrix& t,
                                               const HermitianBasis& hb, const ModeBasis& basis,
                                               double relative = kRankThreshold) {
  return linear_reconstruct(data, singular_spectrum(t), hb, basis, relative);
}

}  // namespace shtomo
