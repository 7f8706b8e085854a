#pragma once

// Shack-Hartmann instrument model: microlens apertures, detector pixels,
// rank-one measurement operators and Born-rule intensities.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shtomo/errors.hpp"
#include "shtomo/field_model.hpp"
#include "shtomo/linalg.hpp"

namespace shtomo {

enum class Dimension { One = 1, Two = 2 };

enum class ApertureKind { Square, Hexagon, Gaussian, Pointlike, Unbounded };

/// Pupil function A(x) of a single microlens, in lens-local coordinates.
///
/// `size` is the side of a square, the flat-to-flat width of a hexagon, the
/// waist w of a Gaussian A(x) = exp(-|x|^2 / 2w^2), or the window width of an
/// unbounded (large-lens) aperture. Hexagons have their flats facing the
/// neighbors of a hexagonal lattice laid out along the x axis.
struct Aperture {
  ApertureKind kind = ApertureKind::Square;
  double size = 1.0;

  static constexpr double kGaussianSupport = 8.0;  // half-width of the quadrature box, in waists

  static Aperture square(double side) { return {ApertureKind::Square, side}; }
  static Aperture hexagon(double width) { return {ApertureKind::Hexagon, width}; }
  static Aperture gaussian(double waist) { return {ApertureKind::Gaussian, waist}; }
  static Aperture pointlike() { return {ApertureKind::Pointlike, 0.0}; }
  static Aperture unbounded(double window) { return {ApertureKind::Unbounded, window}; }

  bool compact() const { return kind == ApertureKind::Square || kind == ApertureKind::Hexagon; }

  /// Side of the square quadrature box that covers the aperture.
  double box_side() const {
    switch (kind) {
      case ApertureKind::Hexagon: return 2.0 * size / std::sqrt(3.0);
      case ApertureKind::Gaussian: return 2.0 * kGaussianSupport * size;
      default: return size;
    }
  }

  double weight(Point p, Dimension dim) const {
    switch (kind) {
      case ApertureKind::Square:
      case ApertureKind::Unbounded:
        return (std::abs(p.x) <= 0.5 * size && (dim == Dimension::One || std::abs(p.y) <= 0.5 * size)) ? 1.0
                                                                                                       : 0.0;
      case ApertureKind::Hexagon: {
        const double h = 0.5 * size;
        const double c = 0.5, s = 0.5 * std::sqrt(3.0);
        return (std::abs(p.x) <= h && std::abs(c * p.x + s * p.y) <= h && std::abs(-c * p.x + s * p.y) <= h)
                   ? 1.0
                   : 0.0;
      }
      case ApertureKind::Gaussian:
        return std::exp(-(p.x * p.x + p.y * p.y) / (2.0 * size * size));
      case ApertureKind::Pointlike:
        return 1.0;
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case ApertureKind::Square: return "square";
      case ApertureKind::Hexagon: return "hexagon";
      case ApertureKind::Gaussian: return "gaussian";
      case ApertureKind::Pointlike: return "pointlike";
      case ApertureKind::Unbounded: return "unbounded";
    }
    return "?";
  }
};

/// Pixel centers behind each lens, as CCD-plane offsets from the lens axis.
struct PixelGrid {
  std::vector<double> u;
  std::vector<double> v{0.0};
  double pitch = 0.0;

  /// count_u x count_v pixels of the given pitch, centered on the lens axis.
  static PixelGrid centered(std::size_t count_u, std::size_t count_v, double pitch) {
    PixelGrid g;
    g.pitch = pitch;
    g.u = centered_axis(count_u, pitch);
    g.v = count_v == 0 ? std::vector<double>{0.0} : centered_axis(count_v, pitch);
    return g;
  }

  static std::vector<double> centered_axis(std::size_t n, double pitch) {
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = (static_cast<double>(k) - 0.5 * (static_cast<double>(n) - 1.0)) * pitch;
    return a;
  }
};

class SensorGeometry {
 public:
  struct Params {
    Dimension dimension = Dimension::Two;
    std::vector<Point> lens_centers;
    Aperture aperture;
    double focal_length = 1.0;
    double wavelength = 2.0 * kPi;
    PixelGrid pixels;
    std::size_t quadrature_points = 256;
    bool finite_pixel = false;
  };

  explicit SensorGeometry(Params p) : p_(std::move(p)) {
    if (!(p_.focal_length > 0.0)) throw GeometryError("focal length must be positive");
    if (!(p_.wavelength > 0.0)) throw GeometryError("wavelength must be positive");
    if (p_.lens_centers.empty()) throw GeometryError("sensor needs at least one lens");
    if (p_.pixels.u.empty() || p_.pixels.v.empty()) throw GeometryError("pixel grid is empty");
    if (p_.dimension == Dimension::One && p_.pixels.v.size() != 1)
      throw GeometryError("one-dimensional sensors have a single pixel row");
    const std::size_t n = p_.quadrature_points;
    if (n < 32 || (n & (n - 1)) != 0) throw SamplingError("quadrature points must be a power of two >= 32");
    if (p_.aperture.kind != ApertureKind::Pointlike && !(p_.aperture.size > 0.0))
      throw ApertureError("aperture size must be positive");
    if (p_.aperture.kind == ApertureKind::Hexagon && p_.dimension == Dimension::One)
      throw ApertureError("hexagonal apertures need a two-dimensional sensor");
    if (p_.finite_pixel && !(p_.pixels.pitch > 0.0))
      throw GeometryError("finite-area pixels need a positive pixel pitch");
    for (std::size_t i = 0; i < p_.lens_centers.size(); ++i) {
      for (std::size_t j = i + 1; j < p_.lens_centers.size(); ++j) {
        const double dist = (p_.lens_centers[i] - p_.lens_centers[j]).norm();
        if (dist == 0.0) throw GeometryError("lens centers must be distinct");
        if (p_.aperture.compact() && dist < p_.aperture.size * (1.0 - 1e-9))
          throw GeometryError("apertures of lenses " + std::to_string(i) + " and " + std::to_string(j) +
                              " overlap");
      }
    }
  }

  /// Lens centers of a hexagonal array: `rings` shells around a central lens.
  static std::vector<Point> hexagonal_layout(int rings, double pitch) {
    std::vector<Point> out{{0.0, 0.0}};
    const int dq[6] = {1, 0, -1, -1, 0, 1};
    const int dr[6] = {0, 1, 1, 0, -1, -1};
    for (int ring = 1; ring <= rings; ++ring) {
      int q = ring, r = 0;
      // walk the ring counterclockwise starting on the +x axis
      for (int side = 0; side < 6; ++side) {
        for (int step = 0; step < ring; ++step) {
          out.push_back({pitch * (q + 0.5 * r), pitch * (0.5 * std::sqrt(3.0) * r)});
          q += dq[(side + 2) % 6];
          r += dr[(side + 2) % 6];
        }
      }
    }
    return out;
  }

  Dimension dimension() const { return p_.dimension; }
  const std::vector<Point>& lens_centers() const { return p_.lens_centers; }
  const Aperture& aperture() const { return p_.aperture; }
  double focal_length() const { return p_.focal_length; }
  double wavelength() const { return p_.wavelength; }
  const PixelGrid& pixels() const { return p_.pixels; }
  std::size_t quadrature_points() const { return p_.quadrature_points; }
  bool finite_pixel() const { return p_.finite_pixel; }
  const Params& params() const { return p_; }

  std::size_t lens_count() const { return p_.lens_centers.size(); }
  std::size_t pixel_count() const { return p_.pixels.u.size() * p_.pixels.v.size(); }

  /// Pixel index j = iv * nu + iu.
  std::pair<std::size_t, std::size_t> pixel_uv(std::size_t j) const {
    return {j % p_.pixels.u.size(), j / p_.pixels.u.size()};
  }

  Point pixel_position(std::size_t j) const {
    const auto [iu, iv] = pixel_uv(j);
    return {p_.pixels.u[iu], p_.pixels.v[iv]};
  }

  /// Momentum displacement dp = 2 pi u / (lambda f).
  double momentum_scale() const { return 2.0 * kPi / (p_.wavelength * p_.focal_length); }

  Point pixel_momentum(std::size_t j) const {
    const Point u = pixel_position(j);
    return {momentum_scale() * u.x, momentum_scale() * u.y};
  }

  /// Sub-samples per pixel: 1 for point pixels, 2 (1D) or 2x2 (2D) for finite-area pixels.
  std::size_t subsamples_per_axis() const { return p_.finite_pixel ? 2 : 1; }
  std::size_t subsamples() const {
    const std::size_t s = subsamples_per_axis();
    return p_.dimension == Dimension::Two ? s * s : s;
  }

 private:
  Params p_;
};

/// Rank-one (or, with finite-area pixels, low-rank) POVM element for one (lens, pixel).
struct MeasurementOperator {
  CMatrix pi;
  std::size_t lens_index = 0;
  std::size_t pixel_index = 0;
};

namespace detail {

inline std::vector<double> subsample_axis(const std::vector<double>& centers, std::size_t per_axis, double pitch) {
  if (per_axis == 1) return centers;
  std::vector<double> out;
  out.reserve(centers.size() * 2);
  for (double c : centers) {
    out.push_back(c - 0.25 * pitch);
    out.push_back(c + 0.25 * pitch);
  }
  return out;
}

inline CMatrix phase_table(const std::vector<double>& momenta, const std::vector<double>& nodes) {
  CMatrix e(static_cast<Eigen::Index>(momenta.size()), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t r = 0; r < momenta.size(); ++r)
    for (std::size_t c = 0; c < nodes.size(); ++c)
      e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::polar(1.0, -momenta[r] * nodes[c]);
  return e;
}

}  // namespace detail

/// Amplitudes psi_{m,i}(dp_j) = (1/S) * integral conj(A(x)) psi_m(c_i + x) exp(-i dp_j . x) dx
/// for one lens, with S = integral A(x) dx. Returned as d x (pixels * subsamples),
/// column j * subsamples + s. The integral is a midpoint-rule sum on an N-point
/// (per axis) grid over the aperture box, evaluated exactly at each pixel momentum.
inline CMatrix response_amplitudes(const ModeBasis& basis, const SensorGeometry& geom, std::size_t lens) {
  if (lens >= geom.lens_count()) throw ArgumentError("lens index out of range");
  if (basis.kind() == BasisKind::Vortex && geom.dimension() == Dimension::One)
    throw DimensionError("vortex modes need a two-dimensional sensor");

  const auto d = static_cast<Eigen::Index>(basis.dim());
  const std::size_t per_axis = geom.subsamples_per_axis();
  const std::size_t sub = geom.subsamples();
  const std::size_t npix = geom.pixel_count();
  const std::size_t nu = geom.pixels().u.size();
  const Point center = geom.lens_centers()[lens];
  const bool two_d = geom.dimension() == Dimension::Two;

  std::vector<double> mu = detail::subsample_axis(geom.pixels().u, per_axis, geom.pixels().pitch);
  std::vector<double> mv = two_d ? detail::subsample_axis(geom.pixels().v, per_axis, geom.pixels().pitch)
                                 : std::vector<double>{0.0};
  for (double& x : mu) x *= geom.momentum_scale();
  for (double& x : mv) x *= geom.momentum_scale();

  CMatrix out(d, static_cast<Eigen::Index>(npix * sub));
  auto column = [&](std::size_t iu, std::size_t iv, std::size_t a, std::size_t b) {
    const std::size_t j = iv * nu + iu;
    const std::size_t s = two_d ? b * per_axis + a : a;
    return static_cast<Eigen::Index>(j * sub + s);
  };

  if (geom.aperture().kind == ApertureKind::Pointlike) {
    for (Eigen::Index m = 0; m < d; ++m) out.row(m).setConstant(basis.amplitude(static_cast<std::size_t>(m), center));
    return out;
  }

  const std::size_t n = geom.quadrature_points();
  const double side = geom.aperture().box_side();
  const double h = side / static_cast<double>(n);
  double max_dp = 0.0;
  for (double x : mu) max_dp = std::max(max_dp, std::abs(x));
  for (double x : mv) max_dp = std::max(max_dp, std::abs(x));
  if ((basis.max_bandwidth() + max_dp) * h > kPi)
    throw SamplingError("aperture quadrature step " + std::to_string(h) + " aliases mode/pixel bandwidth " +
                        std::to_string(basis.max_bandwidth() + max_dp));

  std::vector<double> nodes(n);
  for (std::size_t k = 0; k < n; ++k) nodes[k] = (static_cast<double>(k) + 0.5) * h - 0.5 * side;
  const CMatrix ex = detail::phase_table(mu, nodes);

  if (!two_d) {
    std::vector<double> w(n);
    double area = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      w[a] = geom.aperture().weight({nodes[a], 0.0}, Dimension::One);
      area += w[a] * h;
    }
    CVector f(static_cast<Eigen::Index>(n));
    for (Eigen::Index m = 0; m < d; ++m) {
      for (std::size_t a = 0; a < n; ++a)
        f(static_cast<Eigen::Index>(a)) =
            w[a] == 0.0 ? cplx{} : w[a] * basis.amplitude(static_cast<std::size_t>(m), center + Point{nodes[a], 0.0});
      const CVector r = ex * f * (h / area);
      for (std::size_t iu = 0; iu < nu; ++iu)
        for (std::size_t a = 0; a < per_axis; ++a) out(m, column(iu, 0, a, 0)) = r(static_cast<Eigen::Index>(iu * per_axis + a));
    }
    return out;
  }

  const std::size_t nv = geom.pixels().v.size();
  const CMatrix ey = detail::phase_table(mv, nodes);
  RMatrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          geom.aperture().weight({nodes[a], nodes[b]}, Dimension::Two);
  const double area = w.sum() * h * h;

  CMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index m = 0; m < d; ++m) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const double wt = w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        f(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            wt == 0.0 ? cplx{} : wt * basis.amplitude(static_cast<std::size_t>(m), center + Point{nodes[a], nodes[b]});
      }
    const CMatrix r = (ex * f) * ey.transpose() * (h * h / area);
    for (std::size_t iv = 0; iv < nv; ++iv)
      for (std::size_t iu = 0; iu < nu; ++iu)
        for (std::size_t b = 0; b < per_axis; ++b)
          for (std::size_t a = 0; a < per_axis; ++a)
            out(m, column(iu, iv, a, b)) =
                r(static_cast<Eigen::Index>(iu * per_axis + a), static_cast<Eigen::Index>(iv * per_axis + b));
  }
  return out;
}

/// All measurement outcomes of a sensor, stored as amplitude columns so that
/// Pi_alpha = (1/S) sum_s conj(a_{alpha,s}) a_{alpha,s}^T.
class PovmSet {
 public:
  PovmSet(CMatrix amplitudes, std::size_t subsamples, std::vector<std::pair<std::size_t, std::size_t>> index)
      : amps_(std::move(amplitudes)), sub_(subsamples), index_(std::move(index)) {
    if (sub_ == 0 || static_cast<std::size_t>(amps_.cols()) != index_.size() * sub_)
      throw DimensionError("POVM amplitude table does not match its outcome index");
  }

  static PovmSet from_sensor(const ModeBasis& basis, const SensorGeometry& geom) {
    const std::size_t per_lens = geom.pixel_count() * geom.subsamples();
    CMatrix all(static_cast<Eigen::Index>(basis.dim()), static_cast<Eigen::Index>(per_lens * geom.lens_count()));
    std::vector<std::pair<std::size_t, std::size_t>> index;
    index.reserve(geom.lens_count() * geom.pixel_count());
    for (std::size_t i = 0; i < geom.lens_count(); ++i) {
      all.middleCols(static_cast<Eigen::Index>(i * per_lens), static_cast<Eigen::Index>(per_lens)) =
          response_amplitudes(basis, geom, i);
      for (std::size_t j = 0; j < geom.pixel_count(); ++j) index.emplace_back(i, j);
    }
    return PovmSet(std::move(all), geom.subsamples(), std::move(index));
  }

  /// Rank-one outcomes given by their kets (Pi = conj(a) a^T).
  static PovmSet from_kets(const std::vector<CVector>& kets) {
    if (kets.empty()) throw ArgumentError("no measurement kets");
    CMatrix a(kets.front().size(), static_cast<Eigen::Index>(kets.size()));
    std::vector<std::pair<std::size_t, std::size_t>> index;
    for (std::size_t k = 0; k < kets.size(); ++k) {
      if (kets[k].size() != a.rows()) throw DimensionError("measurement kets differ in length");
      a.col(static_cast<Eigen::Index>(k)) = kets[k];
      index.emplace_back(0, k);
    }
    return PovmSet(std::move(a), 1, std::move(index));
  }

  std::size_t dim() const { return static_cast<std::size_t>(amps_.rows()); }
  std::size_t outcomes() const { return index_.size(); }
  std::size_t subsamples() const { return sub_; }
  const CMatrix& amplitudes() const { return amps_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& index() const { return index_; }

  /// Tr(rho Pi_alpha) for every outcome.
  RVector probabilities(const CMatrix& rho) const {
    const CMatrix b = rho * amps_.conjugate();
    const RVector per_column = amps_.cwiseProduct(b).colwise().sum().real().transpose();
    RVector out(static_cast<Eigen::Index>(outcomes()));
    for (std::size_t k = 0; k < outcomes(); ++k)
      out(static_cast<Eigen::Index>(k)) =
          per_column.segment(static_cast<Eigen::Index>(k * sub_), static_cast<Eigen::Index>(sub_)).sum() /
          static_cast<double>(sub_);
    return out;
  }

  /// sum_alpha w_alpha Pi_alpha.
  CMatrix weighted_sum(const RVector& w) const {
    RVector expanded(amps_.cols());
    for (std::size_t k = 0; k < outcomes(); ++k)
      expanded.segment(static_cast<Eigen::Index>(k * sub_), static_cast<Eigen::Index>(sub_))
          .setConstant(w(static_cast<Eigen::Index>(k)) / static_cast<double>(sub_));
    return amps_.conjugate() * expanded.asDiagonal() * amps_.transpose();
  }

  CMatrix total() const { return weighted_sum(RVector::Ones(static_cast<Eigen::Index>(outcomes()))); }

  CMatrix element(std::size_t alpha) const {
    const auto block = amps_.middleCols(static_cast<Eigen::Index>(alpha * sub_), static_cast<Eigen::Index>(sub_));
    return block.conjugate() * block.transpose() / static_cast<double>(sub_);
  }

  /// Outcomes of T Pi T^dagger, i.e. amplitude columns multiplied by conj(T).
  PovmSet transformed(const CMatrix& t) const { return PovmSet(t.conjugate() * amps_, sub_, index_); }

 private:
  CMatrix amps_;
  std::size_t sub_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;
};

/// (Pi_ij)_mn = psi_{n,i}(dp_j) conj(psi_{m,i}(dp_j)).
inline MeasurementOperator povm_element(const ModeBasis& basis, const SensorGeometry& geom, std::size_t lens,
                                        std::size_t pixel) {
  if (pixel >= geom.pixel_count()) throw ArgumentError("pixel index out of range");
  const CMatrix amps = response_amplitudes(basis, geom, lens);
  const auto sub = static_cast<Eigen::Index>(geom.subsamples());
  const auto block = amps.middleCols(static_cast<Eigen::Index>(pixel) * sub, sub);
  return {block.conjugate() * block.transpose() / static_cast<double>(sub), lens, pixel};
}

/// Unnormalized sinc, sin(z) / z.
inline double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

/// Closed-form ket for a 1D square aperture of the given side and plane waves
/// exp(-i p x): a_m = exp(-i p_m dx) sinc((dp + p_m) side / 2).
inline CVector sinc_ket(std::span<const double> momenta, double dx, double dp, double side = 2.0) {
  CVector a(static_cast<Eigen::Index>(momenta.size()));
  for (std::size_t m = 0; m < momenta.size(); ++m)
    a(static_cast<Eigen::Index>(m)) = std::polar(sinc(0.5 * side * (dp + momenta[m])), -momenta[m] * dx);
  return a;
}

/// (Pi)_mn = sinc(dp + p_m) sinc(dp + p_n) exp(i (p_m - p_n) dx), with sinc arguments
/// scaled by side / 2 (side = 2 gives the dimensionless form).
inline MeasurementOperator sinc_povm_analytic(std::span<const double> momenta, double dx, double dp,
                                              double side = 2.0) {
  const CVector a = sinc_ket(momenta, dx, dp, side);
  return {a.conjugate() * a.transpose(), 0, 0};
}

struct IntensityRecord {
  std::size_t lenses = 0;
  std::size_t pixels_u = 0;
  std::size_t pixels_v = 0;
  std::vector<double> values;  // lens-major, pixel j = iv * pixels_u + iu
  double exposure = 1.0;

  std::size_t pixels_per_lens() const { return pixels_u * pixels_v; }
  double value(std::size_t lens, std::size_t pixel) const { return values[lens * pixels_per_lens() + pixel]; }
  double total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  double lens_power(std::size_t lens) const {
    double s = 0.0;
    for (std::size_t j = 0; j < pixels_per_lens(); ++j) s += value(lens, j);
    return s;
  }
  RVector as_vector() const { return Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size())); }
};

struct NoiseSpec {
  enum class Kind { None, AdditiveGaussian, Poisson, Background };
  Kind kind = Kind::None;
  double sigma = 0.0;    // Gaussian deviation, as a fraction of the peak intensity
  double photons = 0.0;  // Poisson: expected total count
  double offset = 0.0;   // Background: constant level, as a fraction of the peak intensity
  std::uint64_t seed = 0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(double sigma, std::uint64_t seed) { return {Kind::AdditiveGaussian, sigma, 0.0, 0.0, seed}; }
  static NoiseSpec poisson(double photons, std::uint64_t seed) { return {Kind::Poisson, 0.0, photons, 0.0, seed}; }
  static NoiseSpec background(double offset, double sigma, std::uint64_t seed) {
    return {Kind::Background, sigma, 0.0, offset, seed};
  }

  std::string name() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::AdditiveGaussian: return "gaussian";
      case Kind::Poisson: return "poisson";
      case Kind::Background: return "background";
    }
    return "?";
  }
};

inline void apply_noise(std::vector<double>& values, double& exposure, const NoiseSpec& noise) {
  if (noise.kind == NoiseSpec::Kind::None) return;
  std::mt19937_64 rng(noise.seed);
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, v);
  switch (noise.kind) {
    case NoiseSpec::Kind::AdditiveGaussian:
    case NoiseSpec::Kind::Background: {
      if (noise.sigma < 0.0) throw ArgumentError("noise sigma must be nonnegative");
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (double& v : values) v = std::max(0.0, v + noise.offset * peak + noise.sigma * peak * gauss(rng));
      break;
    }
    case NoiseSpec::Kind::Poisson: {
      if (!(noise.photons > 0.0)) throw ArgumentError("Poisson noise needs a positive photon budget");
      double total = 0.0;
      for (double v : values) total += v;
      if (!(total > 0.0)) return;
      const double scale = noise.photons / total;
      for (double& v : values) {
        std::poisson_distribution<long long> pois(v * scale);
        v = v > 0.0 ? static_cast<double>(pois(rng)) : 0.0;
      }
      exposure *= scale;
      break;
    }
    case NoiseSpec::Kind::None: break;
  }
}

/// I_ij = Tr(rho Pi_ij), followed by the requested noise model.
inline IntensityRecord simulate_intensities(const CoherenceMatrix& rho, const SensorGeometry& geom, const PovmSet& povms,
                                            const NoiseSpec& noise = {}) {
  if (povms.dim() != rho.dim()) throw DimensionError("state and sensor bases differ in dimension");
  IntensityRecord rec;
  rec.lenses = geom.lens_count();
  rec.pixels_u = geom.pixels().u.size();
  rec.pixels_v = geom.pixels().v.size();
  const RVector p = povms.probabilities(rho.rho());
  rec.values.resize(static_cast<std::size_t>(p.size()));
  for (Eigen::Index k = 0; k < p.size(); ++k) rec.values[static_cast<std::size_t>(k)] = std::max(p(k), 0.0);
  apply_noise(rec.values, rec.exposure, noise);
  return rec;
}

inline IntensityRecord simulate_intensities(const CoherenceMatrix& rho, const SensorGeometry& geom,
                                            const NoiseSpec& noise = {}) {
  return simulate_intensities(rho, geom, PovmSet::from_sensor(rho.basis(), geom), noise);
}

/// Born-rule samples taken with Gaussian apertures, labelled by the phase-space
/// point (lens center, pixel momentum) they probe.
struct HusimiSamples {
  std::vector<Point> position;
  std::vector<Point> momentum;
  std::vector<double> q;
};

inline HusimiSamples husimi_sample(const CoherenceMatrix& rho, const SensorGeometry& geom) {
  if (geom.aperture().kind != ApertureKind::Gaussian)
    throw ApertureError("Husimi sampling needs Gaussian apertures, got " + geom.aperture().name());
  const IntensityRecord rec = simulate_intensities(rho, geom);
  HusimiSamples out;
  for (std::size_t i = 0; i < geom.lens_count(); ++i)
    for (std::size_t j = 0; j < geom.pixel_count(); ++j) {
      out.position.push_back(geom.lens_centers()[i]);
      out.momentum.push_back(geom.pixel_momentum(j));
      out.q.push_back(rec.value(i, j));
    }
  return out;
}

}  // namespace shtomo
