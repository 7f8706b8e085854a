#pragma once

// Propagation of coherence matrices to an output plane through mode
// decomposition: propagate every basis mode, then contract with rho.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "shtomo/errors.hpp"
#include "shtomo/field_model.hpp"
#include "shtomo/linalg.hpp"

namespace shtomo {

/// Uniform, cell-centered rectangular grid symmetric about the origin.
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  static Grid2D centered(std::size_t n, double extent) {
    if (n == 0 || !(extent > 0.0)) throw ArgumentError("grid needs points and a positive extent");
    const double h = extent / static_cast<double>(n);
    return {n, n, h, h};
  }

  double x(std::size_t i) const { return (static_cast<double>(i) - 0.5 * (static_cast<double>(nx) - 1.0)) * dx; }
  double y(std::size_t j) const { return (static_cast<double>(j) - 0.5 * (static_cast<double>(ny) - 1.0)) * dy; }
  Point at(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }
  double half_extent_x() const { return 0.5 * static_cast<double>(nx) * dx; }
  double half_extent_y() const { return 0.5 * static_cast<double>(ny) * dy; }
  double cell_area() const { return dx * dy; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Response function h(x, x') between a sampled source plane and an output grid.
///
/// Fraunhofer: h = exp(-i k x.x' / f) / (i lambda f), the focal plane of a lens.
/// Fresnel: h = exp(i k z) / (i lambda z) exp(i k |x - x'|^2 / 2z).
struct ResponseKernel {
  enum class Kind { Fraunhofer, Fresnel };
  Kind kind = Kind::Fraunhofer;
  double distance = 1.0;  // focal length (Fraunhofer) or propagation distance (Fresnel)
  double wavelength = 1.0;
  Grid2D source;
  Grid2D output;

  double wavenumber() const { return 2.0 * kPi / wavelength; }

  void validate() const {
    if (!(distance > 0.0)) throw ArgumentError("propagation distance must be positive");
    if (!(wavelength > 0.0)) throw ArgumentError("wavelength must be positive");
    if (source.nx == 0 || source.ny == 0 || output.nx == 0 || output.ny == 0)
      throw ArgumentError("propagation grids must be nonempty");
    // the discrete transform of the source grid repeats every lambda * distance / h
    const double limit_x = wavelength * distance / (2.0 * source.dx);
    const double limit_y = wavelength * distance / (2.0 * source.dy);
    if (output.half_extent_x() > limit_x * (1.0 + 1e-12) || output.half_extent_y() > limit_y * (1.0 + 1e-12))
      throw SamplingError("output grid extends past the alias-free range " + std::to_string(limit_x) +
                          " of the source sampling");
  }
};

struct IntensityMap {
  Grid2D grid;
  RMatrix values;  // values(i, j) at grid.at(i, j)

  double total_power() const { return values.sum() * grid.cell_area(); }
};

namespace detail {

inline CMatrix kernel_phase(const Grid2D& out, bool along_x, const Grid2D& src, double scale) {
  const std::size_t no = along_x ? out.nx : out.ny;
  const std::size_t ns = along_x ? src.nx : src.ny;
  CMatrix e(static_cast<Eigen::Index>(no), static_cast<Eigen::Index>(ns));
  for (std::size_t i = 0; i < no; ++i) {
    const double u = along_x ? out.x(i) : out.y(i);
    for (std::size_t a = 0; a < ns; ++a) {
      const double x = along_x ? src.x(a) : src.y(a);
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = std::polar(1.0, -scale * u * x);
    }
  }
  return e;
}

}  // namespace detail

/// Propagates a field sampled on kernel.source (field(i, j) at source.at(i, j)).
inline CMatrix propagate_field(const CMatrix& field, const ResponseKernel& kernel) {
  kernel.validate();
  const Grid2D& src = kernel.source;
  const Grid2D& out = kernel.output;
  if (field.rows() != static_cast<Eigen::Index>(src.nx) || field.cols() != static_cast<Eigen::Index>(src.ny))
    throw DimensionError("field does not match the source grid");
  const double k = kernel.wavenumber();
  const double z = kernel.distance;
  const double scale = k / z;
  CMatrix in = field;
  if (kernel.kind == ResponseKernel::Kind::Fresnel) {
    for (std::size_t i = 0; i < src.nx; ++i)
      for (std::size_t j = 0; j < src.ny; ++j) {
        const Point p = src.at(i, j);
        in(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *=
            std::polar(1.0, 0.5 * k * (p.x * p.x + p.y * p.y) / z);
      }
  }
  const CMatrix ex = detail::kernel_phase(out, true, src, scale);
  const CMatrix ey = detail::kernel_phase(out, false, src, scale);
  const cplx prefactor = src.cell_area() / (kI * kernel.wavelength * z);
  CMatrix result = prefactor * (ex * in * ey.transpose());
  if (kernel.kind == ResponseKernel::Kind::Fresnel) {
    for (std::size_t i = 0; i < out.nx; ++i)
      for (std::size_t j = 0; j < out.ny; ++j) {
        const Point p = out.at(i, j);
        result(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *=
            std::polar(1.0, k * z + 0.5 * k * (p.x * p.x + p.y * p.y) / z);
      }
  }
  return result;
}

inline CMatrix sample_mode(const ModeBasis& basis, std::size_t m, const Grid2D& grid) {
  CMatrix f(static_cast<Eigen::Index>(grid.nx), static_cast<Eigen::Index>(grid.ny));
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.ny; ++j)
      f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = basis.amplitude(m, grid.at(i, j));
  return f;
}

struct PropagatedModes {
  Grid2D grid;
  std::vector<CMatrix> fields;  // one output-grid field per basis mode
};

inline void check_source_sampling(const ModeBasis& basis, const ResponseKernel& kernel) {
  const double h = std::max(kernel.source.dx, kernel.source.dy);
  if (basis.max_bandwidth() * h > kPi)
    throw SamplingError("source step " + std::to_string(h) + " undersamples mode bandwidth " +
                        std::to_string(basis.max_bandwidth()));
}

inline PropagatedModes propagate_modes(const ModeBasis& basis, const ResponseKernel& kernel) {
  kernel.validate();
  check_source_sampling(basis, kernel);
  PropagatedModes out{kernel.output, {}};
  for (std::size_t m = 0; m < basis.dim(); ++m) out.fields.push_back(propagate_field(sample_mode(basis, m, kernel.source), kernel));
  return out;
}

/// Propagated mode amplitudes at arbitrary output points (d x points), by direct summation.
inline CMatrix propagate_modes_at(const ModeBasis& basis, const ResponseKernel& kernel, std::span<const Point> points) {
  kernel.validate();
  check_source_sampling(basis, kernel);
  const Grid2D& src = kernel.source;
  const double k = kernel.wavenumber();
  const double z = kernel.distance;
  const bool fresnel = kernel.kind == ResponseKernel::Kind::Fresnel;
  const auto d = static_cast<Eigen::Index>(basis.dim());
  const auto ns = static_cast<Eigen::Index>(src.nx * src.ny);
  CMatrix samples(d, ns);
  for (std::size_t i = 0; i < src.nx; ++i)
    for (std::size_t j = 0; j < src.ny; ++j) {
      const Point p = src.at(i, j);
      const cplx chirp = fresnel ? std::polar(1.0, 0.5 * k * (p.x * p.x + p.y * p.y) / z) : cplx{1.0, 0.0};
      for (Eigen::Index m = 0; m < d; ++m)
        samples(m, static_cast<Eigen::Index>(i * src.ny + j)) = chirp * basis.amplitude(static_cast<std::size_t>(m), p);
    }
  const cplx prefactor = src.cell_area() / (kI * kernel.wavelength * z);
  CMatrix out(d, static_cast<Eigen::Index>(points.size()));
  CVector phase(ns);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const Point u = points[q];
    for (std::size_t i = 0; i < src.nx; ++i)
      for (std::size_t j = 0; j < src.ny; ++j) {
        const Point p = src.at(i, j);
        phase(static_cast<Eigen::Index>(i * src.ny + j)) = std::polar(1.0, -k * (u.x * p.x + u.y * p.y) / z);
      }
    cplx post = prefactor;
    if (fresnel) post *= std::polar(1.0, k * z + 0.5 * k * (u.x * u.x + u.y * u.y) / z);
    out.col(static_cast<Eigen::Index>(q)) = post * (samples * phase);
  }
  return out;
}

/// I(x) = sum_mn psi~_m(x) rho_mn conj(psi~_n(x)) for amplitudes stored as d x points.
inline RVector contract_intensity(const CMatrix& rho, const CMatrix& amps) {
  const RVector v = amps.cwiseProduct(rho * amps.conjugate()).colwise().sum().real().transpose();
  return v.cwiseMax(0.0);
}

inline IntensityMap far_field_intensity(const CMatrix& rho, const PropagatedModes& modes) {
  const auto d = static_cast<Eigen::Index>(modes.fields.size());
  if (rho.rows() != d) throw DimensionError("coherence matrix and propagated modes differ in dimension");
  const Grid2D& g = modes.grid;
  CMatrix amps(d, static_cast<Eigen::Index>(g.nx * g.ny));
  for (Eigen::Index m = 0; m < d; ++m)
    amps.row(m) = Eigen::Map<const CVector>(modes.fields[static_cast<std::size_t>(m)].data(), amps.cols()).transpose();
  const RVector v = contract_intensity(rho, amps);
  return {g, Eigen::Map<const RMatrix>(v.data(), static_cast<Eigen::Index>(g.nx), static_cast<Eigen::Index>(g.ny))};
}

inline IntensityMap far_field_intensity(const CoherenceMatrix& rho, const ModeBasis& basis, const ResponseKernel& kernel) {
  if (rho.dim() != basis.dim()) throw DimensionError("coherence matrix and basis differ in dimension");
  return far_field_intensity(rho.rho(), propagate_modes(basis, kernel));
}

/// Intensity sampled on a circle of the given radius in the output plane.
inline std::vector<double> ring_intensity(const CoherenceMatrix& rho, const ResponseKernel& kernel, double radius,
                                          std::size_t samples) {
  std::vector<Point> pts(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const double phi = 2.0 * kPi * static_cast<double>(s) / static_cast<double>(samples);
    pts[s] = {radius * std::cos(phi), radius * std::sin(phi)};
  }
  const RVector v = contract_intensity(rho.rho(), propagate_modes_at(rho.basis(), kernel, pts));
  return {v.data(), v.data() + v.size()};
}

/// (max - min) / (max + min) of a profile.
inline double modulation_depth(std::span<const double> profile) {
  if (profile.empty()) throw ArgumentError("empty profile");
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  if (*hi + *lo <= 0.0) throw DegenerateDataError("profile is identically zero");
  return (*hi - *lo) / (*hi + *lo);
}

/// Bilinear resampling; points outside the source grid read as zero.
inline IntensityMap resample(const IntensityMap& m, const Grid2D& target) {
  IntensityMap out{target, RMatrix::Zero(static_cast<Eigen::Index>(target.nx), static_cast<Eigen::Index>(target.ny))};
  const double x0 = m.grid.x(0), y0 = m.grid.y(0);
  for (std::size_t i = 0; i < target.nx; ++i)
    for (std::size_t j = 0; j < target.ny; ++j) {
      const double fx = (target.x(i) - x0) / m.grid.dx;
      const double fy = (target.y(j) - y0) / m.grid.dy;
      if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(m.grid.nx - 1) || fy > static_cast<double>(m.grid.ny - 1))
        continue;
      const auto ix = std::min(static_cast<std::size_t>(fx), m.grid.nx > 1 ? m.grid.nx - 2 : 0);
      const auto iy = std::min(static_cast<std::size_t>(fy), m.grid.ny > 1 ? m.grid.ny - 2 : 0);
      const double tx = m.grid.nx > 1 ? fx - static_cast<double>(ix) : 0.0;
      const double ty = m.grid.ny > 1 ? fy - static_cast<double>(iy) : 0.0;
      auto at = [&](std::size_t a, std::size_t b) {
        return m.values(static_cast<Eigen::Index>(std::min(a, m.grid.nx - 1)),
                        static_cast<Eigen::Index>(std::min(b, m.grid.ny - 1)));
      };
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) + (1 - tx) * ty * at(ix, iy + 1) +
          tx * ty * at(ix + 1, iy + 1);
    }
  return out;
}

/// C = sum a b / (sqrt(sum a^2) sqrt(sum b^2)). Maps on different grids are
/// compared on the coarser one, the finer map resampled bilinearly.
inline double correlation_coefficient(const IntensityMap& a, const IntensityMap& b) {
  if (!(a.grid == b.grid)) {
    if (a.grid.cell_area() >= b.grid.cell_area()) return correlation_coefficient(a, resample(b, a.grid));
    return correlation_coefficient(resample(a, b.grid), b);
  }
  const double na = a.values.norm(), nb = b.values.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateDataError("correlation of an all-zero intensity map");
  return std::clamp(a.values.cwiseProduct(b.values).sum() / (na * nb), 0.0, 1.0);
}

}  // namespace shtomo
