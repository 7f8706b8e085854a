#pragma once

// Conventional Shack-Hartmann processing: spot centroids, zonal slope
// integration, and coherent propagation of sqrt(I) exp(i k W). This is the
// comparator that assumes a single wavefront.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "shtomo/errors.hpp"
#include "shtomo/field_model.hpp"
#include "shtomo/linalg.hpp"
#include "shtomo/propagation.hpp"
#include "shtomo/sensor.hpp"

namespace shtomo {

struct SlopeField {
  std::vector<Point> displacement;  // centroid shift on the CCD, length units
  std::vector<Point> slope;         // displacement / f
  std::vector<double> power;        // summed pixel intensity per lens
  std::vector<double> intensity;    // power relative to a unit plane wave through the same lens
  std::vector<bool> valid;

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (bool v : valid) n += v ? 1 : 0;
    return n;
  }
};

/// Intensities of a unit-amplitude on-axis plane wave, the centroid reference.
inline IntensityRecord reference_intensities(const SensorGeometry& geom) {
  // a second, slightly tilted mode only satisfies the two-mode minimum of ModeBasis
  const double tiny = 1e-9 * geom.momentum_scale() * std::max(geom.pixels().pitch, 1e-12);
  const ModeBasis flat = ModeBasis::plane_waves({{0.0, 0.0}, {tiny, 0.0}}, geom.wavelength());
  CMatrix rho = CMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  return simulate_intensities(CoherenceMatrix(rho, flat), geom);
}

/// Intensity-weighted spot centroid of every lens relative to the on-axis reference.
/// Lenses whose power is below floor_fraction of the mean lens power are invalid.
inline SlopeField centroid_slopes(const IntensityRecord& data, const SensorGeometry& geom, double floor_fraction = 0.01) {
  if (data.lenses != geom.lens_count() || data.pixels_per_lens() != geom.pixel_count())
    throw DimensionError("intensity record does not match the sensor geometry");
  if (geom.pixel_count() == 0) throw ArgumentError("lens pixel grids are empty");
  const IntensityRecord ref = reference_intensities(geom);
  auto centroid = [&](const IntensityRecord& r, std::size_t lens, double& power) {
    Point c{};
    power = 0.0;
    for (std::size_t j = 0; j < geom.pixel_count(); ++j) {
      const double v = r.value(lens, j);
      const Point u = geom.pixel_position(j);
      c.x += v * u.x;
      c.y += v * u.y;
      power += v;
    }
    if (power > 0.0) c = {c.x / power, c.y / power};
    return c;
  };

  SlopeField s;
  const std::size_t n = geom.lens_count();
  double mean = 0.0;
  std::vector<Point> cents(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 0.0, pref = 0.0;
    cents[i] = centroid(data, i, p);
    const Point cref = centroid(ref, i, pref);
    s.power.push_back(p);
    s.intensity.push_back(pref > 0.0 ? p / pref : 0.0);
    s.displacement.push_back(cents[i] - cref);
    mean += p / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    s.valid.push_back(mean > 0.0 && s.power[i] >= floor_fraction * mean);
    s.slope.push_back({s.displacement[i].x / geom.focal_length(), s.displacement[i].y / geom.focal_length()});
  }
  if (s.valid_count() == 0) throw DegenerateDataError("no lens carries enough light for a centroid");
  return s;
}

struct Wavefront {
  std::vector<double> w;  // optical path at each lens center; zero for invalid lenses
  std::vector<bool> valid;
  double residual_rms = 0.0;       // RMS misfit of the edge equations, length units
  double relative_residual = 0.0;  // residual_rms / RMS of the edge targets
};

/// Zonal least-squares integration of slopes over the lens adjacency graph.
///
/// Every pair of valid lenses closer than 1.5 nearest-neighbor spacings gives
/// W_j - W_i = (s_i + s_j)/2 . (c_j - c_i). Piston is fixed by W = 0 at the first valid lens.
inline Wavefront reconstruct_wavefront(const SlopeField& slopes, const SensorGeometry& geom) {
  const std::size_t n = geom.lens_count();
  if (slopes.valid.size() != n) throw DimensionError("slope field does not match the sensor geometry");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (slopes.valid[i]) idx.push_back(i);
  if (idx.size() < 3) throw DegenerateDataError("wavefront integration needs at least three valid lenses");
  const auto& c = geom.lens_centers();

  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) spacing = std::min(spacing, (c[idx[a]] - c[idx[b]]).norm());

  struct Edge {
    std::size_t a, b;
    double target;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const Point dc = c[idx[b]] - c[idx[a]];
      if (dc.norm() > 1.5 * spacing) continue;
      const Point sa = slopes.slope[idx[a]], sb = slopes.slope[idx[b]];
      edges.push_back({a, b, 0.5 * ((sa.x + sb.x) * dc.x + (sa.y + sb.y) * dc.y)});
      adj[a].push_back(b);
      adj[b].push_back(a);
    }

  std::vector<bool> seen(idx.size(), false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t u : adj[v])
      if (!seen[u]) {
        seen[u] = true;
        ++reached;
        q.push(u);
      }
  }
  if (reached != idx.size()) throw GeometryError("valid lenses do not form a connected graph");

  const auto unknowns = static_cast<Eigen::Index>(idx.size() - 1);
  RMatrix a = RMatrix::Zero(static_cast<Eigen::Index>(edges.size()), unknowns);
  RVector rhs(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto row = static_cast<Eigen::Index>(e);
    if (edges[e].b > 0) a(row, static_cast<Eigen::Index>(edges[e].b - 1)) += 1.0;
    if (edges[e].a > 0) a(row, static_cast<Eigen::Index>(edges[e].a - 1)) -= 1.0;
    rhs(row) = edges[e].target;
  }
  const RVector sol = a.colPivHouseholderQr().solve(rhs);
  const RVector resid = a * sol - rhs;

  Wavefront wf;
  wf.w.assign(n, 0.0);
  wf.valid = slopes.valid;
  for (std::size_t k = 1; k < idx.size(); ++k) wf.w[idx[k]] = sol(static_cast<Eigen::Index>(k - 1));
  const double m = static_cast<double>(edges.size());
  wf.residual_rms = std::sqrt(resid.squaredNorm() / m);
  const double target_rms = std::sqrt(rhs.squaredNorm() / m);
  wf.relative_residual = target_rms > 0.0 ? wf.residual_rms / target_rms : 0.0;
  return wf;
}

namespace detail {

/// Exact Gaussian radial-basis interpolation through scattered samples.
class GaussianRbf {
 public:
  GaussianRbf(std::vector<Point> nodes, const std::vector<double>& values, double width)
      : nodes_(std::move(nodes)), width_(width) {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    RMatrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(nodes_[static_cast<std::size_t>(i)] - nodes_[static_cast<std::size_t>(j)]);
    k += 1e-10 * RMatrix::Identity(n, n);
    const RVector v = Eigen::Map<const RVector>(values.data(), n);
    coeff_ = k.ldlt().solve(v);
  }

  double operator()(Point p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += coeff_(static_cast<Eigen::Index>(i)) * kernel(p - nodes_[i]);
    return s;
  }

 private:
  double kernel(Point d) const { return std::exp(-(d.x * d.x + d.y * d.y) / (2.0 * width_ * width_)); }

  std::vector<Point> nodes_;
  double width_;
  RVector coeff_;
};

}  // namespace detail

/// Far field predicted under full coherence: per-lens intensity and wavefront are
/// interpolated onto kernel.source, U = sqrt(I) exp(i k W) is propagated coherently.
inline IntensityMap standard_far_field(const SlopeField& slopes, const Wavefront& wf, const SensorGeometry& geom,
                                       const ResponseKernel& kernel) {
  if (geom.dimension() != Dimension::Two) throw DimensionError("standard far-field prediction needs a 2D sensor");
  const auto& c = geom.lens_centers();
  if (slopes.intensity.size() != c.size() || wf.w.size() != c.size())
    throw DimensionError("slope field or wavefront does not match the sensor geometry");

  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b) spacing = std::min(spacing, (c[a] - c[b]).norm());
  if (!std::isfinite(spacing)) spacing = geom.aperture().size > 0.0 ? geom.aperture().size : 1.0;
  const double width = 0.6 * spacing;

  const detail::GaussianRbf intensity(c, slopes.intensity, width);
  std::vector<Point> wn;
  std::vector<double> wv;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (wf.valid[i]) {
      wn.push_back(c[i]);
      wv.push_back(wf.w[i]);
    }
  const detail::GaussianRbf path(wn, wv, width);

  const double k0 = 2.0 * kPi / geom.wavelength();
  const Grid2D& src = kernel.source;
  CMatrix field(static_cast<Eigen::Index>(src.nx), static_cast<Eigen::Index>(src.ny));
  for (std::size_t i = 0; i < src.nx; ++i)
    for (std::size_t j = 0; j < src.ny; ++j) {
      const Point p = src.at(i, j);
      field(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::polar(std::sqrt(std::max(intensity(p), 0.0)), k0 * path(p));
    }
  const CMatrix out = propagate_field(field, kernel);
  return {kernel.output, out.cwiseAbs2()};
}

}  // namespace shtomo
