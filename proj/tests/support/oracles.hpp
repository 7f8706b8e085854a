#pragma once

// Independent reference computations. These deliberately avoid the library's
// quadrature, transform and contraction code paths.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "shtomo/linalg.hpp"

namespace oracle {

using shtomo::cplx;
using shtomo::CMatrix;
using shtomo::CVector;
using shtomo::RMatrix;
constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

/// Slit response of a plane wave: a_m = exp(-i p_m dx) sinc((dp + p_m) a / 2).
inline CMatrix slit_povm(const std::vector<double>& p, double dx, double dp, double side) {
  const auto d = static_cast<Eigen::Index>(p.size());
  CVector a(d);
  for (Eigen::Index m = 0; m < d; ++m) {
    const double z = (dp + p[static_cast<std::size_t>(m)]) * side / 2.0;
    const double s = z == 0.0 ? 1.0 : std::sin(z) / z;
    a(m) = std::exp(-kI * p[static_cast<std::size_t>(m)] * dx) * s;
  }
  CMatrix pi(d, d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n) pi(m, n) = std::conj(a(m)) * a(n);
  return pi;
}

/// Overlap of a plane wave exp(-i p x) with the Gaussian wavepacket exp(-(x-c)^2 / 2w^2) exp(i dp (x-c))
/// used by a Gaussian aperture of width w centred at c, divided by the aperture area sqrt(2 pi) w.
inline cplx gaussian_plane_overlap(double p, double c, double dp, double w) {
  return std::exp(-kI * p * c) * std::exp(-0.5 * w * w * (dp + p) * (dp + p));
}

/// Fraunhofer field of the unit-norm Gaussian sqrt(2/pi)/w0 exp(-r^2/w0^2) at the focal plane of a
/// lens with focal length f: U(u) = C pi w0^2 exp(-(k u w0 / 2f)^2) / (i lambda f).
inline cplx gaussian_far_field(double r, double w0, double lambda, double f) {
  const double c = std::sqrt(2.0 / kPi) / w0;
  const double q = 2.0 * kPi / lambda * r / f;
  return c * kPi * w0 * w0 * std::exp(-q * q * w0 * w0 / 4.0) / (kI * lambda * f);
}

/// Brute-force focal-plane intensity from the mutual coherence G(x', x'') on a source grid:
/// I(u) = sum_{x', x''} h(u, x') conj(h(u, x'')) G(x', x'') dA^2 with h = exp(-i k u.x / f) / (i lambda f).
/// `field(m, x, y)` evaluates mode m; G is built from explicit mode sums.
inline std::vector<double> fraunhofer_intensity_4d(const CMatrix& rho, const std::function<cplx(int, double, double)>& field,
                                                   const std::vector<double>& xs, const std::vector<double>& ys,
                                                   double h, const std::vector<double>& us,
                                                   const std::vector<double>& vs, double lambda, double f) {
  const int d = static_cast<int>(rho.rows());
  const std::size_t n = xs.size() * ys.size();
  std::vector<double> px(n), py(n);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      px[i * ys.size() + j] = xs[i];
      py[i * ys.size() + j] = ys[j];
    }
  std::vector<cplx> g(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      cplx s = 0.0;
      for (int m = 0; m < d; ++m)
        for (int k = 0; k < d; ++k) s += field(m, px[a], py[a]) * rho(m, k) * std::conj(field(k, px[b], py[b]));
      g[a * n + b] = s;
    }
  const double kf = 2.0 * kPi / lambda / f;
  const double norm = h * h * h * h / (lambda * f * lambda * f);
  std::vector<double> out;
  for (double u : us)
    for (double v : vs) {
      std::vector<cplx> hk(n);
      for (std::size_t a = 0; a < n; ++a) hk[a] = std::exp(-kI * kf * (u * px[a] + v * py[a]));
      cplx s = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) s += hk[a] * std::conj(hk[b]) * g[a * n + b];
      out.push_back(s.real() * norm);
    }
  return out;
}

inline std::vector<CMatrix> pauli_over_sqrt2() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix i2 = CMatrix::Identity(2, 2) * r;
  CMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -kI, kI, 0;
  z << 1, 0, 0, -1;
  return {i2, x * r, y * r, z * r};
}

/// Root fidelity of two commuting (simultaneously diagonal) density matrices.
inline double commuting_fidelity(const std::vector<double>& p, const std::vector<double>& q) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) f += std::sqrt(p[k] * q[k]);
  return f;
}

/// Point-in-hexagon test for a flat-to-flat width w with flats normal to 0, 60 and 120 degrees.
inline bool inside_hexagon(double x, double y, double w) {
  for (int k = 0; k < 3; ++k) {
    const double t = k * kPi / 3.0;
    if (std::abs(x * std::cos(t) + y * std::sin(t)) > w / 2.0) return false;
  }
  return true;
}

/// Midpoint-rule response amplitude of an arbitrary mode under an indicator aperture, on a square
/// box of side `box` with n points per axis: (1/S) sum A(x) psi(c + x) exp(-i dp.x) dA.
inline cplx indicator_response(const std::function<cplx(double, double)>& psi, const std::function<bool(double, double)>& inside,
                               double cx, double cy, double dpx, double dpy, double box, int n) {
  const double h = box / n;
  cplx s = 0.0;
  double area = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = -box / 2 + (i + 0.5) * h, y = -box / 2 + (j + 0.5) * h;
      if (!inside(x, y)) continue;
      s += psi(cx + x, cy + y) * std::exp(-kI * (dpx * x + dpy * y));
      area += 1.0;
    }
  return s / area;
}

}  // namespace oracle
