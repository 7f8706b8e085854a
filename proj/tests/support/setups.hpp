#pragma once

// Reusable sensor setups for tests and the acceptance runner.

#include <cmath>
#include <vector>

#include "shtomo/sensor.hpp"
#include "support/generators.hpp"

namespace setups {

using namespace shtomo;

struct LineSetup {
  std::vector<double> momenta;
  ModeBasis basis;
  SensorGeometry geom;
};

/// d plane waves spread over [-6, 6] and M square lenses (side 2) at generic positions,
/// seen through a dense 1D pixel row. f = 1 and lambda = 2 pi. The default row spans
/// momenta +-20 so that the weakest normal modes stay well above the rank threshold.
inline LineSetup line_setup(testgen::Rng& rng, int lenses, int d, std::size_t pixels = 801, double pitch = 0.05) {
  std::vector<double> p;
  std::vector<Point> modes;
  for (int k = 0; k < d; ++k) {
    const double v = -6.0 + 12.0 * k / (d - 1) + 0.3 * testgen::uniform(rng, -1.0, 1.0);
    p.push_back(v);
    modes.push_back({v, 0.0});
  }
  SensorGeometry::Params g;
  g.dimension = Dimension::One;
  for (int i = 0; i < lenses; ++i) g.lens_centers.push_back({i * 2.37 + 0.12 * testgen::uniform(rng, -1.0, 1.0), 0.0});
  g.aperture = Aperture::square(2.0);
  g.pixels = PixelGrid::centered(pixels, 0, pitch);
  g.quadrature_points = 256;
  return {p, ModeBasis::plane_waves(modes, 2.0 * kPi), SensorGeometry(g)};
}

/// d + 2 lenses: informationally complete with a comfortable margin. The bare minimum
/// leaves normal modes three orders of magnitude below the strongest, which stalls ML.
inline LineSetup complete_line_setup(testgen::Rng& rng, int d) { return line_setup(rng, d + 2, d, 101, 0.4); }

/// Seven hexagonal lenses of 0.3 mm pitch, f = 17.9 mm, 11 x 11 pixels of 9.9 um, 633 nm.
inline SensorGeometry hex7_sensor(std::size_t quadrature = 128) {
  SensorGeometry::Params p;
  p.lens_centers = SensorGeometry::hexagonal_layout(1, 0.3);
  p.aperture = Aperture::hexagon(0.3);
  p.focal_length = 17.9;
  p.wavelength = 633e-6;
  p.pixels = PixelGrid::centered(11, 11, 0.0099);
  p.quadrature_points = quadrature;
  return SensorGeometry(p);
}

/// Charges -9..9 in steps of 3; the signal is (-0.5i V-6 + V-3) mixed with V3 at weight 1/2.
inline CoherenceMatrix vortex_signal_state(double waist) {
  const ModeBasis b = ModeBasis::vortex({-9, -6, -3, 0, 3, 6, 9}, waist, 633e-6);
  CVector a = CVector::Zero(7), c = CVector::Zero(7);
  a(1) = cplx(0.0, -0.5);
  a(2) = 1.0;
  c(4) = 1.0;
  return coherence_from_mixture({{{1.0, a}, {0.5, c}}}, b);
}

}  // namespace setups
