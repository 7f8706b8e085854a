#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "shtomo/tomography.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/setups.hpp"

using namespace shtomo;

namespace {

SensorGeometry qubit_line(std::vector<double> centers) {
  SensorGeometry::Params p;
  p.dimension = Dimension::One;
  for (double c : centers) p.lens_centers.push_back({c, 0.0});
  p.aperture = Aperture::square(2.0);
  p.pixels = PixelGrid::centered(31, 0, 0.2);
  return SensorGeometry(p);
}

const ModeBasis& qubit_basis() {
  static const ModeBasis b = ModeBasis::plane_waves({{-0.7, 0.0}, {1.1, 0.0}}, 2 * kPi);
  return b;
}

std::vector<double> as_std(const RVector& v) { return {v.data(), v.data() + v.size()}; }

CVector ket2(cplx a, cplx b) {
  CVector k(2);
  k << a, b;
  return k;
}

}  // namespace

TEST(HermitianBasis, QubitIsScaledPauliBasis) {
  const HermitianBasis hb(2);
  const auto pauli = oracle::pauli_over_sqrt2();
  ASSERT_EQ(hb.size(), 4u);
  const std::vector<std::string> labels{"I", "X0,1", "Y0,1", "Z1"};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(hb.label(k), labels[k]);
    EXPECT_LE((hb[k] - pauli[k]).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(HermitianBasis, GramMatrixIsIdentity) {
  for (std::size_t d : {1u, 2u, 3u, 5u, 8u, 16u}) {
    const HermitianBasis hb(d);
    ASSERT_EQ(hb.size(), d * d);
    std::size_t diag = 0, sym = 0, anti = 0;
    for (std::size_t k = 0; k < hb.size(); ++k) {
      EXPECT_LE(hermiticity_defect(hb[k]), 1e-15);
      const char c = hb.label(k)[0];
      diag += c == 'I' || c == 'Z';
      sym += c == 'X';
      anti += c == 'Y';
    }
    EXPECT_EQ(diag, d);
    EXPECT_EQ(sym, d * (d - 1) / 2);
    EXPECT_EQ(anti, d * (d - 1) / 2);
    double worst = 0.0;
    for (std::size_t a = 0; a < hb.size(); ++a)
      for (std::size_t b = a; b < hb.size(); ++b) {
        const cplx g = (hb[a] * hb[b]).trace();
        worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
      }
    EXPECT_LE(worst, 1e-12) << "d = " << d;
  }
  EXPECT_THROW(HermitianBasis(0), ArgumentError);
}

TEST(HermitianBasis, CoordinatesRoundTrip) {
  testgen::Rng rng(3);
  for (int d = 1; d <= 16; ++d) {
    const HermitianBasis hb(static_cast<std::size_t>(d));
    const CMatrix h = testgen::hermitian(rng, d);
    const RVector r = hb.coordinates(h);
    EXPECT_LE((hb.from_coordinates(r) - h).cwiseAbs().maxCoeff(), 1e-12) << "d = " << d;
  }
}

TEST(TomographyMatrix, RowsAreGammaCoordinatesOfPovmElements) {
  testgen::Rng rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = testgen::integer(rng, 2, 5);
    const auto s = setups::line_setup(rng, testgen::integer(rng, 1, 3), d, 21, 0.4);
    const HermitianBasis hb(static_cast<std::size_t>(d));
    const TomographyMatrix t = build_tomography_matrix(s.geom, s.basis, hb);
    ASSERT_EQ(static_cast<std::size_t>(t.p.rows()), s.geom.lens_count() * s.geom.pixel_count());
    for (Eigen::Index alpha = 0; alpha < t.p.rows(); ++alpha) {
      const auto [lens, pixel] = t.row_index[static_cast<std::size_t>(alpha)];
      const CMatrix pi = povm_element(s.basis, s.geom, lens, pixel).pi;
      for (std::size_t k = 0; k < hb.size(); ++k)
        EXPECT_NEAR(t.p(alpha, static_cast<Eigen::Index>(k)), (pi * hb[k]).trace().real(), 1e-10);
    }
  }
}

TEST(TomographyMatrix, PredictsBornIntensities) {
  testgen::Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = testgen::integer(rng, 2, 6);
    const auto s = setups::line_setup(rng, testgen::integer(rng, 1, 4), d, 41, 0.3);
    const HermitianBasis hb(static_cast<std::size_t>(d));
    const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
    const TomographyMatrix t = build_tomography_matrix(povms, hb);
    const CMatrix rho = testgen::density(rng, d);
    const RVector predicted = t.p * hb.coordinates(rho);
    const RVector born = povms.probabilities(rho);
    EXPECT_LE((predicted - born).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TomographyMatrix, DimensionMismatchIsRejected) {
  const PovmSet povms = PovmSet::from_sensor(qubit_basis(), qubit_line({0.0}));
  EXPECT_THROW(build_tomography_matrix(povms, HermitianBasis(3)), DimensionError);
}

TEST(TomographyMatrix, OnAxisQubitLensCannotSeeSigmaY) {
  const HermitianBasis hb(2);
  const SingularSpectrum s = singular_spectrum(build_tomography_matrix(qubit_line({0.0}), qubit_basis(), hb));
  EXPECT_EQ(s.numerical_rank(), 3u);
  std::size_t tiny = 0;
  for (Eigen::Index k = 0; k < s.values.size(); ++k) tiny += s.values(k) <= 1e-8 * s.largest();
  EXPECT_EQ(tiny, 1u);
  const auto missing = unobservable_directions(s, hb);
  ASSERT_EQ(missing.size(), 1u);
  EXPECT_EQ(missing[0].dominant_label, "Y0,1");
  EXPECT_GE(missing[0].alignment, 1.0 - 1e-6);
}

TEST(TomographyMatrix, OffAxisLensCompletesQubitTomography) {
  const HermitianBasis hb(2);
  const SingularSpectrum s = singular_spectrum(build_tomography_matrix(qubit_line({0.0, 2.9}), qubit_basis(), hb));
  EXPECT_EQ(s.numerical_rank(), 4u);
  EXPECT_TRUE(unobservable_directions(s, hb).empty());
}

TEST(TomographyMatrix, RankFollowsSaturatedMeasurementCount) {
  testgen::Rng rng(7);
  const int cases[][2] = {{1, 2}, {2, 3}, {2, 4}, {3, 5}, {4, 7}, {1, 4}, {3, 3}};
  for (const auto& c : cases) {
    const int m = c[0], d = c[1];
    const auto s = setups::line_setup(rng, m, d);
    const SingularSpectrum sp = singular_spectrum(build_tomography_matrix(s.geom, s.basis, HermitianBasis(d)));
    const int expected = std::min((2 * m + 1) * d - 3 * m, d * d);
    EXPECT_EQ(static_cast<int>(sp.numerical_rank()), expected) << "M = " << m << ", d = " << d;
  }
}

TEST(TomographyMatrix, AnalyticAndQuadratureKetsAgreeOnRank) {
  testgen::Rng rng(8);
  for (const auto& c : {std::pair{2, 3}, std::pair{3, 5}}) {
    const auto s = setups::line_setup(rng, c.first, c.second);
    std::vector<CVector> kets;
    for (const Point& lens : s.geom.lens_centers())
      for (std::size_t j = 0; j < s.geom.pixel_count(); ++j)
        kets.push_back(sinc_ket(s.momenta, lens.x, s.geom.pixel_momentum(j).x));
    const HermitianBasis hb(static_cast<std::size_t>(c.second));
    const auto analytic = singular_spectrum(build_tomography_matrix(PovmSet::from_kets(kets), hb));
    const auto numeric = singular_spectrum(build_tomography_matrix(s.geom, s.basis, hb));
    EXPECT_EQ(analytic.numerical_rank(), numeric.numerical_rank());
  }
}

TEST(SingularSpectrum, IdentityHasUnitValues) {
  const SingularSpectrum s = singular_spectrum(RMatrix::Identity(6, 6));
  EXPECT_LE((s.values - RVector::Ones(6)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(singular_spectrum(RMatrix(0, 0)), ArgumentError);
}

TEST(SingularSpectrum, FactorsReproduceMatrix) {
  testgen::Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = testgen::integer(rng, 2, 5);
    const auto setup = setups::line_setup(rng, testgen::integer(rng, 1, 3), d, 15, 0.6);
    const TomographyMatrix t = build_tomography_matrix(setup.geom, setup.basis, HermitianBasis(d));
    const SingularSpectrum s = singular_spectrum(t);
    EXPECT_EQ(s.values.size(), std::min<Eigen::Index>(t.p.rows(), d * d));
    for (Eigen::Index k = 0; k < s.values.size(); ++k) {
      EXPECT_GE(s.values(k), 0.0);
      if (k) EXPECT_LE(s.values(k), s.values(k - 1));
    }
    EXPECT_LE((s.u * s.values.asDiagonal() * s.v.transpose() - t.p).cwiseAbs().maxCoeff(), 1e-9 * s.largest());
  }
}

TEST(DynamicalRange, ThresholdLimits) {
  RVector v(5);
  v << 4.0, 4.0, 1.0, 1e-3, 0.0;
  const SingularSpectrum s{v, RMatrix::Identity(5, 5), RMatrix::Identity(5, 5)};
  EXPECT_EQ(dynamical_range(s, 1e-300).count, 4u);
  EXPECT_EQ(dynamical_range(s, 1.0).count, 2u);
  EXPECT_EQ(dynamical_range(s, 0.25).count, 3u);
  EXPECT_EQ(dynamical_range(s, 0.25).modes.cols(), 3);
  EXPECT_THROW(dynamical_range(s, 0.0), ArgumentError);
  EXPECT_THROW(dynamical_range(s, -0.1), ArgumentError);
  EXPECT_THROW(dynamical_range(s, 1.5), ArgumentError);
}

TEST(DynamicalRange, VortexFixtureCountIsStable) {
  const SensorGeometry g = setups::hex7_sensor();
  const ModeBasis b = setups::vortex_signal_state(0.2).basis();
  const HermitianBasis hb(7);
  const auto first = dynamical_range(singular_spectrum(build_tomography_matrix(g, b, hb)), 0.01).count;
  const auto second = dynamical_range(singular_spectrum(build_tomography_matrix(g, b, hb)), 0.01).count;
  EXPECT_EQ(first, second);
  EXPECT_GT(first, 0u);
  EXPECT_LE(first, 49u);
}

TEST(MlReconstruct, RecoversPureBasisState) {
  testgen::Rng rng(11);
  const auto s = setups::complete_line_setup(rng, 3);
  const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(1, 1) = 1.0;
  const auto data = as_std(povms.probabilities(rho));
  MlOptions opt;
  opt.reference = rho;
  const ReconstructionResult r = ml_reconstruct(data, povms, s.basis, opt);
  ASSERT_TRUE(r.fidelity.has_value());
  EXPECT_GE(*r.fidelity, 0.9999);
}

TEST(MlReconstruct, RecoversVortexSignalOnHexagonalSensor) {
  const CoherenceMatrix truth = setups::vortex_signal_state(0.2);
  const SensorGeometry g = setups::hex7_sensor();
  const IntensityRecord rec = simulate_intensities(truth, g);
  ASSERT_EQ(rec.values.size(), 847u);
  const ReconstructionResult r = ml_reconstruct(rec, g, truth.basis());
  EXPECT_GE(fidelity(r.rho_hat, truth), 0.99);
}

TEST(MlReconstruct, IteratesAreDensityMatricesWithMonotoneLikelihood) {
  testgen::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = testgen::integer(rng, 2, 5);
    const auto s = setups::complete_line_setup(rng, d);
    const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
    const CMatrix truth = testgen::density(rng, d, testgen::integer(rng, 1, d));
    RVector data = povms.probabilities(truth);
    for (Eigen::Index k = 0; k < data.size(); ++k) data(k) = std::max(0.0, data(k) * (1.0 + 0.05 * testgen::uniform(rng, -1, 1)));
    MlOptions opt;
    opt.max_iter = 400;
    double last = -std::numeric_limits<double>::infinity();
    std::size_t seen = 0;
    opt.observer = [&](std::size_t, const CMatrix& rho, double loglik) {
      ++seen;
      EXPECT_GE(loglik - last, -1e-9);
      last = loglik;
      EXPECT_LE(hermiticity_defect(rho), 1e-12);
      EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
      EXPECT_LE(std::abs(rho.trace().imag()), 1e-12);
      EXPECT_GE(hermitian_eigenvalues(rho)(0), -1e-10);
    };
    const ReconstructionResult r = ml_reconstruct(as_std(data), povms, s.basis, opt);
    EXPECT_EQ(seen, r.iterations + 1);
  }
}

TEST(MlReconstruct, KeepsLikelihoodTrace) {
  testgen::Rng rng(13);
  const auto s = setups::complete_line_setup(rng, 3);
  const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
  MlOptions opt;
  opt.keep_trace = true;
  opt.max_iter = 50;
  const auto r = ml_reconstruct(as_std(povms.probabilities(testgen::density(rng, 3))), povms, s.basis, opt);
  EXPECT_EQ(r.loglik_trace.size(), r.iterations + 1);
  EXPECT_DOUBLE_EQ(r.loglik_trace.back(), r.log_likelihood);
}

TEST(MlReconstruct, ScalingDataLeavesEstimateUnchanged) {
  testgen::Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = testgen::integer(rng, 2, 4);
    const auto s = setups::complete_line_setup(rng, d);
    const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
    const RVector p = povms.probabilities(testgen::density(rng, d));
    const double c = std::pow(10.0, testgen::uniform(rng, -3.0, 3.0));
    MlOptions opt;
    opt.max_iter = 300;
    const auto a = ml_reconstruct(as_std(p), povms, s.basis, opt);
    const auto b = ml_reconstruct(as_std(RVector(c * p)), povms, s.basis, opt);
    EXPECT_LE((a.rho_hat.rho() - b.rho_hat.rho()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(MlReconstruct, RejectsBadData) {
  const PovmSet povms = PovmSet::from_sensor(qubit_basis(), qubit_line({0.0, 2.9}));
  std::vector<double> zeros(povms.outcomes(), 0.0);
  EXPECT_THROW(ml_reconstruct(zeros, povms, qubit_basis()), DegenerateDataError);
  std::vector<double> shorter(povms.outcomes() - 1, 1.0);
  EXPECT_THROW(ml_reconstruct(shorter, povms, qubit_basis()), DimensionError);
  std::vector<double> negative(povms.outcomes(), 1.0);
  negative[3] = -1.0;
  EXPECT_THROW(ml_reconstruct(negative, povms, qubit_basis()), ArgumentError);
}

TEST(MlReconstruct, FloorsImpossibleOutcomesWithWarning) {
  const std::vector<CVector> kets{ket2(1, 0), ket2(0, 1), ket2(1, 1), ket2(1, cplx(0, 1)), ket2(0, 0)};
  const PovmSet povms = PovmSet::from_kets(kets);
  const std::vector<double> data{0.3, 0.2, 0.25, 0.2, 0.05};
  const auto r = ml_reconstruct(data, povms, qubit_basis());
  bool warned = false;
  for (const auto& w : r.warnings) warned = warned || w.find("floored") != std::string::npos;
  EXPECT_TRUE(warned);
  EXPECT_TRUE(std::isfinite(r.log_likelihood));
}

TEST(MlReconstruct, IncompleteQubitSetupConvergesButMissesSigmaY) {
  const PovmSet povms = PovmSet::from_sensor(qubit_basis(), qubit_line({0.0}));
  CVector psi(2);
  psi << 0.8, cplx(0.0, 0.6);
  const CMatrix truth = psi * psi.adjoint();
  MlOptions opt;
  opt.reference = truth;
  const auto r = ml_reconstruct(as_std(povms.probabilities(truth)), povms, qubit_basis(), opt);
  EXPECT_LT(r.iterations, opt.max_iter);
  EXPECT_LT(*r.fidelity, 0.9);
  // the estimate reproduces the data even though the state is not identified
  EXPECT_LE((povms.probabilities(r.rho_hat.rho()) - povms.probabilities(truth)).cwiseAbs().maxCoeff(),
            1e-6 * povms.probabilities(truth).maxCoeff());
}

TEST(LinearReconstruct, RecoversNoiselessStateExactly) {
  testgen::Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = testgen::integer(rng, 2, 6);
    const auto s = setups::complete_line_setup(rng, d);
    const HermitianBasis hb(static_cast<std::size_t>(d));
    const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
    const CMatrix truth = testgen::density(rng, d);
    const auto lin = linear_reconstruct(as_std(povms.probabilities(truth)), build_tomography_matrix(povms, hb), hb, s.basis);
    EXPECT_EQ(lin.rank, static_cast<std::size_t>(d * d));
    EXPECT_GE(fidelity(lin.rho.rho(), truth), 1.0 - 1e-9);
    EXPECT_LE(lin.projection_shift, 1e-9);
  }
}

TEST(LinearReconstruct, IncompleteSetupHasNoUnobservableComponent) {
  const HermitianBasis hb(2);
  const PovmSet povms = PovmSet::from_sensor(qubit_basis(), qubit_line({0.0}));
  const SingularSpectrum s = singular_spectrum(build_tomography_matrix(povms, hb));
  testgen::Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const auto lin = linear_reconstruct(as_std(povms.probabilities(testgen::density(rng, 2))), s, hb, qubit_basis());
    EXPECT_EQ(lin.rank, 3u);
    EXPECT_LE(std::abs(lin.coordinates(2)), 1e-12 * lin.coordinates.norm());
    EXPECT_LE(std::abs(lin.unprojected(0, 1).imag()), 1e-12);
  }
}

TEST(LinearReconstruct, NoisyProjectionShiftIsBoundedByEstimateError) {
  testgen::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = testgen::integer(rng, 2, 5);
    const auto s = setups::complete_line_setup(rng, d);
    const HermitianBasis hb(static_cast<std::size_t>(d));
    const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
    const CoherenceMatrix truth(testgen::density(rng, d, 1), s.basis);
    const IntensityRecord noisy = simulate_intensities(truth, s.geom, povms, NoiseSpec::gaussian(0.01, 100 + trial));
    const auto lin = linear_reconstruct(noisy.values, build_tomography_matrix(povms, hb), hb, s.basis);
    // nearest-point projection onto the density matrices moves no farther than the truth lies
    EXPECT_LE(lin.projection_shift, frobenius_distance(lin.unprojected, truth.rho()) + 1e-12);
    EXPECT_GT(lin.projection_shift, 0.0);
  }
}

TEST(Reconstructors, AgreeOnNoiselessCompleteData) {
  testgen::Rng rng(18);
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 100; ++trial) {
    const int d = testgen::integer(rng, 2, 7);
    const auto s = setups::complete_line_setup(rng, d);
    const HermitianBasis hb(static_cast<std::size_t>(d));
    const PovmSet povms = PovmSet::from_sensor(s.basis, s.geom);
    const CMatrix truth = testgen::density(rng, d);
    const auto data = as_std(povms.probabilities(truth));
    MlOptions opt;
    opt.reference = truth;
    const auto ml = ml_reconstruct(data, povms, s.basis, opt);
    const auto lin = linear_reconstruct(data, build_tomography_matrix(povms, hb), hb, s.basis);
    EXPECT_GE(*ml.fidelity, 0.999) << "trial " << trial << ", d = " << d;
    EXPECT_GE(fidelity(lin.rho.rho(), truth), 0.999);
    EXPECT_GE(fidelity(lin.rho, ml.rho_hat), 0.999);
  }
  RecordProperty("seconds", std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()));
}
